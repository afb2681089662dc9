#pragma once

#include <string>
#include <vector>

namespace rfsep {

// Mono real-valued audio in [-1, 1].
struct AudioSignal {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;

    AudioSignal() = default;
    AudioSignal(std::vector<double> s, double fs);

    size_t size() const { return samples.size(); }
    void validate() const;      // throws on non-finite samples or bad rate
    bool clipped() const;       // any sample beyond +-1
};

enum class WavEncoding { Pcm16, Float32 };

// Mono RIFF WAV. Read supports 16-bit PCM and 32-bit float; anything else
// fails with a descriptive error.
AudioSignal wav_read(const std::string& path);
void wav_write(const std::string& path, const AudioSignal& a,
               WavEncoding encoding = WavEncoding::Float32);

} // namespace rfsep
