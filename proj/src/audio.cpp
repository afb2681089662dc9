#include "rfsep/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rfsep {

AudioSignal::AudioSignal(std::vector<double> s, double fs) : samples(std::move(s)), sample_rate_hz(fs) {
    validate();
}

void AudioSignal::validate() const {
    if (sample_rate_hz <= 0.0)
        throw std::invalid_argument("AudioSignal: sample_rate_hz must be positive");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("AudioSignal: non-finite sample");
}

bool AudioSignal::clipped() const {
    return std::any_of(samples.begin(), samples.end(),
                       [](double v) { return std::abs(v) > 1.0; });
}

namespace {

struct WavHeader {
    uint16_t format = 0;
    uint16_t channels = 0;
    uint32_t sample_rate = 0;
    uint16_t bits_per_sample = 0;
    size_t data_offset = 0;
    size_t data_size = 0;
};

void put_u32(std::ofstream& f, uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void put_u16(std::ofstream& f, uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); }

WavHeader parse_header(std::ifstream& f, const std::string& path) {
    char tag[4];
    uint32_t size = 0;
    f.read(tag, 4);
    if (!f || std::memcmp(tag, "RIFF", 4) != 0)
        throw std::runtime_error("wav_read: " + path + " is not a RIFF file");
    f.read(reinterpret_cast<char*>(&size), 4);
    f.read(tag, 4);
    if (!f || std::memcmp(tag, "WAVE", 4) != 0)
        throw std::runtime_error("wav_read: " + path + " has no WAVE form");
    WavHeader h;
    bool have_fmt = false;
    while (f.read(tag, 4)) {
        f.read(reinterpret_cast<char*>(&size), 4);
        if (!f) break;
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            uint32_t byte_rate;
            uint16_t block_align;
            f.read(reinterpret_cast<char*>(&h.format), 2);
            f.read(reinterpret_cast<char*>(&h.channels), 2);
            f.read(reinterpret_cast<char*>(&h.sample_rate), 4);
            f.read(reinterpret_cast<char*>(&byte_rate), 4);
            f.read(reinterpret_cast<char*>(&block_align), 2);
            f.read(reinterpret_cast<char*>(&h.bits_per_sample), 2);
            if (size > 16) f.seekg(size - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            h.data_offset = static_cast<size_t>(f.tellg());
            h.data_size = size;
            return have_fmt ? h : throw std::runtime_error("wav_read: data before fmt in " + path);
        } else {
            f.seekg(size + (size & 1), std::ios::cur);
        }
    }
    throw std::runtime_error("wav_read: malformed or truncated WAV header in " + path);
}

} // namespace

AudioSignal wav_read(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("wav_read: cannot open " + path);
    const WavHeader h = parse_header(f, path);
    if (h.channels != 1)
        throw std::runtime_error("wav_read: only mono supported, " + path + " has " +
                                 std::to_string(h.channels) + " channels");
    AudioSignal a;
    a.sample_rate_hz = h.sample_rate;
    f.seekg(static_cast<long>(h.data_offset));
    if (h.format == 1 && h.bits_per_sample == 16) {
        const size_t n = h.data_size / 2;
        std::vector<int16_t> buf(n);
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(h.data_size));
        if (!f) throw std::runtime_error("wav_read: short data chunk in " + path);
        a.samples.resize(n);
        for (size_t i = 0; i < n; ++i) a.samples[i] = buf[i] / 32768.0;
    } else if (h.format == 3 && h.bits_per_sample == 32) {
        const size_t n = h.data_size / 4;
        std::vector<float> buf(n);
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(h.data_size));
        if (!f) throw std::runtime_error("wav_read: short data chunk in " + path);
        a.samples.assign(buf.begin(), buf.end());
    } else {
        throw std::runtime_error("wav_read: unsupported encoding (format " +
                                 std::to_string(h.format) + ", " +
                                 std::to_string(h.bits_per_sample) + " bits) in " + path);
    }
    a.validate();
    return a;
}

void wav_write(const std::string& path, const AudioSignal& a, WavEncoding encoding) {
    a.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("wav_write: cannot open " + path);
    const bool pcm = encoding == WavEncoding::Pcm16;
    const uint32_t bytes_per_sample = pcm ? 2 : 4;
    const auto data_size = static_cast<uint32_t>(a.size() * bytes_per_sample);
    const auto rate = static_cast<uint32_t>(std::llround(a.sample_rate_hz));
    f.write("RIFF", 4);
    put_u32(f, 36 + data_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(f, 16);
    put_u16(f, pcm ? 1 : 3);
    put_u16(f, 1); // mono
    put_u32(f, rate);
    put_u32(f, rate * bytes_per_sample);
    put_u16(f, static_cast<uint16_t>(bytes_per_sample));
    put_u16(f, static_cast<uint16_t>(bytes_per_sample * 8));
    f.write("data", 4);
    put_u32(f, data_size);
    if (pcm) {
        std::vector<int16_t> buf(a.size());
        for (size_t i = 0; i < a.size(); ++i) {
            const long q = std::lround(std::clamp(a.samples[i], -1.0, 1.0) * 32768.0);
            buf[i] = static_cast<int16_t>(std::clamp(q, -32768l, 32767l));
        }
        f.write(reinterpret_cast<const char*>(buf.data()), data_size);
    } else {
        std::vector<float> buf(a.samples.begin(), a.samples.end());
        f.write(reinterpret_cast<const char*>(buf.data()), data_size);
    }
    if (!f) throw std::runtime_error("wav_write: short write to " + path);
}

} // namespace rfsep
