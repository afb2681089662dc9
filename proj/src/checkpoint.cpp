#include "rfsep/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace rfsep {

using nlohmann::json;

void checkpoint_save(const std::string& prefix, const NamedTensors& tensors) {
    std::ofstream bin(prefix + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("checkpoint_save: cannot open " + prefix + ".bin");
    json index = json::array();
    size_t offset = 0;
    for (const auto& [name, t] : tensors) {
        bin.write(reinterpret_cast<const char*>(t.data().data()),
                  static_cast<std::streamsize>(t.numel() * sizeof(float)));
        index.push_back({{"name", name},
                         {"shape", t.shape()},
                         {"offset_bytes", offset},
                         {"dtype", "f32"}});
        offset += t.numel() * sizeof(float);
    }
    if (!bin) throw std::runtime_error("checkpoint_save: short write to " + prefix + ".bin");
    std::ofstream idx(prefix + ".json");
    if (!idx) throw std::runtime_error("checkpoint_save: cannot open " + prefix + ".json");
    idx << index.dump(2) << '\n';
}

NamedTensors checkpoint_load(const std::string& prefix) {
    std::ifstream idx(prefix + ".json");
    if (!idx) throw std::runtime_error("checkpoint_load: cannot open " + prefix + ".json");
    const json index = json::parse(idx);
    std::ifstream bin(prefix + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("checkpoint_load: cannot open " + prefix + ".bin");
    NamedTensors out;
    for (const auto& entry : index) {
        const auto name = entry.at("name").get<std::string>();
        const auto shape = entry.at("shape").get<std::vector<size_t>>();
        size_t n = 1;
        for (size_t d : shape) n *= d;
        std::vector<float> data(n);
        bin.seekg(static_cast<long>(entry.at("offset_bytes").get<size_t>()));
        bin.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(n * sizeof(float)));
        if (!bin) throw std::runtime_error("checkpoint_load: truncated payload for tensor " + name);
        out.emplace_back(name, ag::Tensor::from_data(shape, std::move(data)));
    }
    return out;
}

void checkpoint_restore(const std::string& prefix, NamedTensors& dest) {
    const NamedTensors loaded = checkpoint_load(prefix);
    std::string diffs;
    if (loaded.size() != dest.size())
        diffs += "tensor count " + std::to_string(loaded.size()) + " vs " +
                 std::to_string(dest.size()) + "; ";
    for (size_t i = 0; i < std::min(loaded.size(), dest.size()); ++i) {
        if (loaded[i].first != dest[i].first || loaded[i].second.shape() != dest[i].second.shape())
            diffs += loaded[i].first + ag::shape_str(loaded[i].second.shape()) + " vs " +
                     dest[i].first + ag::shape_str(dest[i].second.shape()) + "; ";
    }
    if (!diffs.empty())
        throw std::runtime_error("checkpoint_restore: checkpoint/model mismatch: " + diffs);
    for (size_t i = 0; i < dest.size(); ++i) dest[i].second.data() = loaded[i].second.data();
}

} // namespace rfsep
