#pragma once

#include "rfsep/tensor.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rfsep {

using NamedTensors = std::vector<std::pair<std::string, ag::Tensor>>;

// Checkpoint = <prefix>.bin (raw f32 tensor payloads back to back) plus
// <prefix>.json (ordered index of name, shape, byte offset). The JSON side
// makes checkpoints inspectable without this library.
void checkpoint_save(const std::string& prefix, const NamedTensors& tensors);
NamedTensors checkpoint_load(const std::string& prefix);

// Copies loaded values into matching destination tensors; throws with a
// shape diff listing when names or shapes disagree.
void checkpoint_restore(const std::string& prefix, NamedTensors& dest);

} // namespace rfsep
