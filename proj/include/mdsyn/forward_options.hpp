#pragma once

#include <string>

#include "mdsyn/rng.hpp"

namespace mdsyn {

// Shared knobs for a forward pass. rng must be set when training with
// dropout > 0.
struct ForwardOptions {
  bool training = false;
  double dropout = 0.0;
  std::string activation = "relu";  // relu | gelu
  std::string pooling = "mean";     // mean | max
  Rng* rng = nullptr;
};

}  // namespace mdsyn
