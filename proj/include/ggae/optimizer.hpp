#pragma once

#include <vector>

#include "ggae/autodiff.hpp"

namespace ggae {

struct AdamConfig {
  Scalar learning_rate = 0.01;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar epsilon = 1e-8;
};

// First/second-moment buffers for one fixed parameter list. The step counter
// increments by exactly one per adam_step call.
class AdamState {
 public:
  explicit AdamState(const std::vector<Tensor>& params, AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  long step_count() const { return step_count_; }

 private:
  friend void adam_step(std::vector<Tensor>& params, AdamState& state);

  AdamConfig config_;
  std::vector<Mat> first_moment_;
  std::vector<Mat> second_moment_;
  long step_count_ = 0;
};

// Bias-corrected Adam update, applied in place. Every parameter must carry a
// populated gradient (ContractError otherwise); the consumed gradients are
// cleared.
void adam_step(std::vector<Tensor>& params, AdamState& state);

}  // namespace ggae
