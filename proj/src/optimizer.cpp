#include "ggae/optimizer.hpp"

#include <cmath>
#include <string>

namespace ggae {

AdamState::AdamState(const std::vector<Tensor>& params, AdamConfig config) : config_(config) {
  if (config_.learning_rate <= 0.0) {
    throw ConfigError("adam: learning rate must be positive");
  }
  first_moment_.reserve(params.size());
  second_moment_.reserve(params.size());
  for (const Tensor& p : params) {
    first_moment_.push_back(Mat::Zero(p.rows(), p.cols()));
    second_moment_.push_back(Mat::Zero(p.rows(), p.cols()));
  }
}

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (params.size() != state.first_moment_.size()) {
    throw ContractError("adam_step: parameter list does not match the state it was built from");
  }
  const AdamConfig& cfg = state.config_;
  state.step_count_ += 1;
  const Scalar t = static_cast<Scalar>(state.step_count_);
  const Scalar bias1 = 1.0 - std::pow(cfg.beta1, t);
  const Scalar bias2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    if (!p.has_grad()) {
      throw ContractError("adam_step: parameter " + std::to_string(i) +
                          " has no gradient; run backward first");
    }
    const Mat& g = p.grad();
    Mat& m = state.first_moment_[i];
    Mat& v = state.second_moment_[i];
    if (m.rows() != g.rows() || m.cols() != g.cols()) {
      throw ContractError("adam_step: gradient shape drifted for parameter " + std::to_string(i));
    }
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const Mat m_hat = m / bias1;
    const Mat v_hat = v / bias2;
    Mat updated = p.value().array() -
                  cfg.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon);
    p.set_value(std::move(updated));
    p.tape()->drop_grad(p.id());
  }
}

}  // namespace ggae
