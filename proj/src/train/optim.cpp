#include <cmath>

#include "amlgnn/error.hpp"
#include "amlgnn/optim.hpp"

namespace amlgnn {

void AdamState::init(const std::vector<ad::Tensor>& params) {
  step = 0;
  m.clear();
  v.clear();
  for (const auto& p : params) {
    m.emplace_back(p.size(), 0.0);
    v.emplace_back(p.size(), 0.0);
  }
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::int64_t t, double lr, double weight_decay,
                 const AdamConfig& cfg) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + weight_decay * param[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void adam_step(std::vector<ad::Tensor>& params, AdamState& state, double lr, double weight_decay,
               const AdamConfig& cfg) {
  if (state.m.size() != params.size()) state.init(params);
  ++state.step;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (state.m[k].size() != p.size()) {
      throw Error(ErrorKind::ShapeMismatch, "optimizer state does not match parameter " +
                                                std::to_string(k));
    }
    adam_update(p.value(), p.grad(), state.m[k], state.v[k], state.step, lr, weight_decay, cfg);
  }
}

}  // namespace amlgnn
