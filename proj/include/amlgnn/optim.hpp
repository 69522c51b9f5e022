#pragma once

#include <cstdint>
#include <vector>

#include "amlgnn/tensor.hpp"

namespace amlgnn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers, one per parameter, in parameter order.
struct AdamState {
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init(const std::vector<ad::Tensor>& params);
  bool operator==(const AdamState&) const = default;
};

// One Adam update with L2 folded into the gradient (grad + wd * param) before
// the moment update. `state.step` is incremented first; bias correction uses
// the new value.
void adam_step(std::vector<ad::Tensor>& params, AdamState& state, double lr, double weight_decay,
               const AdamConfig& cfg = {});

// Scalar form of the same recurrence on raw buffers.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::int64_t t, double lr, double weight_decay,
                 const AdamConfig& cfg = {});

}  // namespace amlgnn
