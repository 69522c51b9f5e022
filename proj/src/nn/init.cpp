#include <algorithm>
#include <cmath>

#include "amlgnn/error.hpp"
#include "amlgnn/model.hpp"

namespace amlgnn {

namespace {

std::vector<double> uniform_symmetric(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::vector<double> out(rows * cols);
  for (auto& v : out) v = bound * (2.0 * rng.uniform() - 1.0);
  return out;
}

void check_shape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorKind::BadShape, "initialiser needs a non-empty 2-D shape");
  }
}

void assign(ad::Tensor& t, const std::vector<double>& values) {
  std::copy(values.begin(), values.end(), t.value().begin());
}

void zero(ad::Tensor& t) { std::fill(t.value().begin(), t.value().end(), 0.0); }

void fill_xavier(ad::Tensor& t, Rng& rng) { assign(t, xavier_uniform(t.rows(), t.cols(), 1.0, rng)); }

void fill_fan_in(ad::Tensor& t, Rng& rng) { assign(t, fan_in_uniform(t.rows(), t.cols(), rng)); }

}  // namespace

std::vector<double> xavier_uniform(std::size_t rows, std::size_t cols, double gain, Rng& rng) {
  check_shape(rows, cols);
  if (gain < 0.0) throw Error(ErrorKind::BadShape, "gain must be non-negative");
  const double bound = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform_symmetric(rows, cols, bound, rng);
}

std::vector<double> kaiming_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  check_shape(rows, cols);
  return uniform_symmetric(rows, cols, std::sqrt(6.0 / static_cast<double>(rows)), rng);
}

std::vector<double> fan_in_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  check_shape(rows, cols);
  return uniform_symmetric(rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)), rng);
}

void reset_default(GcnParams& p, Rng& rng) {
  fill_xavier(p.weight, rng);
  zero(p.bias);
}

void reset_default(GatParams& p, Rng& rng) {
  for (auto& h : p.heads) {
    fill_xavier(h.weight, rng);
    fill_xavier(h.att_src, rng);
    fill_xavier(h.att_dst, rng);
  }
  zero(p.bias);
}

void reset_default(SageParams& p, Rng& rng) {
  fill_fan_in(p.w_self, rng);
  fill_fan_in(p.w_neigh, rng);
  zero(p.bias);
}

void reset_default(GraphNormParams& p) {
  std::fill(p.alpha.value().begin(), p.alpha.value().end(), 1.0);
  std::fill(p.gamma.value().begin(), p.gamma.value().end(), 1.0);
  std::fill(p.beta.value().begin(), p.beta.value().end(), 0.0);
}

void reset_default(LinearParams& p, Rng& rng) {
  fill_fan_in(p.weight, rng);
  zero(p.bias);
}

void reset_xavier(GcnParams& p, Rng& rng) { reset_default(p, rng); }

void reset_xavier(GatParams& p, Rng& rng) { reset_default(p, rng); }

void reset_xavier(SageParams& p, Rng& rng) {
  fill_xavier(p.w_self, rng);
  fill_xavier(p.w_neigh, rng);
  zero(p.bias);
}

void reset_xavier(LinearParams& p, Rng& rng) {
  fill_xavier(p.weight, rng);
  zero(p.bias);
}

}  // namespace amlgnn
