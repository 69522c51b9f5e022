#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "amlgnn/rng.hpp"

namespace amlgnn {
struct TransactionGraph;
}

// Dense double-precision tensors with define-by-run reverse-mode autodiff.
namespace amlgnn::ad {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

struct TensorData {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first needed; then value.size()
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Shared handle: copies alias the same buffers. 1-D data is stored as 1 x d
// (per-feature vectors) or E x 1 (per-edge vectors).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor scalar(double v) { return from(1, 1, {v}); }
  // Trainable leaf; always carries a gradient buffer.
  static Tensor parameter(std::size_t rows, std::size_t cols, std::vector<double> values);

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const { return data_->shape; }
  std::size_t rows() const { return data_->shape.rows; }
  std::size_t cols() const { return data_->shape.cols; }
  std::size_t size() const { return data_->value.size(); }
  bool requires_grad() const { return data_->requires_grad; }

  std::span<double> value() { return data_->value; }
  std::span<const double> value() const { return data_->value; }
  std::span<double> grad() {
    data_->ensure_grad();
    return data_->grad;
  }
  std::span<const double> grad() const { return data_->grad; }
  bool has_grad() const { return data_->grad.size() == data_->value.size(); }
  void zero_grad() {
    if (data_->requires_grad) data_->grad.assign(data_->value.size(), 0.0);
  }

  double item() const { return data_->value.at(0); }
  double at(std::size_t r, std::size_t c) const { return data_->value[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return data_->value[r * cols() + c]; }

  // Deep copy of the value buffer with gradient tracking of the source.
  Tensor clone() const;

  TensorData* raw() const { return data_.get(); }
  const std::shared_ptr<TensorData>& handle() const { return data_; }

 private:
  explicit Tensor(std::shared_ptr<TensorData> d) : data_(std::move(d)) {}
  std::shared_ptr<TensorData> data_;
};

// CSR adjacency plus per-slot coefficients (1.0 = unweighted aggregation).
// Index structure and coefficients are shared between copies.
class SparseAdj {
 public:
  SparseAdj() = default;
  SparseAdj(std::size_t num_nodes, std::vector<std::int64_t> offsets,
            std::vector<std::int32_t> indices);

  // Adjacency of `graph`; with `self_loops` every node also gets slot (i, i)
  // in sorted position.
  static SparseAdj from_graph(const TransactionGraph& graph, bool self_loops);

  SparseAdj with_coefficients(std::vector<double> coeffs) const;

  std::size_t num_nodes() const { return structure_->num_nodes; }
  std::size_t num_edges() const { return structure_->indices.size(); }
  std::span<const std::int64_t> offsets() const { return structure_->offsets; }
  std::span<const std::int32_t> indices() const { return structure_->indices; }
  // Owning row (destination node) of each slot.
  std::span<const std::int32_t> edge_rows() const { return structure_->rows; }
  std::span<const double> coefficients() const {
    return coeffs_ ? std::span<const double>(*coeffs_) : std::span<const double>();
  }
  std::size_t segment_size(std::size_t i) const {
    return static_cast<std::size_t>(structure_->offsets[i + 1] - structure_->offsets[i]);
  }

 private:
  struct Structure {
    std::size_t num_nodes = 0;
    std::vector<std::int64_t> offsets;
    std::vector<std::int32_t> indices;
    std::vector<std::int32_t> rows;
  };
  std::shared_ptr<const Structure> structure_;
  std::shared_ptr<const std::vector<double>> coeffs_;
};

enum class Endpoint { Row, Col };

// Ordered record of differentiable operations. Rebuilt every forward pass.
class Tape {
 public:
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double s);
  Tensor add_scalar(const Tensor& a, double s);
  // a[n x d] + bias[1 x d] broadcast over rows.
  Tensor add_bias(const Tensor& a, const Tensor& bias);
  Tensor relu(const Tensor& a);
  Tensor leaky_relu(const Tensor& a, double slope = 0.2);
  Tensor sqrt(const Tensor& a);
  Tensor div(const Tensor& a, const Tensor& b);
  Tensor concat_rows(const std::vector<Tensor>& parts);
  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor row_select(const Tensor& a, std::span<const std::int32_t> rows);
  Tensor row_select(const Tensor& a, const std::vector<bool>& mask);
  Tensor col_mean(const Tensor& a);
  // Population variance per column.
  Tensor col_var(const Tensor& a);
  Tensor log_softmax(const Tensor& a);
  // Inverted dropout; element e is kept iff rng.at(e) maps to u >= p.
  Tensor dropout(const Tensor& a, double p, const Rng& rng, bool training);
  Tensor sum(const Tensor& a);
  // out[i] = a[rows[i], cols[i]], shape K x 1.
  Tensor pick(const Tensor& a, std::span<const std::int32_t> rows,
              std::span<const std::int32_t> cols);
  // sum_i w[i] * a[i] for a K x 1 input and constant weights.
  Tensor weighted_sum(const Tensor& a, std::span<const double> weights);

  // out[i] = sum_{e in row i} c_e * h[col(e)] with the adjacency's constant
  // coefficients, or with a differentiable E x 1 coefficient tensor.
  Tensor spmm(const SparseAdj& adj, const Tensor& h);
  Tensor spmm(const SparseAdj& adj, const Tensor& coeffs, const Tensor& h);
  // Softmax of E x 1 logits within each CSR row segment.
  Tensor segment_softmax(const Tensor& logits, const SparseAdj& adj);
  // Per-slot copy of a per-node N x 1 value taken at the slot's row or column.
  Tensor gather_edges(const Tensor& node_values, const SparseAdj& adj, Endpoint endpoint);
  // Elementwise max over each row's neighbors; zero for empty rows.
  Tensor segment_max(const SparseAdj& adj, const Tensor& h);
  // Whole-graph normalisation with learnable mean scale (alpha), scale (gamma)
  // and shift (beta), each 1 x d.
  Tensor graph_norm(const Tensor& h, const Tensor& alpha, const Tensor& gamma,
                    const Tensor& beta, double eps = 1e-5);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded rule once in reverse.
  // Parameter gradients accumulate across calls; callers zero them per step.
  void backward(const Tensor& loss);

  std::size_t num_ops() const { return ops_.size(); }
  void clear() { ops_.clear(); }

 private:
  struct Op {
    std::vector<std::shared_ptr<TensorData>> inputs;
    std::shared_ptr<TensorData> output;
    std::function<void()> backward;
  };

  Tensor record(Tensor out, std::vector<Tensor> inputs, std::function<void()> rule);

  std::vector<Op> ops_;
};

}  // namespace amlgnn::ad
