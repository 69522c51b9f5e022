#include <algorithm>

#include "amlgnn/error.hpp"
#include "amlgnn/graph.hpp"
#include "amlgnn/tensor.hpp"

namespace amlgnn::ad {

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
  auto d = std::make_shared<TensorData>();
  d->shape = {rows, cols};
  d->value.assign(rows * cols, 0.0);
  return Tensor(std::move(d));
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw Error(ErrorKind::ShapeMismatch, "value buffer of length " + std::to_string(values.size()) +
                                              " for shape " + std::to_string(rows) + "x" +
                                              std::to_string(cols));
  }
  auto d = std::make_shared<TensorData>();
  d->shape = {rows, cols};
  d->value = std::move(values);
  return Tensor(std::move(d));
}

Tensor Tensor::parameter(std::size_t rows, std::size_t cols, std::vector<double> values) {
  Tensor t = from(rows, cols, std::move(values));
  t.data_->requires_grad = true;
  t.data_->ensure_grad();
  return t;
}

Tensor Tensor::clone() const {
  auto d = std::make_shared<TensorData>(*data_);
  return Tensor(std::move(d));
}

SparseAdj::SparseAdj(std::size_t num_nodes, std::vector<std::int64_t> offsets,
                     std::vector<std::int32_t> indices) {
  if (offsets.size() != num_nodes + 1 ||
      static_cast<std::size_t>(offsets.back()) != indices.size()) {
    throw Error(ErrorKind::ShapeMismatch, "CSR offsets do not match the index array");
  }
  auto s = std::make_shared<Structure>();
  s->num_nodes = num_nodes;
  s->rows.resize(indices.size());
  for (std::size_t i = 0; i < num_nodes; ++i) {
    std::fill(s->rows.begin() + offsets[i], s->rows.begin() + offsets[i + 1],
              static_cast<std::int32_t>(i));
  }
  s->offsets = std::move(offsets);
  s->indices = std::move(indices);
  coeffs_ = std::make_shared<const std::vector<double>>(s->indices.size(), 1.0);
  structure_ = std::move(s);
}

SparseAdj SparseAdj::from_graph(const TransactionGraph& graph, bool self_loops) {
  if (!self_loops) {
    return SparseAdj(graph.num_nodes, graph.csr_offsets, graph.csr_neighbors);
  }
  std::vector<std::int64_t> offsets(graph.num_nodes + 1, 0);
  std::vector<std::int32_t> indices;
  indices.reserve(graph.csr_neighbors.size() + graph.num_nodes);
  for (std::size_t i = 0; i < graph.num_nodes; ++i) {
    const auto self = static_cast<std::int32_t>(i);
    bool placed = false;
    for (auto j : graph.neighbors(i)) {
      if (!placed && j > self) {
        indices.push_back(self);
        placed = true;
      }
      indices.push_back(j);
    }
    if (!placed) indices.push_back(self);
    offsets[i + 1] = static_cast<std::int64_t>(indices.size());
  }
  return SparseAdj(graph.num_nodes, std::move(offsets), std::move(indices));
}

SparseAdj SparseAdj::with_coefficients(std::vector<double> coeffs) const {
  if (coeffs.size() != num_edges()) {
    throw Error(ErrorKind::ShapeMismatch, "coefficient array length must equal the slot count");
  }
  SparseAdj copy = *this;
  copy.coeffs_ = std::make_shared<const std::vector<double>>(std::move(coeffs));
  return copy;
}

}  // namespace amlgnn::ad
