#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "amlgnn/error.hpp"
#include "amlgnn/kernels.hpp"
#include "amlgnn/tensor.hpp"

namespace amlgnn::ad {

namespace {

std::string dims(const Shape& s) { return std::to_string(s.rows) + "x" + std::to_string(s.cols); }

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": " + detail);
}

void same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), op, dims(a.shape()) + " vs " + dims(b.shape()));
}

// Gradient buffer of a tracked input, or nullptr when it needs none.
double* grad_of(TensorData* t) {
  if (!t->requires_grad) return nullptr;
  t->ensure_grad();
  return t->grad.data();
}

}  // namespace

Tensor Tape::record(Tensor out, std::vector<Tensor> inputs, std::function<void()> rule) {
  bool tracked = false;
  for (const auto& in : inputs) tracked = tracked || in.requires_grad();
  if (!tracked) return out;
  out.raw()->requires_grad = true;
  Op op;
  op.inputs.reserve(inputs.size());
  for (auto& in : inputs) op.inputs.push_back(in.handle());
  op.output = out.handle();
  op.backward = std::move(rule);
  ops_.push_back(std::move(op));
  return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul", dims(a.shape()) + " * " + dims(b.shape()));
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::zeros(n, m);
  kernels::active().gemm_nn(n, k, m, a.value().data(), b.value().data(), out.value().data());
  auto *pa = a.raw(), *pb = b.raw(), *po = out.raw();
  return record(out, {a, b}, [=] {
    const auto& kt = kernels::active();
    if (double* ga = grad_of(pa)) kt.gemm_nt(n, k, m, po->grad.data(), pb->value.data(), ga);
    if (double* gb = grad_of(pb)) kt.gemm_tn(n, k, m, pa->value.data(), po->grad.data(), gb);
  });
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  auto o = out.value();
  auto av = a.value(), bv = b.value();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] + bv[i];
  auto *pa = a.raw(), *pb = b.raw(), *po = out.raw();
  return record(out, {a, b}, [=] {
    const auto& g = po->grad;
    if (double* ga = grad_of(pa)) for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (double* gb = grad_of(pb)) for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  auto o = out.value();
  auto av = a.value(), bv = b.value();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] - bv[i];
  auto *pa = a.raw(), *pb = b.raw(), *po = out.raw();
  return record(out, {a, b}, [=] {
    const auto& g = po->grad;
    if (double* ga = grad_of(pa)) for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (double* gb = grad_of(pb)) for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  auto o = out.value();
  auto av = a.value(), bv = b.value();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  auto *pa = a.raw(), *pb = b.raw(), *po = out.raw();
  return record(out, {a, b}, [=] {
    const auto& g = po->grad;
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb->value[i];
    }
    if (double* gb = grad_of(pb)) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa->value[i];
    }
  });
}

Tensor Tape::scale(const Tensor& a, double s) {
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  auto o = out.value();
  auto av = a.value();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = s * av[i];
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) kernels::active().axpy(po->grad.size(), s, po->grad.data(), ga);
  });
}

Tensor Tape::add_scalar(const Tensor& a, double s) {
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  auto o = out.value();
  auto av = a.value();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] + s;
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < po->grad.size(); ++i) ga[i] += po->grad[i];
    }
  });
}

Tensor Tape::add_bias(const Tensor& a, const Tensor& bias) {
  require(bias.rows() == 1 && bias.cols() == a.cols(), "add_bias",
          dims(a.shape()) + " + " + dims(bias.shape()));
  const std::size_t n = a.rows(), d = a.cols();
  Tensor out = Tensor::zeros(n, d);
  auto o = out.value();
  auto av = a.value(), bv = bias.value();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) o[i * d + k] = av[i * d + k] + bv[k];
  }
  auto *pa = a.raw(), *pb = bias.raw(), *po = out.raw();
  return record(out, {a, bias}, [=] {
    const auto& g = po->grad;
    if (double* ga = grad_of(pa)) for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (double* gb = grad_of(pb)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) gb[k] += g[i * d + k];
      }
    }
  });
}

Tensor Tape::relu(const Tensor& a) { return leaky_relu(a, 0.0); }

Tensor Tape::leaky_relu(const Tensor& a, double slope) {
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  auto o = out.value();
  auto av = a.value();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] > 0.0 ? av[i] : slope * av[i];
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) {
      const auto& g = po->grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += pa->value[i] > 0.0 ? g[i] : slope * g[i];
    }
  });
}

Tensor Tape::sqrt(const Tensor& a) {
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  auto o = out.value();
  auto av = a.value();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::sqrt(av[i]);
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < po->grad.size(); ++i) {
        ga[i] += po->grad[i] * 0.5 / po->value[i];
      }
    }
  });
}

Tensor Tape::div(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "div");
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  auto o = out.value();
  auto av = a.value(), bv = b.value();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] / bv[i];
  auto *pa = a.raw(), *pb = b.raw(), *po = out.raw();
  return record(out, {a, b}, [=] {
    const auto& g = po->grad;
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / pb->value[i];
    }
    if (double* gb = grad_of(pb)) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * po->value[i] / pb->value[i];
    }
  });
}

Tensor Tape::concat_rows(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  const std::size_t d = parts.front().cols();
  std::size_t n = 0;
  for (const auto& p : parts) {
    require(p.cols() == d, "concat_rows", "column counts differ");
    n += p.rows();
  }
  Tensor out = Tensor::zeros(n, d);
  std::size_t offset = 0;
  std::vector<TensorData*> raw;
  for (const auto& p : parts) {
    std::copy(p.value().begin(), p.value().end(), out.value().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += p.size();
    raw.push_back(p.raw());
  }
  auto* po = out.raw();
  return record(out, parts, [=] {
    std::size_t off = 0;
    for (auto* p : raw) {
      if (double* gp = grad_of(p)) {
        for (std::size_t i = 0; i < p->value.size(); ++i) gp[i] += po->grad[off + i];
      }
      off += p->value.size();
    }
  });
}

Tensor Tape::concat_cols(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const std::size_t n = parts.front().rows();
  std::size_t d = 0;
  for (const auto& p : parts) {
    require(p.rows() == n, "concat_cols", "row counts differ");
    d += p.cols();
  }
  Tensor out = Tensor::zeros(n, d);
  std::size_t col = 0;
  std::vector<TensorData*> raw;
  for (const auto& p : parts) {
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(p.value().begin() + static_cast<std::ptrdiff_t>(i * w), w,
                  out.value().begin() + static_cast<std::ptrdiff_t>(i * d + col));
    }
    col += w;
    raw.push_back(p.raw());
  }
  auto* po = out.raw();
  return record(out, parts, [=] {
    std::size_t c0 = 0;
    for (auto* p : raw) {
      const std::size_t w = p->shape.cols;
      if (double* gp = grad_of(p)) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t k = 0; k < w; ++k) gp[i * w + k] += po->grad[i * d + c0 + k];
        }
      }
      c0 += w;
    }
  });
}

Tensor Tape::row_select(const Tensor& a, std::span<const std::int32_t> rows) {
  const std::size_t d = a.cols();
  for (auto r : rows) {
    require(r >= 0 && static_cast<std::size_t>(r) < a.rows(), "row_select", "row index out of range");
  }
  std::vector<std::int32_t> idx(rows.begin(), rows.end());
  Tensor out = Tensor::zeros(idx.size(), d);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(a.value().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(idx[i]) * d), d,
                out.value().begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto r = static_cast<std::size_t>(idx[i]);
        for (std::size_t k = 0; k < d; ++k) ga[r * d + k] += po->grad[i * d + k];
      }
    }
  });
}

Tensor Tape::row_select(const Tensor& a, const std::vector<bool>& mask) {
  require(mask.size() == a.rows(), "row_select", "mask length differs from row count");
  std::vector<std::int32_t> rows;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) rows.push_back(static_cast<std::int32_t>(i));
  }
  return row_select(a, rows);
}

Tensor Tape::col_mean(const Tensor& a) {
  const std::size_t n = a.rows(), d = a.cols();
  require(n > 0, "col_mean", "empty input");
  Tensor out = Tensor::zeros(1, d);
  auto o = out.value();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) o[k] += a.value()[i * d + k];
  }
  for (auto& v : o) v /= static_cast<double>(n);
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) ga[i * d + k] += po->grad[k] / static_cast<double>(n);
      }
    }
  });
}

Tensor Tape::col_var(const Tensor& a) {
  const std::size_t n = a.rows(), d = a.cols();
  require(n > 0, "col_var", "empty input");
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += a.value()[i * d + k];
  }
  for (auto& v : mean) v /= static_cast<double>(n);
  Tensor out = Tensor::zeros(1, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = a.value()[i * d + k] - mean[k];
      out.value()[k] += c * c;
    }
  }
  for (auto& v : out.value()) v /= static_cast<double>(n);
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
          ga[i * d + k] += po->grad[k] * 2.0 * (pa->value[i * d + k] - mean[k]) / static_cast<double>(n);
        }
      }
    }
  });
}

Tensor Tape::log_softmax(const Tensor& a) {
  const std::size_t n = a.rows(), d = a.cols();
  Tensor out = Tensor::zeros(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = a.value().data() + i * d;
    double* y = out.value().data() + i * d;
    const double mx = *std::max_element(x, x + d);
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += std::exp(x[k] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t k = 0; k < d; ++k) y[k] = x[k] - lse;
  }
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < n; ++i) {
        const double* g = po->grad.data() + i * d;
        const double* y = po->value.data() + i * d;
        double gs = 0.0;
        for (std::size_t k = 0; k < d; ++k) gs += g[k];
        for (std::size_t k = 0; k < d; ++k) ga[i * d + k] += g[k] - std::exp(y[k]) * gs;
      }
    }
  });
}

Tensor Tape::dropout(const Tensor& a, double p, const Rng& rng, bool training) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorKind::InvalidProbability, "dropout probability must lie in [0, 1)");
  }
  if (!training || p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> factor(a.size());
  for (std::size_t i = 0; i < factor.size(); ++i) {
    const double u = static_cast<double>(rng.at(i) >> 11) * 0x1.0p-53;
    factor[i] = u >= p ? keep_scale : 0.0;
  }
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < factor.size(); ++i) out.value()[i] = a.value()[i] * factor[i];
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=, factor = std::move(factor)] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < factor.size(); ++i) ga[i] += po->grad[i] * factor[i];
    }
  });
}

Tensor Tape::sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.value()) s += v;
  Tensor out = Tensor::scalar(s);
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=] {
    if (double* ga = grad_of(pa)) {
      const double g = po->grad[0];
      for (std::size_t i = 0; i < pa->value.size(); ++i) ga[i] += g;
    }
  });
}

Tensor Tape::pick(const Tensor& a, std::span<const std::int32_t> rows,
                  std::span<const std::int32_t> cols) {
  require(rows.size() == cols.size(), "pick", "row/col index lengths differ");
  const std::size_t d = a.cols();
  std::vector<std::size_t> flat(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && static_cast<std::size_t>(rows[i]) < a.rows() && cols[i] >= 0 &&
                static_cast<std::size_t>(cols[i]) < d,
            "pick", "index out of range");
    flat[i] = static_cast<std::size_t>(rows[i]) * d + static_cast<std::size_t>(cols[i]);
  }
  Tensor out = Tensor::zeros(flat.size(), 1);
  for (std::size_t i = 0; i < flat.size(); ++i) out.value()[i] = a.value()[flat[i]];
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=, flat = std::move(flat)] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < flat.size(); ++i) ga[flat[i]] += po->grad[i];
    }
  });
}

Tensor Tape::weighted_sum(const Tensor& a, std::span<const double> weights) {
  require(weights.size() == a.size(), "weighted_sum", "weight count differs from input size");
  std::vector<double> w(weights.begin(), weights.end());
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a.value()[i];
  Tensor out = Tensor::scalar(s);
  auto *pa = a.raw(), *po = out.raw();
  return record(out, {a}, [=, w = std::move(w)] {
    if (double* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < w.size(); ++i) ga[i] += w[i] * po->grad[0];
    }
  });
}

Tensor Tape::spmm(const SparseAdj& adj, const Tensor& h) {
  require(h.rows() == adj.num_nodes(), "spmm",
          "adjacency over " + std::to_string(adj.num_nodes()) + " nodes, features " + dims(h.shape()));
  require(adj.coefficients().size() == adj.num_edges(), "spmm", "coefficient array missing");
  const std::size_t n = adj.num_nodes(), d = h.cols();
  Tensor out = Tensor::zeros(n, d);
  const auto& kt = kernels::active();
  auto off = adj.offsets();
  auto idx = adj.indices();
  auto c = adj.coefficients();
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.value().data() + i * d;
    for (auto e = off[i]; e < off[i + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      kt.axpy(d, c[ue], h.value().data() + static_cast<std::size_t>(idx[ue]) * d, oi);
    }
  }
  auto *ph = h.raw(), *po = out.raw();
  return record(out, {h}, [=, keep = adj] {
    if (double* gh = grad_of(ph)) {
      const auto& k2 = kernels::active();
      for (std::size_t i = 0; i < n; ++i) {
        const double* gi = po->grad.data() + i * d;
        for (auto e = off[i]; e < off[i + 1]; ++e) {
          const auto ue = static_cast<std::size_t>(e);
          k2.axpy(d, c[ue], gi, gh + static_cast<std::size_t>(idx[ue]) * d);
        }
      }
    }
  });
}

Tensor Tape::spmm(const SparseAdj& adj, const Tensor& coeffs, const Tensor& h) {
  require(h.rows() == adj.num_nodes(), "spmm", "feature rows differ from node count");
  require(coeffs.rows() == adj.num_edges() && coeffs.cols() == 1, "spmm",
          "coefficients must be E x 1, got " + dims(coeffs.shape()));
  const std::size_t n = adj.num_nodes(), d = h.cols();
  Tensor out = Tensor::zeros(n, d);
  const auto& kt = kernels::active();
  auto off = adj.offsets();
  auto idx = adj.indices();
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.value().data() + i * d;
    for (auto e = off[i]; e < off[i + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      kt.axpy(d, coeffs.value()[ue], h.value().data() + static_cast<std::size_t>(idx[ue]) * d, oi);
    }
  }
  auto *pc = coeffs.raw(), *ph = h.raw(), *po = out.raw();
  return record(out, {coeffs, h}, [=, keep = adj] {
    const auto& k2 = kernels::active();
    double* gh = grad_of(ph);
    double* gc = grad_of(pc);
    for (std::size_t i = 0; i < n; ++i) {
      const double* gi = po->grad.data() + i * d;
      for (auto e = off[i]; e < off[i + 1]; ++e) {
        const auto ue = static_cast<std::size_t>(e);
        const auto j = static_cast<std::size_t>(idx[ue]);
        if (gh) k2.axpy(d, pc->value[ue], gi, gh + j * d);
        if (gc) gc[ue] += k2.dot(d, gi, ph->value.data() + j * d);
      }
    }
  });
}

Tensor Tape::segment_softmax(const Tensor& logits, const SparseAdj& adj) {
  require(logits.rows() == adj.num_edges() && logits.cols() == 1, "segment_softmax",
          "logits must be E x 1, got " + dims(logits.shape()));
  auto off = adj.offsets();
  const std::size_t n = adj.num_nodes();
  Tensor out = Tensor::zeros(logits.rows(), 1);
  auto x = logits.value();
  auto y = out.value();
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = static_cast<std::size_t>(off[i]), e = static_cast<std::size_t>(off[i + 1]);
    if (b == e) continue;
    const double mx = *std::max_element(x.begin() + static_cast<std::ptrdiff_t>(b),
                                        x.begin() + static_cast<std::ptrdiff_t>(e));
    double s = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      y[k] = std::exp(x[k] - mx);
      s += y[k];
    }
    for (std::size_t k = b; k < e; ++k) y[k] /= s;
  }
  auto *px = logits.raw(), *po = out.raw();
  return record(out, {logits}, [=, keep = adj] {
    if (double* gx = grad_of(px)) {
      const auto& g = po->grad;
      const auto& yv = po->value;
      for (std::size_t i = 0; i < n; ++i) {
        const auto b = static_cast<std::size_t>(off[i]), e = static_cast<std::size_t>(off[i + 1]);
        double dotgy = 0.0;
        for (std::size_t k = b; k < e; ++k) dotgy += g[k] * yv[k];
        for (std::size_t k = b; k < e; ++k) gx[k] += yv[k] * (g[k] - dotgy);
      }
    }
  });
}

Tensor Tape::gather_edges(const Tensor& node_values, const SparseAdj& adj, Endpoint endpoint) {
  require(node_values.rows() == adj.num_nodes() && node_values.cols() == 1, "gather_edges",
          "node values must be N x 1, got " + dims(node_values.shape()));
  auto src = endpoint == Endpoint::Row ? adj.edge_rows() : adj.indices();
  Tensor out = Tensor::zeros(adj.num_edges(), 1);
  for (std::size_t e = 0; e < src.size(); ++e) {
    out.value()[e] = node_values.value()[static_cast<std::size_t>(src[e])];
  }
  auto *pv = node_values.raw(), *po = out.raw();
  return record(out, {node_values}, [=, keep = adj] {
    if (double* gv = grad_of(pv)) {
      for (std::size_t e = 0; e < src.size(); ++e) gv[static_cast<std::size_t>(src[e])] += po->grad[e];
    }
  });
}

Tensor Tape::segment_max(const SparseAdj& adj, const Tensor& h) {
  require(h.rows() == adj.num_nodes(), "segment_max", "feature rows differ from node count");
  const std::size_t n = adj.num_nodes(), d = h.cols();
  auto off = adj.offsets();
  auto idx = adj.indices();
  Tensor out = Tensor::zeros(n, d);
  std::vector<std::int32_t> arg(n * d, -1);
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < n; ++i) {
    if (off[i] == off[i + 1]) continue;
    double* oi = out.value().data() + i * d;
    std::int32_t* ai = arg.data() + i * d;
    const auto first = idx[static_cast<std::size_t>(off[i])];
    std::copy_n(h.value().data() + static_cast<std::size_t>(first) * d, d, oi);
    std::fill_n(ai, d, first);
    for (auto e = off[i] + 1; e < off[i + 1]; ++e) {
      const auto j = idx[static_cast<std::size_t>(e)];
      kt.max_merge(d, h.value().data() + static_cast<std::size_t>(j) * d, oi, ai, j);
    }
  }
  auto *ph = h.raw(), *po = out.raw();
  return record(out, {h}, [=, keep = adj, arg = std::move(arg)] {
    if (double* gh = grad_of(ph)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
          const auto j = arg[i * d + k];
          if (j >= 0) gh[static_cast<std::size_t>(j) * d + k] += po->grad[i * d + k];
        }
      }
    }
  });
}

Tensor Tape::graph_norm(const Tensor& h, const Tensor& alpha, const Tensor& gamma,
                        const Tensor& beta, double eps) {
  const std::size_t n = h.rows(), d = h.cols();
  require(n > 0, "graph_norm", "empty input");
  for (const Tensor* p : {&alpha, &gamma, &beta}) {
    require(p->rows() == 1 && p->cols() == d, "graph_norm",
            "parameters must be 1 x " + std::to_string(d) + ", got " + dims(p->shape()));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> mean(d, 0.0), sigma(d, 0.0);
  auto x = h.value();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += x[i * d + k];
  }
  for (auto& m : mean) m *= inv_n;
  // `centered` is kept for the backward pass.
  std::vector<double> centered(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = x[i * d + k] - alpha.value()[k] * mean[k];
      centered[i * d + k] = c;
      sigma[k] += c * c;
    }
  }
  for (auto& s : sigma) s = std::sqrt(s * inv_n + eps);
  Tensor out = Tensor::zeros(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      out.value()[i * d + k] =
          gamma.value()[k] * centered[i * d + k] / sigma[k] + beta.value()[k];
    }
  }
  auto *ph = h.raw(), *pa = alpha.raw(), *pg = gamma.raw(), *pb = beta.raw(), *po = out.raw();
  return record(out, {h, alpha, gamma, beta},
                [=, mean = std::move(mean), sigma = std::move(sigma),
                 centered = std::move(centered)] {
    const auto& g = po->grad;
    double* gh = grad_of(ph);
    double* ga = grad_of(pa);
    double* gg = grad_of(pg);
    double* gb = grad_of(pb);
    for (std::size_t k = 0; k < d; ++k) {
      double sum_g = 0.0, sum_gc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum_g += g[i * d + k];
        sum_gc += g[i * d + k] * centered[i * d + k];
      }
      const double gam = pg->value[k], sig = sigma[k];
      if (gb) gb[k] += sum_g;
      if (gg) gg[k] += sum_gc / sig;
      if (!gh && !ga) continue;
      // dL/dvar through sigma = sqrt(var + eps).
      const double dvar = -0.5 * gam * sum_gc / (sig * sig * sig);
      double sum_gcen = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum_gcen += gam * g[i * d + k] / sig + 2.0 * inv_n * centered[i * d + k] * dvar;
      }
      const double a = pa->value[k];
      if (ga) ga[k] -= mean[k] * sum_gcen;
      if (gh) {
        const double shift = a * inv_n * sum_gcen;
        for (std::size_t i = 0; i < n; ++i) {
          const double gc = gam * g[i * d + k] / sig + 2.0 * inv_n * centered[i * d + k] * dvar;
          gh[i * d + k] += gc - shift;
        }
      }
    }
  });
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw Error(ErrorKind::NotScalar, "backward needs a 1x1 loss, got " + dims(loss.shape()));
  }
  auto it = std::find_if(ops_.rbegin(), ops_.rend(),
                         [&](const Op& op) { return op.output.get() == loss.raw(); });
  if (it == ops_.rend()) {
    throw Error(ErrorKind::NotScalar, "loss was not produced on this tape");
  }
  // Intermediate gradients restart from zero so only leaves accumulate.
  for (auto& op : ops_) op.output->grad.assign(op.output->value.size(), 0.0);
  loss.raw()->grad[0] = 1.0;
  for (auto op = it; op != ops_.rend(); ++op) op->backward();
}

}  // namespace amlgnn::ad
