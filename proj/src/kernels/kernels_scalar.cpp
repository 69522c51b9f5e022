#include "amlgnn/kernels.hpp"

namespace amlgnn::kernels {

namespace {

void axpy(std::size_t len, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

double dot(std::size_t len, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += x[i] * y[i];
  return s;
}

void gemm_nn(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip != 0.0) axpy(m, aip, b + p * m, ci);
    }
  }
}

void gemm_tn(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
             double* c) {
  for (std::size_t r = 0; r < n; ++r) {
    const double* br = b + r * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double arp = a[r * k + p];
      if (arp != 0.0) axpy(m, arp, br, c + p * m);
    }
  }
}

void gemm_nt(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) c[i * k + p] += dot(m, a + i * m, b + p * m);
  }
}

void max_merge(std::size_t len, const double* x, double* y, std::int32_t* arg, std::int32_t src) {
  for (std::size_t i = 0; i < len; ++i) {
    if (x[i] > y[i]) {
      y[i] = x[i];
      arg[i] = src;
    }
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", gemm_nn, gemm_tn, gemm_nt, axpy, dot, max_merge};
  return table;
}

}  // namespace amlgnn::kernels
