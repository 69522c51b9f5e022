#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Dense double-precision inner loops. Each backend provides the same table;
// the active one is picked once at startup from CPU features and can be
// overridden with AMLGNN_KERNELS=scalar|avx2.
namespace amlgnn::kernels {

struct KernelTable {
  std::string_view name;
  // C[n x m] += A[n x k] * B[k x m]
  void (*gemm_nn)(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
                  double* c);
  // C[k x m] += A[n x k]^T * B[n x m]
  void (*gemm_tn)(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
                  double* c);
  // C[n x k] += A[n x m] * B[k x m]^T
  void (*gemm_nt)(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
                  double* c);
  // y += alpha * x
  void (*axpy)(std::size_t len, double alpha, const double* x, double* y);
  double (*dot)(std::size_t len, const double* x, const double* y);
  // y = max(y, x) elementwise, recording in arg the source index when x wins.
  void (*max_merge)(std::size_t len, const double* x, double* y, std::int32_t* arg,
                    std::int32_t src);
};

const KernelTable& scalar_table();
// nullptr when the binary or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

const KernelTable& active();
// Selects a backend by name ("scalar", "avx2"); false if unavailable.
bool select(std::string_view name);

}  // namespace amlgnn::kernels
