// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "amlgnn/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace amlgnn::kernels {

namespace {

void axpy(std::size_t len, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= len; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < len; ++i) y[i] += alpha * x[i];
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(std::size_t len, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= len; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) s += x[i] * y[i];
  return s;
}

// 4 x 8 register block of C += A * B.
void gemm_nn(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
             double* c) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double* a0 = a + (i + 0) * k;
    const double* a1 = a + (i + 1) * k;
    const double* a2 = a + (i + 2) * k;
    const double* a3 = a + (i + 3) * k;
    double* c0 = c + (i + 0) * m;
    double* c1 = c + (i + 1) * m;
    double* c2 = c + (i + 2) * m;
    double* c3 = c + (i + 3) * m;
    std::size_t j = 0;
    for (; j + 8 <= m; j += 8) {
      __m256d r00 = _mm256_loadu_pd(c0 + j), r01 = _mm256_loadu_pd(c0 + j + 4);
      __m256d r10 = _mm256_loadu_pd(c1 + j), r11 = _mm256_loadu_pd(c1 + j + 4);
      __m256d r20 = _mm256_loadu_pd(c2 + j), r21 = _mm256_loadu_pd(c2 + j + 4);
      __m256d r30 = _mm256_loadu_pd(c3 + j), r31 = _mm256_loadu_pd(c3 + j + 4);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * m + j);
        const __m256d b1 = _mm256_loadu_pd(b + p * m + j + 4);
        __m256d s = _mm256_broadcast_sd(a0 + p);
        r00 = _mm256_fmadd_pd(s, b0, r00);
        r01 = _mm256_fmadd_pd(s, b1, r01);
        s = _mm256_broadcast_sd(a1 + p);
        r10 = _mm256_fmadd_pd(s, b0, r10);
        r11 = _mm256_fmadd_pd(s, b1, r11);
        s = _mm256_broadcast_sd(a2 + p);
        r20 = _mm256_fmadd_pd(s, b0, r20);
        r21 = _mm256_fmadd_pd(s, b1, r21);
        s = _mm256_broadcast_sd(a3 + p);
        r30 = _mm256_fmadd_pd(s, b0, r30);
        r31 = _mm256_fmadd_pd(s, b1, r31);
      }
      _mm256_storeu_pd(c0 + j, r00), _mm256_storeu_pd(c0 + j + 4, r01);
      _mm256_storeu_pd(c1 + j, r10), _mm256_storeu_pd(c1 + j + 4, r11);
      _mm256_storeu_pd(c2 + j, r20), _mm256_storeu_pd(c2 + j + 4, r21);
      _mm256_storeu_pd(c3 + j, r30), _mm256_storeu_pd(c3 + j + 4, r31);
    }
    for (; j < m; ++j) {
      double s0 = c0[j], s1 = c1[j], s2 = c2[j], s3 = c3[j];
      for (std::size_t p = 0; p < k; ++p) {
        const double bp = b[p * m + j];
        s0 += a0[p] * bp;
        s1 += a1[p] * bp;
        s2 += a2[p] * bp;
        s3 += a3[p] * bp;
      }
      c0[j] = s0, c1[j] = s1, c2[j] = s2, c3[j] = s3;
    }
  }
  for (; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) axpy(m, a[i * k + p], b + p * m, c + i * m);
  }
}

void gemm_tn(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
             double* c) {
  std::size_t r = 0;
  for (; r + 4 <= n; r += 4) {
    const double* b0 = b + (r + 0) * m;
    const double* b1 = b + (r + 1) * m;
    const double* b2 = b + (r + 2) * m;
    const double* b3 = b + (r + 3) * m;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d s0 = _mm256_set1_pd(a[(r + 0) * k + p]);
      const __m256d s1 = _mm256_set1_pd(a[(r + 1) * k + p]);
      const __m256d s2 = _mm256_set1_pd(a[(r + 2) * k + p]);
      const __m256d s3 = _mm256_set1_pd(a[(r + 3) * k + p]);
      double* cp = c + p * m;
      std::size_t j = 0;
      for (; j + 4 <= m; j += 4) {
        __m256d acc = _mm256_loadu_pd(cp + j);
        acc = _mm256_fmadd_pd(s0, _mm256_loadu_pd(b0 + j), acc);
        acc = _mm256_fmadd_pd(s1, _mm256_loadu_pd(b1 + j), acc);
        acc = _mm256_fmadd_pd(s2, _mm256_loadu_pd(b2 + j), acc);
        acc = _mm256_fmadd_pd(s3, _mm256_loadu_pd(b3 + j), acc);
        _mm256_storeu_pd(cp + j, acc);
      }
      for (; j < m; ++j) {
        cp[j] += a[(r + 0) * k + p] * b0[j] + a[(r + 1) * k + p] * b1[j] +
                 a[(r + 2) * k + p] * b2[j] + a[(r + 3) * k + p] * b3[j];
      }
    }
  }
  for (; r < n; ++r) {
    for (std::size_t p = 0; p < k; ++p) axpy(m, a[r * k + p], b + r * m, c + p * m);
  }
}

void gemm_nt(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) c[i * k + p] += dot(m, a + i * m, b + p * m);
  }
}

void max_merge(std::size_t len, const double* x, double* y, std::int32_t* arg, std::int32_t src) {
  // Ties keep the earlier source, as in the scalar kernel.
  for (std::size_t i = 0; i < len; ++i) {
    if (x[i] > y[i]) {
      y[i] = x[i];
      arg[i] = src;
    }
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2", gemm_nn, gemm_tn, gemm_nt, axpy, dot, max_merge};
  __builtin_cpu_init();
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
  return &table;
}

}  // namespace amlgnn::kernels

#else

namespace amlgnn::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace amlgnn::kernels

#endif
