#include <doctest.h>

#include <cmath>
#include <vector>

#include "amlgnn/kernels.hpp"
#include "amlgnn/rng.hpp"

using namespace amlgnn;
namespace k = amlgnn::kernels;

namespace {

std::vector<double> rand_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar gemm matches a naive triple loop") {
  Rng rng(1);
  const std::size_t n = 5, kk = 3, m = 4;
  const auto a = rand_vec(n * kk, rng), b = rand_vec(kk * m, rng);
  std::vector<double> c(n * m, 0.5), ref(n * m, 0.5);
  k::scalar_table().gemm_nn(n, kk, m, a.data(), b.data(), c.data());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t p = 0; p < kk; ++p) ref[i * m + j] += a[i * kk + p] * b[p * m + j];
  CHECK(max_abs_diff(c, ref) < 1e-14);
}

TEST_CASE("avx2 kernels agree with scalar reference") {
  const auto* simd = k::avx2_table();
  if (!simd) {
    MESSAGE("AVX2 backend unavailable on this host; skipping");
    return;
  }
  const auto& ref = k::scalar_table();
  Rng rng(7);
  // Odd sizes exercise the tails of the blocked loops.
  for (std::size_t n : {1u, 3u, 4u, 9u, 17u}) {
    for (std::size_t kk : {1u, 2u, 5u, 13u}) {
      for (std::size_t m : {1u, 7u, 8u, 11u, 33u}) {
        const auto a = rand_vec(n * kk, rng), b = rand_vec(kk * m, rng);
        std::vector<double> c1(n * m, 0.25), c2 = c1;
        ref.gemm_nn(n, kk, m, a.data(), b.data(), c1.data());
        simd->gemm_nn(n, kk, m, a.data(), b.data(), c2.data());
        CHECK(max_abs_diff(c1, c2) < 1e-12);

        // tn: A is n x kk, B is n x m -> C kk x m
        const auto bt = rand_vec(n * m, rng);
        std::vector<double> t1(kk * m, -0.5), t2 = t1;
        ref.gemm_tn(n, kk, m, a.data(), bt.data(), t1.data());
        simd->gemm_tn(n, kk, m, a.data(), bt.data(), t2.data());
        CHECK(max_abs_diff(t1, t2) < 1e-12);

        // nt: A is n x m, B is kk x m -> C n x kk
        const auto an = rand_vec(n * m, rng), bn = rand_vec(kk * m, rng);
        std::vector<double> u1(n * kk, 1.0), u2 = u1;
        ref.gemm_nt(n, kk, m, an.data(), bn.data(), u1.data());
        simd->gemm_nt(n, kk, m, an.data(), bn.data(), u2.data());
        CHECK(max_abs_diff(u1, u2) < 1e-12);
      }
    }
  }
  for (std::size_t len : {0u, 1u, 3u, 4u, 15u, 64u, 101u}) {
    const auto x = rand_vec(len, rng);
    auto y1 = rand_vec(len, rng);
    auto y2 = y1;
    ref.axpy(len, 0.7, x.data(), y1.data());
    simd->axpy(len, 0.7, x.data(), y2.data());
    CHECK(max_abs_diff(y1, y2) < 1e-15);
    CHECK(std::abs(ref.dot(len, x.data(), y1.data()) - simd->dot(len, x.data(), y1.data())) < 1e-12);

    auto m1 = rand_vec(len, rng);
    auto m2 = m1;
    std::vector<std::int32_t> a1(len, -1), a2(len, -1);
    ref.max_merge(len, x.data(), m1.data(), a1.data(), 5);
    simd->max_merge(len, x.data(), m2.data(), a2.data(), 5);
    CHECK(m1 == m2);
    CHECK(a1 == a2);
  }
}

TEST_CASE("backend selection") {
  CHECK(k::select("scalar"));
  CHECK(k::active().name == "scalar");
  CHECK_FALSE(k::select("no-such-backend"));
  if (k::avx2_table()) {
    CHECK(k::select("avx2"));
    CHECK(k::active().name == "avx2");
  }
}
