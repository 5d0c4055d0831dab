#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mim/core/kernels.hpp"
#include "mim/core/rng.hpp"

using mim::core::Rng;
namespace kn = mim::kernels;

namespace {

template <class T>
std::vector<T> random_vec(Rng& rng, std::size_t n, double lo = -2.0,
                          double hi = 2.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return v;
}

struct IsaGuard {
  kn::Isa saved = kn::active_isa();
  ~IsaGuard() { kn::set_active_isa(saved); }
};

}  // namespace

TEST_CASE("logsumexp basics") {
  const double two[] = {0.0, 0.0};
  CHECK(kn::logsumexp(two, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  for (double c : {-3.5, 0.0, 1.0, 123.456}) {
    CHECK(kn::logsumexp(&c, 1) == c);
  }

  // Shift-by-max keeps huge inputs finite; exact value is 1000 + log 2.
  const double big[] = {1000.0, 1000.0};
  CHECK(kn::logsumexp(big, 2) ==
        doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(kn::logsumexp<double>(nullptr, 0), std::domain_error);

  // -inf candidates contribute nothing.
  const double with_ninf[] = {1.0, -std::numeric_limits<double>::infinity()};
  CHECK(kn::logsumexp(with_ninf, 2) == 1.0);
}

TEST_CASE("logsumexp bounds: max(v) <= lse(v) <= max(v) + log n") {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(32);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-50.0, 50.0) * std::exp(rng.uniform(0.0, 6.0));
    double max = v[0];
    for (double x : v) max = std::max(max, x);
    const double lse = kn::logsumexp(v.data(), n);
    CHECK(lse >= max);
    CHECK(lse <= max + std::log(static_cast<double>(n)) + 1e-12);
  }
}

TEST_CASE("softmax basics and shift invariance") {
  const double flat[] = {0.0, 0.0, 0.0};
  double out[3];
  kn::softmax(flat, out, 3);
  for (double p : out) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto v = random_vec<double>(rng, 8, -5.0, 5.0);
    const double c = rng.uniform(-100.0, 100.0);
    std::vector<double> shifted(8), a(8), b(8);
    for (int i = 0; i < 8; ++i) shifted[i] = v[i] + c;
    kn::softmax(v.data(), a.data(), 8);
    kn::softmax(shifted.data(), b.data(), 8);
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) {
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
      CHECK(a[i] >= 0.0);
      CHECK(a[i] <= 1.0);
      sum += a[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("softmax matches extended-precision reference") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_vec<double>(rng, 8, -10.0, 10.0);
    std::vector<double> got(8);
    kn::softmax(v.data(), got.data(), 8);
    long double z = 0.0L;
    for (double x : v) z += expl(static_cast<long double>(x));
    for (int i = 0; i < 8; ++i) {
      const long double want = expl(static_cast<long double>(v[i])) / z;
      CHECK(got[i] == doctest::Approx(static_cast<double>(want)).epsilon(1e-13));
    }
  }
}

TEST_CASE_TEMPLATE("scalar and simd kernels agree", T, float, double) {
  if (kn::best_supported_isa() == kn::Isa::kScalar) return;
  IsaGuard guard;
  Rng rng(101);
  const double tol = std::is_same_v<T, float> ? 2e-5 : 1e-13;

  for (std::size_t n : {1u, 3u, 7u, 8u, 9u, 16u, 33u, 128u, 301u}) {
    auto a = random_vec<T>(rng, n);
    auto b = random_vec<T>(rng, n);

    kn::set_active_isa(kn::Isa::kScalar);
    const T dot_ref = kn::dot(a.data(), b.data(), n);
    const T sum_ref = kn::vsum(a.data(), n);
    std::vector<T> axpy_ref = b;
    kn::axpy(T(0.37), a.data(), axpy_ref.data(), n);
    std::vector<T> add_ref(n), mul_ref(n), fma_ref = b;
    kn::vadd(a.data(), b.data(), add_ref.data(), n);
    kn::vmul(a.data(), b.data(), mul_ref.data(), n);
    kn::vfma(a.data(), b.data(), fma_ref.data(), n);

    kn::set_active_isa(kn::Isa::kAvx2);
    const T dot_simd = kn::dot(a.data(), b.data(), n);
    const T sum_simd = kn::vsum(a.data(), n);
    std::vector<T> axpy_simd = b;
    kn::axpy(T(0.37), a.data(), axpy_simd.data(), n);
    std::vector<T> add_simd(n), mul_simd(n), fma_simd = b;
    kn::vadd(a.data(), b.data(), add_simd.data(), n);
    kn::vmul(a.data(), b.data(), mul_simd.data(), n);
    kn::vfma(a.data(), b.data(), fma_simd.data(), n);

    CHECK(std::abs(dot_ref - dot_simd) <=
          tol * std::max<T>(T(1), std::abs(dot_ref)));
    CHECK(std::abs(sum_ref - sum_simd) <=
          tol * std::max<T>(T(1), std::abs(sum_ref)));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(axpy_ref[i] - axpy_simd[i]) <= tol);
      CHECK(add_ref[i] == add_simd[i]);
      CHECK(mul_ref[i] == mul_simd[i]);
      CHECK(std::abs(fma_ref[i] - fma_simd[i]) <= tol);
    }
  }
}

TEST_CASE_TEMPLATE("scalar and simd gemm agree", T, float, double) {
  if (kn::best_supported_isa() == kn::Isa::kScalar) return;
  IsaGuard guard;
  Rng rng(202);
  const double tol = std::is_same_v<T, float> ? 1e-4 : 1e-12;

  const std::size_t rows = 9, inner = 37, cols = 11;
  auto a = random_vec<T>(rng, rows * inner);
  auto bt = random_vec<T>(rng, cols * inner);
  auto b = random_vec<T>(rng, inner * cols);
  auto g = random_vec<T>(rng, rows * cols);

  std::vector<T> nt_ref(rows * cols), nn_ref(rows * inner),
      tn_ref(inner * cols);
  kn::set_active_isa(kn::Isa::kScalar);
  kn::gemm_nt(a.data(), bt.data(), nt_ref.data(), rows, inner, cols);
  kn::gemm_nn(g.data(), b.data(), nn_ref.data(), rows, cols, inner);
  kn::gemm_tn(a.data(), b.data(), tn_ref.data(), rows, inner, cols);

  std::vector<T> nt_simd(rows * cols), nn_simd(rows * inner),
      tn_simd(inner * cols);
  kn::set_active_isa(kn::Isa::kAvx2);
  kn::gemm_nt(a.data(), bt.data(), nt_simd.data(), rows, inner, cols);
  kn::gemm_nn(g.data(), b.data(), nn_simd.data(), rows, cols, inner);
  kn::gemm_tn(a.data(), b.data(), tn_simd.data(), rows, inner, cols);

  for (std::size_t i = 0; i < nt_ref.size(); ++i)
    CHECK(std::abs(nt_ref[i] - nt_simd[i]) <= tol);
  for (std::size_t i = 0; i < nn_ref.size(); ++i)
    CHECK(std::abs(nn_ref[i] - nn_simd[i]) <= tol);
  for (std::size_t i = 0; i < tn_ref.size(); ++i)
    CHECK(std::abs(tn_ref[i] - tn_simd[i]) <= tol);
}

TEST_CASE_TEMPLATE("scalar and simd adamw agree", T, float, double) {
  if (kn::best_supported_isa() == kn::Isa::kScalar) return;
  IsaGuard guard;
  Rng rng(303);
  const double tol = std::is_same_v<T, float> ? 1e-6 : 1e-14;

  const std::size_t n = 131;
  auto p0 = random_vec<T>(rng, n);
  auto g = random_vec<T>(rng, n);
  auto m0 = random_vec<T>(rng, n, 0.0, 0.5);
  auto v0 = random_vec<T>(rng, n, 0.0, 0.5);

  struct Result {
    std::vector<T> p, m, v;
  };
  auto run = [&](kn::Isa isa) {
    kn::set_active_isa(isa);
    Result r{p0, m0, v0};
    kn::adamw(r.p.data(), g.data(), r.m.data(), r.v.data(), n, T(1e-3), T(0.9),
              T(0.98), T(1e-6), T(0.1), T(0.0396), T(0.01));
    return r;
  };
  auto [p_ref, m_ref, v_ref] = run(kn::Isa::kScalar);
  auto [p_simd, m_simd, v_simd] = run(kn::Isa::kAvx2);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::abs(p_ref[i] - p_simd[i]) <= tol);
    CHECK(std::abs(m_ref[i] - m_simd[i]) <= tol);
    CHECK(std::abs(v_ref[i] - v_simd[i]) <= tol);
  }
}

TEST_CASE("isa dispatch is explicit and reversible") {
  IsaGuard guard;
  kn::set_active_isa(kn::Isa::kScalar);
  CHECK(kn::active_isa() == kn::Isa::kScalar);
  if (kn::best_supported_isa() == kn::Isa::kAvx2) {
    kn::set_active_isa(kn::Isa::kAvx2);
    CHECK(kn::active_isa() == kn::Isa::kAvx2);
  }
}
