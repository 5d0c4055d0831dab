#include "mim/core/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace mim::kernels {

namespace avx2 {
// Defined in kernels_avx2.cpp. supported() is false on non-x86 builds.
bool supported();
void fill_table(OpTable<float>& t);
void fill_table(OpTable<double>& t);
}  // namespace avx2

namespace scalar {

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void vadd(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <class T>
void vsub(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

template <class T>
void vmul(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <class T>
void vfma(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

template <class T>
void vscale(T alpha, T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <class T>
T vsum(const T* x, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <class T>
void adamw(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1, T beta2,
           T eps, T bias1, T bias2, T weight_decay) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    const T m_hat = m[i] / bias1;
    const T v_hat = v[i] / bias2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    p[i] -= lr * weight_decay * p[i];
  }
}

template <class T>
void fill_table(OpTable<T>& t) {
  t.dot = &dot<T>;
  t.axpy = &axpy<T>;
  t.vadd = &vadd<T>;
  t.vsub = &vsub<T>;
  t.vmul = &vmul<T>;
  t.vfma = &vfma<T>;
  t.vscale = &vscale<T>;
  t.vsum = &vsum<T>;
  t.adamw = &adamw<T>;
}

}  // namespace scalar

namespace {

Isa g_active = Isa::kScalar;
bool g_initialized = false;

OpTable<float> g_table_f32;
OpTable<double> g_table_f64;

void apply_isa(Isa isa) {
  if (isa == Isa::kAvx2) {
    avx2::fill_table(g_table_f32);
    avx2::fill_table(g_table_f64);
  } else {
    scalar::fill_table(g_table_f32);
    scalar::fill_table(g_table_f64);
  }
  g_active = isa;
  g_initialized = true;
}

void ensure_initialized() {
  if (!g_initialized) apply_isa(best_supported_isa());
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa best_supported_isa() {
  return avx2::supported() ? Isa::kAvx2 : Isa::kScalar;
}

Isa active_isa() {
  ensure_initialized();
  return g_active;
}

void set_active_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !avx2::supported()) {
    throw std::invalid_argument("kernels: avx2 not supported on this CPU");
  }
  apply_isa(isa);
}

template <>
const OpTable<float>& ops<float>() {
  ensure_initialized();
  return g_table_f32;
}

template <>
const OpTable<double>& ops<double>() {
  ensure_initialized();
  return g_table_f64;
}

template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t rows, std::size_t inner,
             std::size_t cols, bool accumulate) {
  const OpTable<T>& t = ops<T>();
  for (std::size_t i = 0; i < rows; ++i) {
    const T* ai = a + i * inner;
    T* ci = c + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      const T val = t.dot(ai, b + j * inner, inner);
      ci[j] = accumulate ? ci[j] + val : val;
    }
  }
}

template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t rows, std::size_t mid,
             std::size_t cols, bool accumulate) {
  const OpTable<T>& t = ops<T>();
  for (std::size_t i = 0; i < rows; ++i) {
    T* ci = c + i * cols;
    if (!accumulate) std::memset(ci, 0, cols * sizeof(T));
    const T* ai = a + i * mid;
    for (std::size_t j = 0; j < mid; ++j) {
      t.axpy(ai[j], b + j * cols, ci, cols);
    }
  }
}

template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t rows, std::size_t mid,
             std::size_t cols, bool accumulate) {
  const OpTable<T>& t = ops<T>();
  if (!accumulate) std::memset(c, 0, mid * cols * sizeof(T));
  for (std::size_t i = 0; i < rows; ++i) {
    const T* ai = a + i * mid;
    const T* bi = b + i * cols;
    for (std::size_t j = 0; j < mid; ++j) {
      t.axpy(ai[j], bi, c + j * cols, cols);
    }
  }
}

template <class T>
T logsumexp(const T* v, std::size_t n) {
  if (n == 0) throw std::domain_error("logsumexp: empty input");
  T max = v[0];
  for (std::size_t i = 1; i < n; ++i) max = std::max(max, v[i]);
  if (max == -std::numeric_limits<T>::infinity()) return max;
  T sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(v[i] - max);
  return max + std::log(sum);
}

template <class T>
void softmax(const T* v, T* out, std::size_t n) {
  if (n == 0) throw std::domain_error("softmax: empty input");
  T max = v[0];
  for (std::size_t i = 1; i < n; ++i) max = std::max(max, v[i]);
  T sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(v[i] - max);
    sum += out[i];
  }
  const T inv = T(1) / sum;
  for (std::size_t i = 0; i < n; ++i) out[i] *= inv;
}

template <class T>
void gelu(const T* x, T* y, std::size_t n) {
  const T k = T(0.7978845608028654);  // sqrt(2/pi)
  const T c = T(0.044715);
  for (std::size_t i = 0; i < n; ++i) {
    const T u = k * (x[i] + c * x[i] * x[i] * x[i]);
    y[i] = T(0.5) * x[i] * (T(1) + std::tanh(u));
  }
}

template <class T>
void gelu_grad(const T* x, const T* gy, T* gx, std::size_t n) {
  const T k = T(0.7978845608028654);
  const T c = T(0.044715);
  for (std::size_t i = 0; i < n; ++i) {
    const T x2 = x[i] * x[i];
    const T u = k * (x[i] + c * x[i] * x2);
    const T t = std::tanh(u);
    const T d = T(0.5) * (T(1) + t) +
                T(0.5) * x[i] * (T(1) - t * t) * k * (T(1) + T(3) * c * x2);
    gx[i] += d * gy[i];
  }
}

template void gemm_nt<float>(const float*, const float*, float*, std::size_t,
                             std::size_t, std::size_t, bool);
template void gemm_nt<double>(const double*, const double*, double*,
                              std::size_t, std::size_t, std::size_t, bool);
template void gemm_nn<float>(const float*, const float*, float*, std::size_t,
                             std::size_t, std::size_t, bool);
template void gemm_nn<double>(const double*, const double*, double*,
                              std::size_t, std::size_t, std::size_t, bool);
template void gemm_tn<float>(const float*, const float*, float*, std::size_t,
                             std::size_t, std::size_t, bool);
template void gemm_tn<double>(const double*, const double*, double*,
                              std::size_t, std::size_t, std::size_t, bool);
template float logsumexp<float>(const float*, std::size_t);
template double logsumexp<double>(const double*, std::size_t);
template void softmax<float>(const float*, float*, std::size_t);
template void softmax<double>(const double*, double*, std::size_t);
template void gelu<float>(const float*, float*, std::size_t);
template void gelu<double>(const double*, double*, std::size_t);
template void gelu_grad<float>(const float*, const float*, float*,
                               std::size_t);
template void gelu_grad<double>(const double*, const double*, double*,
                                std::size_t);

}  // namespace mim::kernels
