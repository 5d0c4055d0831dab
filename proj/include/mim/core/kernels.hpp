#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops behind the tensor library. Every kernel exists
// as a scalar reference implementation plus (on x86-64) an AVX2+FMA variant
// selected at runtime. The two variants are equivalence-tested against each
// other; the scalar path is the semantic reference.
namespace mim::kernels {

enum class Isa {
  kScalar,
  kAvx2,
};

const char* isa_name(Isa isa);

// Best ISA the running CPU supports.
Isa best_supported_isa();

Isa active_isa();

// Force a particular ISA (tests, --force-scalar). Throws std::invalid_argument
// if the CPU does not support it.
void set_active_isa(Isa isa);

template <class T>
struct OpTable {
  T (*dot)(const T* a, const T* b, std::size_t n);
  void (*axpy)(T alpha, const T* x, T* y, std::size_t n);  // y += alpha*x
  void (*vadd)(const T* a, const T* b, T* out, std::size_t n);
  void (*vsub)(const T* a, const T* b, T* out, std::size_t n);
  void (*vmul)(const T* a, const T* b, T* out, std::size_t n);
  void (*vfma)(const T* a, const T* b, T* out, std::size_t n);  // out += a*b
  void (*vscale)(T alpha, T* x, std::size_t n);
  T (*vsum)(const T* x, std::size_t n);
  // Bias-corrected AdamW step with decoupled weight decay.
  void (*adamw)(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                T beta2, T eps, T bias1, T bias2, T weight_decay);
};

template <class T>
const OpTable<T>& ops();

template <class T>
inline T dot(const T* a, const T* b, std::size_t n) {
  return ops<T>().dot(a, b, n);
}
template <class T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
  ops<T>().axpy(alpha, x, y, n);
}
template <class T>
inline void vadd(const T* a, const T* b, T* out, std::size_t n) {
  ops<T>().vadd(a, b, out, n);
}
template <class T>
inline void vsub(const T* a, const T* b, T* out, std::size_t n) {
  ops<T>().vsub(a, b, out, n);
}
template <class T>
inline void vmul(const T* a, const T* b, T* out, std::size_t n) {
  ops<T>().vmul(a, b, out, n);
}
template <class T>
inline void vfma(const T* a, const T* b, T* out, std::size_t n) {
  ops<T>().vfma(a, b, out, n);
}
template <class T>
inline void vscale(T alpha, T* x, std::size_t n) {
  ops<T>().vscale(alpha, x, n);
}
template <class T>
inline T vsum(const T* x, std::size_t n) {
  return ops<T>().vsum(x, n);
}
template <class T>
inline void adamw(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                  T beta2, T eps, T bias1, T bias2, T weight_decay) {
  ops<T>().adamw(p, g, m, v, n, lr, beta1, beta2, eps, bias1, bias2,
                 weight_decay);
}

// Row-major GEMM family, built on dot/axpy so they inherit the active ISA.
//
// c[rows x cols] (+)= a[rows x inner] * b[cols x inner]^T
template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t rows, std::size_t inner,
             std::size_t cols, bool accumulate = false);
// c[rows x cols] (+)= a[rows x mid] * b[mid x cols]
template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t rows, std::size_t mid,
             std::size_t cols, bool accumulate = false);
// c[mid x cols] (+)= a[rows x mid]^T * b[rows x cols]
template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t rows, std::size_t mid,
             std::size_t cols, bool accumulate = false);

// Overflow-safe log(sum(exp(v))). Throws std::domain_error on empty input.
// -inf entries are permitted and contribute nothing.
template <class T>
T logsumexp(const T* v, std::size_t n);

// out_i = exp(v_i - max) / sum_j exp(v_j - max); entries sum to 1.
template <class T>
void softmax(const T* v, T* out, std::size_t n);

// GELU, tanh approximation.
template <class T>
void gelu(const T* x, T* y, std::size_t n);
// gx += gelu'(x) * gy
template <class T>
void gelu_grad(const T* x, const T* gy, T* gx, std::size_t n);

}  // namespace mim::kernels
