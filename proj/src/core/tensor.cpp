#include "mim/core/tensor.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mim/core/kernels.hpp"

namespace mim::core {

namespace {

template <class T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b,
                      const char* op) {
  if (a.shape() != b.shape()) {
    throw std::logic_error(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

template <class T>
T Tensor<T>::item() const {
  if (node_->numel != 1) {
    throw std::logic_error("Tensor::item: tensor is not a scalar");
  }
  return node_->data[0];
}

template <class T>
Node<T>& Graph<T>::new_node(Shape shape, bool requires_grad) {
  auto owned = std::make_unique<Node<T>>();
  Node<T>& n = *owned;
  n.numel = shape_numel(shape);
  n.shape = std::move(shape);
  n.storage.resize(n.numel);
  n.data = n.storage.data();
  n.requires_grad = requires_grad;
  n.id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(owned));
  return n;
}

template <class T>
void Graph<T>::ensure_grad(Node<T>& n) {
  if (n.owns_grad) {
    if (n.grad_epoch != epoch_) {
      n.grad_storage.assign(n.numel, T(0));
      n.grad = n.grad_storage.data();
      n.grad_epoch = epoch_;
    }
  } else {
    n.grad_epoch = epoch_;  // param grads persist across passes
  }
}

template <class T>
T* Graph<T>::grad_sink(Node<T>* n) {
  if (!n->requires_grad) return nullptr;
  ensure_grad(*n);
  return n->grad;
}

template <class T>
void Graph<T>::backward(const Tensor<T>& loss) {
  Node<T>* root = loss.node();
  if (root == nullptr || root->numel != 1) {
    throw std::logic_error("backward: loss must be a scalar tensor");
  }
  ++epoch_;
  ensure_grad(*root);
  root->grad[0] += T(1);
  for (int i = root->id; i >= 0; --i) {
    Node<T>& n = *nodes_[static_cast<std::size_t>(i)];
    if (n.grad_epoch == epoch_ && n.backward_fn) n.backward_fn(*this);
  }
}

template <class T>
void Graph<T>::clear() {
  nodes_.clear();
}

template <class T>
Tensor<T> Graph<T>::input(Shape shape, std::vector<T> data) {
  if (shape_numel(shape) != data.size()) {
    throw std::logic_error("Graph::input: data length does not match shape");
  }
  Node<T>& n = new_node(std::move(shape), false);
  std::memcpy(n.data, data.data(), n.numel * sizeof(T));
  return {this, &n};
}

template <class T>
Tensor<T> Graph<T>::scalar(T value) {
  Node<T>& n = new_node({1}, false);
  n.data[0] = value;
  return {this, &n};
}

template <class T>
Tensor<T> Graph<T>::zeros(Shape shape, bool requires_grad) {
  Node<T>& n = new_node(std::move(shape), requires_grad);
  return {this, &n};
}

template <class T>
Tensor<T> Graph<T>::param(Param<T>& p) {
  auto owned = std::make_unique<Node<T>>();
  Node<T>& n = *owned;
  n.shape = p.shape;
  n.numel = p.size();
  n.data = p.value.data();
  n.grad = p.grad.data();
  n.requires_grad = true;
  n.owns_grad = false;
  n.id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(owned));
  return {this, &n};
}

template <class T>
Tensor<T> Graph<T>::add(Tensor<T> a, Tensor<T> b) {
  check_same_shape(a, b, "add");
  Node<T>* an = a.node();
  Node<T>* bn = b.node();
  Node<T>& out = new_node(an->shape, an->requires_grad || bn->requires_grad);
  kernels::vadd(an->data, bn->data, out.data, out.numel);
  Node<T>* self = &out;
  out.backward_fn = [self, an, bn](Graph<T>& g) {
    if (T* ga = g.grad_sink(an)) kernels::axpy(T(1), self->grad, ga, self->numel);
    if (T* gb = g.grad_sink(bn)) kernels::axpy(T(1), self->grad, gb, self->numel);
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::sub(Tensor<T> a, Tensor<T> b) {
  check_same_shape(a, b, "sub");
  Node<T>* an = a.node();
  Node<T>* bn = b.node();
  Node<T>& out = new_node(an->shape, an->requires_grad || bn->requires_grad);
  kernels::vsub(an->data, bn->data, out.data, out.numel);
  Node<T>* self = &out;
  out.backward_fn = [self, an, bn](Graph<T>& g) {
    if (T* ga = g.grad_sink(an)) kernels::axpy(T(1), self->grad, ga, self->numel);
    if (T* gb = g.grad_sink(bn)) kernels::axpy(T(-1), self->grad, gb, self->numel);
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::mul(Tensor<T> a, Tensor<T> b) {
  check_same_shape(a, b, "mul");
  Node<T>* an = a.node();
  Node<T>* bn = b.node();
  Node<T>& out = new_node(an->shape, an->requires_grad || bn->requires_grad);
  kernels::vmul(an->data, bn->data, out.data, out.numel);
  Node<T>* self = &out;
  out.backward_fn = [self, an, bn](Graph<T>& g) {
    if (T* ga = g.grad_sink(an)) kernels::vfma(self->grad, bn->data, ga, self->numel);
    if (T* gb = g.grad_sink(bn)) kernels::vfma(self->grad, an->data, gb, self->numel);
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::scale(Tensor<T> a, T alpha) {
  Node<T>* an = a.node();
  Node<T>& out = new_node(an->shape, an->requires_grad);
  std::memcpy(out.data, an->data, out.numel * sizeof(T));
  kernels::vscale(alpha, out.data, out.numel);
  Node<T>* self = &out;
  out.backward_fn = [self, an, alpha](Graph<T>& g) {
    if (T* ga = g.grad_sink(an)) kernels::axpy(alpha, self->grad, ga, self->numel);
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::gather_rows(Tensor<T> table, std::vector<int> rows) {
  Node<T>* tn = table.node();
  if (tn->shape.size() != 2) {
    throw std::logic_error("gather_rows: table must be rank 2");
  }
  const int vocab = tn->shape[0];
  const int dim = tn->shape[1];
  for (int r : rows) {
    if (r < 0 || r >= vocab) {
      throw std::out_of_range("gather_rows: row index out of range");
    }
  }
  Node<T>& out =
      new_node({static_cast<int>(rows.size()), dim}, tn->requires_grad);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::memcpy(out.data + i * static_cast<std::size_t>(dim),
                tn->data + static_cast<std::size_t>(rows[i]) *
                               static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim) * sizeof(T));
  }
  Node<T>* self = &out;
  out.backward_fn = [self, tn, rows = std::move(rows), dim](Graph<T>& g) {
    T* gt = g.grad_sink(tn);
    if (!gt) return;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      kernels::axpy(T(1), self->grad + i * static_cast<std::size_t>(dim),
                    gt + static_cast<std::size_t>(rows[i]) *
                             static_cast<std::size_t>(dim),
                    static_cast<std::size_t>(dim));
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::stack_rows(const std::vector<Tensor<T>>& rows) {
  if (rows.empty()) throw std::logic_error("stack_rows: no rows");
  const std::size_t dim = rows[0].numel();
  bool needs_grad = false;
  for (const Tensor<T>& r : rows) {
    if (r.numel() != dim) throw std::logic_error("stack_rows: ragged rows");
    needs_grad = needs_grad || r.requires_grad();
  }
  Node<T>& out = new_node(
      {static_cast<int>(rows.size()), static_cast<int>(dim)}, needs_grad);
  std::vector<Node<T>*> parents(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    parents[i] = rows[i].node();
    std::memcpy(out.data + i * dim, parents[i]->data, dim * sizeof(T));
  }
  Node<T>* self = &out;
  out.backward_fn = [self, parents = std::move(parents), dim](Graph<T>& g) {
    for (std::size_t i = 0; i < parents.size(); ++i) {
      if (T* gp = g.grad_sink(parents[i])) {
        kernels::axpy(T(1), self->grad + i * dim, gp, dim);
      }
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::mean_rows(Tensor<T> x) {
  Node<T>* xn = x.node();
  if (xn->shape.size() != 2) {
    throw std::logic_error("mean_rows: input must be rank 2");
  }
  const std::size_t n = static_cast<std::size_t>(xn->shape[0]);
  const std::size_t d = static_cast<std::size_t>(xn->shape[1]);
  Node<T>& out = new_node({static_cast<int>(d)}, xn->requires_grad);
  std::memset(out.data, 0, d * sizeof(T));
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(T(1), xn->data + i * d, out.data, d);
  }
  kernels::vscale(T(1) / static_cast<T>(n), out.data, d);
  Node<T>* self = &out;
  out.backward_fn = [self, xn, n, d](Graph<T>& g) {
    if (T* gx = g.grad_sink(xn)) {
      const T inv = T(1) / static_cast<T>(n);
      for (std::size_t i = 0; i < n; ++i) {
        kernels::axpy(inv, self->grad, gx + i * d, d);
      }
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::linear(Tensor<T> x, Tensor<T> w, Tensor<T> b) {
  Node<T>* xn = x.node();
  Node<T>* wn = w.node();
  Node<T>* bn = b.node();
  if (xn->shape.size() != 2 || wn->shape.size() != 2) {
    throw std::logic_error("linear: x and w must be rank 2");
  }
  const std::size_t n = static_cast<std::size_t>(xn->shape[0]);
  const std::size_t in = static_cast<std::size_t>(xn->shape[1]);
  const std::size_t out_dim = static_cast<std::size_t>(wn->shape[0]);
  if (static_cast<std::size_t>(wn->shape[1]) != in || bn->numel != out_dim) {
    throw std::logic_error("linear: dimension mismatch");
  }
  Node<T>& out = new_node(
      {static_cast<int>(n), static_cast<int>(out_dim)},
      xn->requires_grad || wn->requires_grad || bn->requires_grad);
  kernels::gemm_nt(xn->data, wn->data, out.data, n, in, out_dim);
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(T(1), bn->data, out.data + i * out_dim, out_dim);
  }
  Node<T>* self = &out;
  out.backward_fn = [self, xn, wn, bn, n, in, out_dim](Graph<T>& g) {
    const T* go = self->grad;
    if (T* gx = g.grad_sink(xn)) {
      kernels::gemm_nn(go, wn->data, gx, n, out_dim, in, /*accumulate=*/true);
    }
    if (T* gw = g.grad_sink(wn)) {
      kernels::gemm_tn(go, xn->data, gw, n, out_dim, in, /*accumulate=*/true);
    }
    if (T* gb = g.grad_sink(bn)) {
      for (std::size_t i = 0; i < n; ++i) {
        kernels::axpy(T(1), go + i * out_dim, gb, out_dim);
      }
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::matmul_nt(Tensor<T> a, Tensor<T> b) {
  Node<T>* an = a.node();
  Node<T>* bn = b.node();
  if (an->shape.size() != 2 || bn->shape.size() != 2 ||
      an->shape[1] != bn->shape[1]) {
    throw std::logic_error("matmul_nt: need [n x d] and [m x d]");
  }
  const std::size_t n = static_cast<std::size_t>(an->shape[0]);
  const std::size_t d = static_cast<std::size_t>(an->shape[1]);
  const std::size_t m = static_cast<std::size_t>(bn->shape[0]);
  Node<T>& out = new_node({static_cast<int>(n), static_cast<int>(m)},
                          an->requires_grad || bn->requires_grad);
  kernels::gemm_nt(an->data, bn->data, out.data, n, d, m);
  Node<T>* self = &out;
  out.backward_fn = [self, an, bn, n, d, m](Graph<T>& g) {
    const T* go = self->grad;
    if (T* ga = g.grad_sink(an)) {
      kernels::gemm_nn(go, bn->data, ga, n, m, d, /*accumulate=*/true);
    }
    if (T* gb = g.grad_sink(bn)) {
      kernels::gemm_tn(go, an->data, gb, n, m, d, /*accumulate=*/true);
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::gelu(Tensor<T> x) {
  Node<T>* xn = x.node();
  Node<T>& out = new_node(xn->shape, xn->requires_grad);
  kernels::gelu(xn->data, out.data, out.numel);
  Node<T>* self = &out;
  out.backward_fn = [self, xn](Graph<T>& g) {
    if (T* gx = g.grad_sink(xn)) {
      kernels::gelu_grad(xn->data, self->grad, gx, self->numel);
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::layer_norm(Tensor<T> x, Tensor<T> gamma, Tensor<T> beta,
                               T eps) {
  Node<T>* xn = x.node();
  Node<T>* gn = gamma.node();
  Node<T>* bn = beta.node();
  if (xn->shape.size() != 2) {
    throw std::logic_error("layer_norm: input must be rank 2");
  }
  const std::size_t n = static_cast<std::size_t>(xn->shape[0]);
  const std::size_t d = static_cast<std::size_t>(xn->shape[1]);
  if (gn->numel != d || bn->numel != d) {
    throw std::logic_error("layer_norm: gamma/beta dimension mismatch");
  }
  if (eps <= T(0)) throw std::logic_error("layer_norm: eps must be > 0");
  Node<T>& out = new_node(
      xn->shape, xn->requires_grad || gn->requires_grad || bn->requires_grad);

  auto xhat = std::make_shared<std::vector<T>>(n * d);
  auto inv_std = std::make_shared<std::vector<T>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = xn->data + i * d;
    const T mu = kernels::vsum(row, d) / static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const T c = row[j] - mu;
      var += c * c;
    }
    var /= static_cast<T>(d);
    const T inv = T(1) / std::sqrt(var + eps);
    (*inv_std)[i] = inv;
    T* xh = xhat->data() + i * d;
    T* o = out.data + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      xh[j] = (row[j] - mu) * inv;
      o[j] = gn->data[j] * xh[j] + bn->data[j];
    }
  }
  Node<T>* self = &out;
  out.backward_fn = [self, xn, gn, bn, n, d, xhat, inv_std](Graph<T>& g) {
    const T* go = self->grad;
    if (T* gb = g.grad_sink(bn)) {
      for (std::size_t i = 0; i < n; ++i) kernels::axpy(T(1), go + i * d, gb, d);
    }
    if (T* gg = g.grad_sink(gn)) {
      for (std::size_t i = 0; i < n; ++i) {
        kernels::vfma(go + i * d, xhat->data() + i * d, gg, d);
      }
    }
    if (T* gx = g.grad_sink(xn)) {
      std::vector<T> dxhat(d);
      for (std::size_t i = 0; i < n; ++i) {
        const T* grow = go + i * d;
        const T* xh = xhat->data() + i * d;
        for (std::size_t j = 0; j < d; ++j) dxhat[j] = grow[j] * gn->data[j];
        const T mean_dx = kernels::vsum(dxhat.data(), d) / static_cast<T>(d);
        const T mean_dxxh =
            kernels::dot(dxhat.data(), xh, d) / static_cast<T>(d);
        const T inv = (*inv_std)[i];
        T* gxrow = gx + i * d;
        for (std::size_t j = 0; j < d; ++j) {
          gxrow[j] += inv * (dxhat[j] - mean_dx - xh[j] * mean_dxxh);
        }
      }
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::dropout(Tensor<T> x, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw std::logic_error("dropout: p must be in [0,1)");
  if (p == 0.0) return x;
  Node<T>* xn = x.node();
  Node<T>& out = new_node(xn->shape, xn->requires_grad);
  auto mask = std::make_shared<std::vector<T>>(out.numel);
  const T keep_scale = T(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < out.numel; ++i) {
    (*mask)[i] = rng.bernoulli(p) ? T(0) : keep_scale;
    out.data[i] = xn->data[i] * (*mask)[i];
  }
  Node<T>* self = &out;
  out.backward_fn = [self, xn, mask](Graph<T>& g) {
    if (T* gx = g.grad_sink(xn)) {
      kernels::vfma(self->grad, mask->data(), gx, self->numel);
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::attention(Tensor<T> q, Tensor<T> k, Tensor<T> v, int heads,
                              const std::uint8_t* mask) {
  Node<T>* qn = q.node();
  Node<T>* kn = k.node();
  Node<T>* vn = v.node();
  if (qn->shape.size() != 2 || kn->shape.size() != 2 || vn->shape.size() != 2) {
    throw std::logic_error("attention: inputs must be rank 2");
  }
  const std::size_t tq = static_cast<std::size_t>(qn->shape[0]);
  const std::size_t tk = static_cast<std::size_t>(kn->shape[0]);
  const std::size_t d = static_cast<std::size_t>(qn->shape[1]);
  if (static_cast<std::size_t>(kn->shape[1]) != d ||
      vn->shape != kn->shape) {
    throw std::logic_error("attention: q/k/v dimension mismatch");
  }
  if (heads <= 0 || d % static_cast<std::size_t>(heads) != 0) {
    throw std::logic_error("attention: width not divisible by head count");
  }
  const std::size_t hd = d / static_cast<std::size_t>(heads);
  const T scale = T(1) / std::sqrt(static_cast<T>(hd));

  Node<T>& out = new_node(
      qn->shape, qn->requires_grad || kn->requires_grad || vn->requires_grad);
  std::memset(out.data, 0, out.numel * sizeof(T));

  // Softmax weights are kept for the backward pass; masked entries are
  // exact zeros and their scores are never computed.
  auto weights = std::make_shared<std::vector<T>>(
      static_cast<std::size_t>(heads) * tq * tk, T(0));
  std::vector<T> scores(tk);
  for (int h = 0; h < heads; ++h) {
    const std::size_t hoff = static_cast<std::size_t>(h) * hd;
    for (std::size_t i = 0; i < tq; ++i) {
      const std::uint8_t* mrow = mask ? mask + i * tk : nullptr;
      const T* qrow = qn->data + i * d + hoff;
      T max = 0;
      bool any = false;
      for (std::size_t j = 0; j < tk; ++j) {
        if (mrow && !mrow[j]) continue;
        scores[j] = scale * kernels::dot(qrow, kn->data + j * d + hoff, hd);
        max = any ? std::max(max, scores[j]) : scores[j];
        any = true;
      }
      if (!any) continue;  // no visible key: zero output row
      T* wrow = weights->data() + (static_cast<std::size_t>(h) * tq + i) * tk;
      T z = 0;
      for (std::size_t j = 0; j < tk; ++j) {
        if (mrow && !mrow[j]) continue;
        wrow[j] = std::exp(scores[j] - max);
        z += wrow[j];
      }
      const T inv_z = T(1) / z;
      T* orow = out.data + i * d + hoff;
      for (std::size_t j = 0; j < tk; ++j) {
        if (mrow && !mrow[j]) continue;
        wrow[j] *= inv_z;
        kernels::axpy(wrow[j], vn->data + j * d + hoff, orow, hd);
      }
    }
  }

  Node<T>* self = &out;
  out.backward_fn = [self, qn, kn, vn, heads, mask, tq, tk, d, hd, scale,
                     weights](Graph<T>& g) {
    T* gq = g.grad_sink(qn);
    T* gk = g.grad_sink(kn);
    T* gv = g.grad_sink(vn);
    const T* go = self->grad;
    std::vector<T> dw(tk);
    for (int h = 0; h < heads; ++h) {
      const std::size_t hoff = static_cast<std::size_t>(h) * hd;
      for (std::size_t i = 0; i < tq; ++i) {
        const std::uint8_t* mrow = mask ? mask + i * tk : nullptr;
        const T* wrow =
            weights->data() + (static_cast<std::size_t>(h) * tq + i) * tk;
        const T* grow = go + i * d + hoff;
        // dw_j = <dout_i, v_j>, then softmax backward to scores.
        T wdw = 0;
        for (std::size_t j = 0; j < tk; ++j) {
          if (mrow && !mrow[j]) continue;
          dw[j] = kernels::dot(grow, vn->data + j * d + hoff, hd);
          wdw += wrow[j] * dw[j];
          if (gv) kernels::axpy(wrow[j], grow, gv + j * d + hoff, hd);
        }
        for (std::size_t j = 0; j < tk; ++j) {
          if (mrow && !mrow[j]) continue;
          const T ds = wrow[j] * (dw[j] - wdw) * scale;
          if (gq) kernels::axpy(ds, kn->data + j * d + hoff, gq + i * d + hoff, hd);
          if (gk) kernels::axpy(ds, qn->data + i * d + hoff, gk + j * d + hoff, hd);
        }
      }
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::logsumexp(Tensor<T> x) {
  Node<T>* xn = x.node();
  if (xn->numel == 0) throw std::domain_error("logsumexp: empty input");
  Node<T>& out = new_node({1}, xn->requires_grad);
  out.data[0] = kernels::logsumexp(xn->data, xn->numel);
  auto probs = std::make_shared<std::vector<T>>(xn->numel);
  kernels::softmax(xn->data, probs->data(), xn->numel);
  Node<T>* self = &out;
  out.backward_fn = [self, xn, probs](Graph<T>& g) {
    if (T* gx = g.grad_sink(xn)) {
      kernels::axpy(self->grad[0], probs->data(), gx, xn->numel);
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::pick(Tensor<T> x, int index) {
  Node<T>* xn = x.node();
  if (index < 0 || static_cast<std::size_t>(index) >= xn->numel) {
    throw std::out_of_range("pick: index out of range");
  }
  Node<T>& out = new_node({1}, xn->requires_grad);
  out.data[0] = xn->data[index];
  Node<T>* self = &out;
  out.backward_fn = [self, xn, index](Graph<T>& g) {
    if (T* gx = g.grad_sink(xn)) gx[index] += self->grad[0];
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::sum(Tensor<T> x) {
  Node<T>* xn = x.node();
  Node<T>& out = new_node({1}, xn->requires_grad);
  out.data[0] = kernels::vsum(xn->data, xn->numel);
  Node<T>* self = &out;
  out.backward_fn = [self, xn](Graph<T>& g) {
    if (T* gx = g.grad_sink(xn)) {
      const T go = self->grad[0];
      for (std::size_t i = 0; i < xn->numel; ++i) gx[i] += go;
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::mean(Tensor<T> x) {
  Node<T>* xn = x.node();
  if (xn->numel == 0) throw std::domain_error("mean: empty input");
  Node<T>& out = new_node({1}, xn->requires_grad);
  const T inv = T(1) / static_cast<T>(xn->numel);
  out.data[0] = kernels::vsum(xn->data, xn->numel) * inv;
  Node<T>* self = &out;
  out.backward_fn = [self, xn, inv](Graph<T>& g) {
    if (T* gx = g.grad_sink(xn)) {
      const T go = self->grad[0] * inv;
      for (std::size_t i = 0; i < xn->numel; ++i) gx[i] += go;
    }
  };
  return {this, &out};
}

template <class T>
Tensor<T> Graph<T>::bce_with_logits(Tensor<T> logit, T target) {
  Node<T>* zn = logit.node();
  if (zn->numel != 1) {
    throw std::logic_error("bce_with_logits: logit must be scalar");
  }
  if (target != T(0) && target != T(1)) {
    throw std::logic_error("bce_with_logits: target must be 0 or 1");
  }
  Node<T>& out = new_node({1}, zn->requires_grad);
  const T z = zn->data[0];
  // softplus(z) - y*z, computed in the stable branch.
  const T softplus =
      z > T(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  out.data[0] = softplus - target * z;
  Node<T>* self = &out;
  out.backward_fn = [self, zn, z, target](Graph<T>& g) {
    if (T* gz = g.grad_sink(zn)) {
      const T sig = T(1) / (T(1) + std::exp(-z));
      gz[0] += self->grad[0] * (sig - target);
    }
  };
  return {this, &out};
}

template class Tensor<float>;
template class Tensor<double>;
template class Graph<float>;
template class Graph<double>;

}  // namespace mim::core
