#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mim/core/param_store.hpp"
#include "mim/core/rng.hpp"

namespace mim::core {

template <class T>
class Graph;

// One value in the computation graph. Nodes are created in topological
// order (define-by-run), so reverse creation order is a valid backward
// schedule. Parameter leaves alias Param storage: their gradients land
// directly in the ParamStore and accumulate until zero_grad().
template <class T>
struct Node {
  Shape shape;
  std::size_t numel = 0;
  std::vector<T> storage;       // empty when data aliases a Param
  T* data = nullptr;
  std::vector<T> grad_storage;  // lazily allocated per backward pass
  T* grad = nullptr;
  bool requires_grad = false;
  bool owns_grad = true;  // false when grad aliases a Param
  std::uint32_t grad_epoch = 0;
  int id = -1;
  std::function<void(Graph<T>&)> backward_fn;
};

// Cheap handle to a node. Valid as long as its Graph is alive and not
// cleared.
template <class T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(Graph<T>* graph, Node<T>* node) : graph_(graph), node_(node) {}

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->numel; }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const T> value() const { return {node_->data, node_->numel}; }
  std::span<T> mutable_value() { return {node_->data, node_->numel}; }

  T item() const;

  // Empty span when this node has not received a gradient.
  std::span<const T> grad() const {
    if (node_->grad == nullptr) return {};
    return {node_->grad, node_->numel};
  }

  Graph<T>* graph() const { return graph_; }
  Node<T>* node() const { return node_; }

 private:
  Graph<T>* graph_ = nullptr;
  Node<T>* node_ = nullptr;
};

// Define-by-run reverse-mode graph. Rebuilt per training step; tensors are
// immutable once their forward value is computed.
template <class T>
class Graph {
 public:
  using Value = T;

  Tensor<T> input(Shape shape, std::vector<T> data);
  Tensor<T> scalar(T value);
  Tensor<T> zeros(Shape shape, bool requires_grad = false);
  Tensor<T> param(Param<T>& p);

  // Elementwise; shapes must match.
  Tensor<T> add(Tensor<T> a, Tensor<T> b);
  Tensor<T> sub(Tensor<T> a, Tensor<T> b);
  Tensor<T> mul(Tensor<T> a, Tensor<T> b);
  Tensor<T> scale(Tensor<T> a, T alpha);

  // Row gather: out[i] = table[rows[i]]; backward scatter-adds.
  Tensor<T> gather_rows(Tensor<T> table, std::vector<int> rows);
  // Stack d-vectors into a [k x d] matrix.
  Tensor<T> stack_rows(const std::vector<Tensor<T>>& rows);
  Tensor<T> mean_rows(Tensor<T> x);

  // y = x * W^T + b. x: [n x in], w: [out x in], b: [out].
  Tensor<T> linear(Tensor<T> x, Tensor<T> w, Tensor<T> b);
  // Pairwise row dots: [n x d] x [m x d] -> [n x m].
  Tensor<T> matmul_nt(Tensor<T> a, Tensor<T> b);

  Tensor<T> gelu(Tensor<T> x);
  Tensor<T> layer_norm(Tensor<T> x, Tensor<T> gamma, Tensor<T> beta, T eps);
  // Identity when p == 0.
  Tensor<T> dropout(Tensor<T> x, double p, Rng& rng);

  // Multi-head scaled dot-product attention over row-major [rows x d]
  // streams. mask is [Tq x Tk] (1 = visible), null = all visible. Rows with
  // no visible key produce a zero output row. Masked-out keys contribute
  // exactly nothing: their scores are never read, their weights are exact
  // zeros.
  Tensor<T> attention(Tensor<T> q, Tensor<T> k, Tensor<T> v, int heads,
                      const std::uint8_t* mask);

  // Reductions / scalars.
  Tensor<T> logsumexp(Tensor<T> x);
  Tensor<T> pick(Tensor<T> x, int index);
  Tensor<T> sum(Tensor<T> x);
  Tensor<T> mean(Tensor<T> x);
  // Numerically stable -[y log s(z) + (1-y) log(1-s(z))] for scalar logit.
  Tensor<T> bce_with_logits(Tensor<T> logit, T target);

  void backward(const Tensor<T>& loss);

  std::size_t size() const { return nodes_.size(); }
  void clear();

  // Internal: gradient buffer of a parent, or null if grads not required.
  T* grad_sink(Node<T>* n);

 private:
  Node<T>& new_node(Shape shape, bool requires_grad);
  void ensure_grad(Node<T>& n);

  std::vector<std::unique_ptr<Node<T>>> nodes_;
  std::uint32_t epoch_ = 0;
};

}  // namespace mim::core
