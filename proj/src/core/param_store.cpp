#include "mim/core/param_store.hpp"

#include <algorithm>
#include <stdexcept>

namespace mim::core {

template <class T>
Param<T>& ParamStore<T>::create(const std::string& name, Shape shape) {
  if (index_.count(name) != 0) {
    throw std::logic_error("ParamStore: duplicate parameter '" + name + "'");
  }
  auto p = std::make_unique<Param<T>>();
  p->name = name;
  p->shape = std::move(shape);
  const std::size_t n = shape_numel(p->shape);
  p->value.assign(n, T(0));
  p->grad.assign(n, T(0));
  p->m.assign(n, T(0));
  p->v.assign(n, T(0));
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

template <class T>
Param<T>& ParamStore<T>::create_normal(const std::string& name, Shape shape,
                                       Rng& rng, double stddev) {
  Param<T>& p = create(name, std::move(shape));
  for (T& x : p.value) {
    x = static_cast<T>(rng.truncated_normal(0.0, stddev));
  }
  return p;
}

template <class T>
Param<T>& ParamStore<T>::get(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw std::out_of_range("ParamStore: unknown parameter '" +
                            std::string(name) + "'");
  }
  return *params_[it->second];
}

template <class T>
const Param<T>& ParamStore<T>::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw std::out_of_range("ParamStore: unknown parameter '" +
                            std::string(name) + "'");
  }
  return *params_[it->second];
}

template <class T>
bool ParamStore<T>::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

template <class T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) {
    std::fill(p->grad.begin(), p->grad.end(), T(0));
  }
}

template <class T>
std::size_t ParamStore<T>::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace mim::core
