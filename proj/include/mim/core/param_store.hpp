#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mim/core/rng.hpp"

namespace mim::core {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

// One named trainable tensor plus its optimizer slots. Gradients accumulate
// across backward passes until zero_grad().
template <class T>
struct Param {
  std::string name;
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  std::vector<T> m;  // Adam first moment
  std::vector<T> v;  // Adam second moment

  std::size_t size() const { return value.size(); }
};

template <class T>
class ParamStore {
 public:
  // Registers a zero-initialized parameter. Throws on duplicate name.
  Param<T>& create(const std::string& name, Shape shape);

  Param<T>& create_normal(const std::string& name, Shape shape, Rng& rng,
                          double stddev);

  Param<T>& get(std::string_view name);
  const Param<T>& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::vector<std::unique_ptr<Param<T>>>& all() const { return params_; }

  void zero_grad();
  std::size_t total_size() const;

 private:
  std::vector<std::unique_ptr<Param<T>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace mim::core
