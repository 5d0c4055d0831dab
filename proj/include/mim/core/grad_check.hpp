#pragma once

#include <functional>
#include <string>

#include "mim/core/param_store.hpp"
#include "mim/core/rng.hpp"

namespace mim::core {

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  int worst_coord = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  bool pass(double tol) const { return max_rel_err < tol; }
};

// Compares gradients already accumulated in `params` (caller runs one
// backward pass first) against central differences of `loss_fn`, which must
// be a pure, deterministic re-evaluation of the same loss. Checks up to
// `max_coords_per_param` coordinates per parameter (all, when the parameter
// is at most that large). Throws std::runtime_error if two evaluations of
// loss_fn at the unperturbed point disagree.
template <class T>
FiniteDiffReport finite_diff_check(const std::function<T()>& loss_fn,
                                   ParamStore<T>& params, T step,
                                   int max_coords_per_param, Rng& rng);

}  // namespace mim::core
