#include "mim/core/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mim::core {

template <class T>
FiniteDiffReport finite_diff_check(const std::function<T()>& loss_fn,
                                   ParamStore<T>& params, T step,
                                   int max_coords_per_param, Rng& rng) {
  const T base_a = loss_fn();
  const T base_b = loss_fn();
  if (base_a != base_b) {
    throw std::runtime_error(
        "finite_diff_check: loss_fn is not deterministic");
  }

  FiniteDiffReport report;
  for (const auto& p : params.all()) {
    const int n = static_cast<int>(p->size());
    std::vector<int> coords;
    if (n <= max_coords_per_param) {
      coords.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
    } else {
      coords = rng.sample_without_replacement(n, max_coords_per_param);
    }
    for (int c : coords) {
      const std::size_t ci = static_cast<std::size_t>(c);
      const T saved = p->value[ci];
      p->value[ci] = saved + step;
      const T up = loss_fn();
      p->value[ci] = saved - step;
      const T down = loss_fn();
      p->value[ci] = saved;

      const double numeric =
          (static_cast<double>(up) - static_cast<double>(down)) /
          (2.0 * static_cast<double>(step));
      const double analytic = static_cast<double>(p->grad[ci]);
      const double scale =
          std::max({std::abs(numeric), std::abs(analytic), 1e-3});
      const double rel = std::abs(numeric - analytic) / scale;
      ++report.coords_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p->name;
        report.worst_coord = c;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

template FiniteDiffReport finite_diff_check<float>(
    const std::function<float()>&, ParamStore<float>&, float, int, Rng&);
template FiniteDiffReport finite_diff_check<double>(
    const std::function<double()>&, ParamStore<double>&, double, int, Rng&);

}  // namespace mim::core
