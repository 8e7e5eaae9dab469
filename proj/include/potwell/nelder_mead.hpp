#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace potwell::optim {

struct NelderMeadOptions {
  double ftol = 1e-10;  // stop when f(worst) - f(best) <= ftol
  int max_iterations = 1000;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes f starting from a simplex with vertices x0 and x0 + step_i e_i.
/// Non-finite objective values are treated as +inf, which lets callers mark
/// infeasible regions.
template <typename F>
NelderMeadResult nelder_mead(F&& f, std::span<const double> x0, std::span<const double> step,
                             const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0 || step.size() != n) throw std::invalid_argument("nelder_mead: bad dimensions");

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(std::span<const double>(x));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto along = [&](std::vector<double>& out, double t) {
    // centroid + t * (centroid - worst)
    const auto& worst = simplex[order[n]];
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (centroid[j] - worst[j]);
  };

  for (;;) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const double f_best = fv[order[0]];
    const double f_worst = fv[order[n]];
    if (std::isfinite(f_worst) && f_worst - f_best <= opt.ftol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opt.max_iterations) break;
    ++res.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[k]][j];
    for (auto& c : centroid) c /= static_cast<double>(n);

    const std::size_t worst = order[n];
    along(xr, opt.reflection);
    const double fr = eval(xr);
    if (fr < f_best) {
      along(xe, opt.reflection * opt.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[order[n - 1]]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    // Outside contraction if the reflected point beats the worst, inside otherwise.
    const bool outside = fr < f_worst;
    along(xc, outside ? opt.reflection * opt.contraction : -opt.contraction);
    const double fc = eval(xc);
    if (fc < (outside ? fr : f_worst)) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    const auto& best = simplex[order[0]];
    for (std::size_t k = 1; k <= n; ++k) {
      auto& v = simplex[order[k]];
      for (std::size_t j = 0; j < n; ++j) v[j] = best[j] + opt.shrink * (v[j] - best[j]);
      fv[order[k]] = eval(v);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = simplex[best];
  res.f = fv[best];
  return res;
}

}  // namespace potwell::optim
