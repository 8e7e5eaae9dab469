#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "potwell/drift_model.hpp"
#include "potwell/series.hpp"

namespace potwell {

/// Log-density of the Euler propagator N(m, v) at s_next with
/// m = s_n + drift(s_n) dt and v = (sigma s_n)^2 dt.
/// Throws DegenerateState if v is zero (s_n == 0, sigma == 0 or underflow)
/// and std::invalid_argument unless t_next > t_n.
double step_loglik(const DriftModel& model, double s_n, double t_n, double s_next, double t_next);

/// Sum of step_loglik over consecutive pairs. DegenerateState carries the
/// index of the failing transition.
double total_loglik(const DriftModel& model, const Series& series);

/// Transitions of a series with the parameter-independent parts of the
/// log-likelihood precomputed. This is the hot path for optimisation and
/// sampling; it never throws and returns -inf outside the support.
class TransitionSet {
 public:
  /// Throws DegenerateState if any s_n (n < size - 1) is zero.
  explicit TransitionSet(const Series& series);

  std::size_t size() const noexcept { return s_.size(); }
  std::span<const double> start() const noexcept { return s_; }
  std::span<const double> dt() const noexcept { return dt_; }
  std::span<const double> increment() const noexcept { return ds_; }

  /// phi = (sigma^2, alpha_1..alpha_q).
  double loglik(std::span<const double> phi) const noexcept;

 private:
  std::vector<double> s_, dt_, ds_, var_unit_;
  double log_norm_sum_ = 0.0;
};

struct FitOptions {
  int restarts = 5;
  double ftol = 1e-10;
  std::uint64_t seed = 0x5EEDF17ULL;
};

struct FitResult {
  int q = 0;
  std::vector<double> phi;  // (sigma^2, alpha_1..alpha_q)
  double log_likelihood = 0.0;
  double aic = 0.0;
  int iterations = 0;
  bool converged = false;

  DriftModel model() const { return DriftModel::from_phi(phi); }
  double sigma2() const { return phi.at(0); }
  std::span<const double> alpha() const { return std::span<const double>(phi).subspan(1); }
};

/// -2 L + 2 (q + 1).
double akaike(double log_likelihood, int q) noexcept;

/// Maximum-likelihood fit of the order-q model by Nelder-Mead on
/// (log sigma^2, alpha), started from a least-squares estimate and
/// refined by seeded random restarts. Throws OrderOutOfRange,
/// std::invalid_argument (series shorter than q + 2), DegenerateState
/// (non-positive prices, no variation) or OptimizerFailure.
FitResult fit_mle(const Series& series, int q, const FitOptions& options = {});

struct OrderFailure {
  int q;
  std::string reason;
};

struct ModelSelection {
  std::vector<FitResult> fits;  // ascending q, successful fits only
  std::vector<OrderFailure> failures;
  int chosen = 0;

  const FitResult& best() const;
  const FitResult* fit_for(int q) const;
};

/// Index of the minimal AIC; ties go to the earlier (smaller q) entry.
std::size_t argmin_aic(std::span<const FitResult> fits);

/// Fits q = 1..q_max and picks the minimal AIC. Orders that fail are
/// recorded in `failures`; SelectionFailure if all fail.
ModelSelection select_order(const Series& series, int q_max = kMaxOrder,
                            const FitOptions& options = {});

}  // namespace potwell
