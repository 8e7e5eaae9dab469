#pragma once

#include <span>
#include <vector>

namespace potwell {

inline constexpr int kMinOrder = 1;
inline constexpr int kMaxOrder = 4;

/// Polynomial drift with price-proportional diffusion:
///
///   dP = (a1 P + a2 P^2 + ... + aq P^q) dt + sigma P dW
///
/// The drift is minus the derivative of the potential
///
///   V(P) = -sum_i a_i / (i + 1) P^(i + 1),  V(0) = 0.
///
/// The flat parameter vector is phi = (sigma^2, a1, ..., aq).
class DriftModel {
 public:
  /// Throws std::invalid_argument if the order is outside 1..4 or
  /// sigma2 is negative or non-finite. sigma2 == 0 is accepted so that
  /// noiseless trajectories can be simulated; the likelihood rejects it.
  DriftModel(std::vector<double> alpha, double sigma2);

  static DriftModel from_phi(std::span<const double> phi);

  int order() const noexcept { return static_cast<int>(alpha_.size()); }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  double sigma2() const noexcept { return sigma2_; }
  double sigma() const;
  std::vector<double> phi() const;

  double drift(double price) const noexcept;
  double drift_derivative(double price) const noexcept;
  double potential(double price) const noexcept;

 private:
  std::vector<double> alpha_;
  double sigma2_;
};

double drift_eval(const DriftModel& model, double price) noexcept;
double potential_eval(const DriftModel& model, double price) noexcept;

/// Potential of an arbitrary coefficient vector; used on posterior draws
/// where building a DriftModel per point would be wasteful.
double potential_of(std::span<const double> alpha, double price) noexcept;

enum class Stability { Stable, Unstable, Marginal };

const char* to_string(Stability s) noexcept;

struct FixedPoint {
  double location;
  Stability stability;
};

struct PriceRange {
  double lo;
  double hi;
};

/// Real roots of the drift inside `range`, sorted, with P = 0 always
/// present. Roots are bracketed on a 2048-point grid and refined by
/// bisection, so tangential (even multiplicity) roots away from zero are
/// not reported. Throws std::invalid_argument for an empty range.
std::vector<FixedPoint> fixed_points(const DriftModel& model, PriceRange range);

/// [0, 2 * max_price].
PriceRange default_search_range(std::span<const double> prices);

}  // namespace potwell
