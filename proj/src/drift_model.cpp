#include "potwell/drift_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace potwell {

namespace {

constexpr int kScanPoints = 2048;
constexpr double kBisectionTol = 1e-10;
constexpr double kMarginalSlope = 1e-10;

Stability classify_slope(double slope) {
  if (std::abs(slope) < kMarginalSlope) return Stability::Marginal;
  return slope < 0.0 ? Stability::Stable : Stability::Unstable;
}

}  // namespace

DriftModel::DriftModel(std::vector<double> alpha, double sigma2)
    : alpha_(std::move(alpha)), sigma2_(sigma2) {
  if (order() < kMinOrder || order() > kMaxOrder)
    throw std::invalid_argument("drift order must be in 1..4, got " +
                                std::to_string(order()));
  if (!std::isfinite(sigma2_) || sigma2_ < 0.0)
    throw std::invalid_argument("sigma^2 must be finite and non-negative");
  for (double a : alpha_)
    if (!std::isfinite(a)) throw std::invalid_argument("non-finite drift coefficient");
}

DriftModel DriftModel::from_phi(std::span<const double> phi) {
  if (phi.size() < 2) throw std::invalid_argument("phi needs sigma^2 and at least one alpha");
  return DriftModel(std::vector<double>(phi.begin() + 1, phi.end()), phi[0]);
}

double DriftModel::sigma() const { return std::sqrt(sigma2_); }

std::vector<double> DriftModel::phi() const {
  std::vector<double> out;
  out.reserve(alpha_.size() + 1);
  out.push_back(sigma2_);
  out.insert(out.end(), alpha_.begin(), alpha_.end());
  return out;
}

double DriftModel::drift(double price) const noexcept {
  // Horner on P * (a1 + a2 P + ...).
  double acc = 0.0;
  for (auto it = alpha_.rbegin(); it != alpha_.rend(); ++it) acc = acc * price + *it;
  return acc * price;
}

double DriftModel::drift_derivative(double price) const noexcept {
  double acc = 0.0;
  for (int i = order(); i >= 1; --i) acc = acc * price + i * alpha_[i - 1];
  return acc;
}

double DriftModel::potential(double price) const noexcept { return potential_of(alpha_, price); }

double potential_of(std::span<const double> alpha, double price) noexcept {
  double acc = 0.0;
  for (std::size_t k = alpha.size(); k-- > 0;)
    acc = acc * price + alpha[k] / static_cast<double>(k + 2);
  return -acc * price * price;
}

double drift_eval(const DriftModel& model, double price) noexcept { return model.drift(price); }

double potential_eval(const DriftModel& model, double price) noexcept {
  return model.potential(price);
}

const char* to_string(Stability s) noexcept {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Marginal: return "marginal";
  }
  return "?";
}

std::vector<FixedPoint> fixed_points(const DriftModel& model, PriceRange range) {
  if (!(range.hi > range.lo) || !std::isfinite(range.lo) || !std::isfinite(range.hi))
    throw std::invalid_argument("fixed point search range must have positive width");

  // Identically zero drift: every price is a root, report the origin only.
  if (std::all_of(model.alpha().begin(), model.alpha().end(), [](double a) { return a == 0.0; }))
    return {{0.0, Stability::Marginal}};

  const double width = range.hi - range.lo;
  const double dedup = 1e-8 * std::max(1.0, width);
  std::vector<double> roots{0.0};

  const auto f = [&](double p) { return model.drift(p); };
  double x_prev = range.lo;
  double f_prev = f(x_prev);
  if (f_prev == 0.0) roots.push_back(x_prev);
  for (int k = 1; k < kScanPoints; ++k) {
    const double x = (k == kScanPoints - 1)
                         ? range.hi
                         : range.lo + width * static_cast<double>(k) / (kScanPoints - 1);
    const double fx = f(x);
    if (fx == 0.0) {
      roots.push_back(x);
    } else if (f_prev != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
      double lo = x_prev, hi = x, f_lo = f_prev;
      while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid == 0.0) {
          lo = hi = mid;
          break;
        }
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
          lo = mid;
          f_lo = f_mid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x_prev = x;
    f_prev = fx;
  }

  std::sort(roots.begin(), roots.end());
  std::vector<FixedPoint> out;
  for (double r : roots) {
    if (!out.empty() && r - out.back().location <= dedup) {
      // Keep the exact zero when bisection lands next to it.
      if (r == 0.0) out.back().location = 0.0;
      continue;
    }
    out.push_back({r, Stability::Marginal});
  }
  for (auto& fp : out) fp.stability = classify_slope(model.drift_derivative(fp.location));
  return out;
}

PriceRange default_search_range(std::span<const double> prices) {
  double hi = 0.0;
  for (double p : prices) hi = std::max(hi, p);
  return {0.0, hi > 0.0 ? 2.0 * hi : 1.0};
}

}  // namespace potwell
