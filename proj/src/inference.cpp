#include "potwell/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "potwell/error.hpp"
#include "potwell/nelder_mead.hpp"
#include "potwell/rng.hpp"

namespace potwell {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

void check_order(int q) {
  if (q < kMinOrder || q > kMaxOrder) throw OrderOutOfRange(q);
}

}  // namespace

double step_loglik(const DriftModel& model, double s_n, double t_n, double s_next, double t_next) {
  if (!(t_next > t_n)) throw std::invalid_argument("step_loglik needs t_next > t_n");
  const double dt = t_next - t_n;
  const double mean = s_n + model.drift(s_n) * dt;
  const double sd = model.sigma() * s_n;
  const double var = sd * sd * dt;
  if (!(var > 0.0) || !std::isfinite(var))
    throw DegenerateState("propagator variance vanishes at s_n = " + std::to_string(s_n));
  const double r = s_next - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - r * r / (2.0 * var);
}

double total_loglik(const DriftModel& model, const Series& series) {
  const auto& t = series.times();
  const auto& s = series.values();
  double sum = 0.0;
  for (std::size_t n = 0; n + 1 < s.size(); ++n) {
    try {
      sum += step_loglik(model, s[n], t[n], s[n + 1], t[n + 1]);
    } catch (const DegenerateState& e) {
      throw DegenerateState(e.what(), n);
    }
  }
  return sum;
}

// --- TransitionSet --------------------------------------------------------

TransitionSet::TransitionSet(const Series& series) {
  const auto& t = series.times();
  const auto& v = series.values();
  const std::size_t n = v.size() - 1;
  s_.resize(n);
  dt_.resize(n);
  ds_.resize(n);
  var_unit_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s_[i] = v[i];
    dt_[i] = t[i + 1] - t[i];
    ds_[i] = v[i + 1] - v[i];
    var_unit_[i] = v[i] * v[i] * dt_[i];
    if (!(var_unit_[i] > 0.0) || !std::isfinite(var_unit_[i]))
      throw DegenerateState("zero or underflowing price", i);
    log_norm_sum_ += kLog2Pi + std::log(var_unit_[i]);
  }
}

double TransitionSet::loglik(std::span<const double> phi) const noexcept {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const double sigma2 = phi[0];
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return kNegInf;
  const auto alpha = phi.subspan(1);
  double sq = 0.0;
  for (std::size_t i = 0; i < s_.size(); ++i) {
    const double s = s_[i];
    double acc = 0.0;
    for (std::size_t k = alpha.size(); k-- > 0;) acc = acc * s + alpha[k];
    const double r = ds_[i] - acc * s * dt_[i];
    sq += r * r / var_unit_[i];
  }
  const double n = static_cast<double>(s_.size());
  const double ll = -0.5 * (n * std::log(sigma2) + log_norm_sum_) - 0.5 * sq / sigma2;
  return std::isnan(ll) ? kNegInf : ll;
}

// --- fitting --------------------------------------------------------------

double akaike(double log_likelihood, int q) noexcept {
  return -2.0 * log_likelihood + 2.0 * (q + 1);
}

namespace {

// Affine map between Nelder-Mead coordinates u and phi. The alpha block is
// whitened with the Fisher information of the drift coefficients,
// sum dt x_i x_j / s^2, evaluated in price units scaled by the mean price;
// log sigma^2 is scaled by its asymptotic standard error sqrt(2 / n).
// The start point u = 0 is the moment-matched estimate.
class Reparam {
 public:
  Reparam(const TransitionSet& ts, int q) : q_(q) {
    const auto s = ts.start();
    const auto dt = ts.dt();
    const auto ds = ts.increment();
    const auto n = static_cast<Eigen::Index>(ts.size());

    double scale = 0.0;
    for (double v : s) scale += std::abs(v);
    scale_ = scale / static_cast<double>(n);

    // beta_i = alpha_i * scale^(i-1); the drift is sum beta_i x_i(s) with
    // x_i(s) = scale * (s / scale)^i.
    Eigen::MatrixXd x(n, q);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double u = s[r] / scale_;
      double p = scale_;
      for (int i = 0; i < q; ++i) {
        p *= u;
        x(r, i) = p;
      }
      y(r) = ds[r] / dt[r];
    }
    beta0_ = x.colPivHouseholderQr().solve(y);
    if (!beta0_.allFinite()) beta0_.setZero();

    double mean = 0.0, m2 = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double z = ds[r] / (s[r] * std::sqrt(dt[r]));
      const double d = z - mean;
      mean += d / static_cast<double>(r + 1);
      m2 += d * (z - mean);
    }
    const double var0 = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    if (!(var0 > 0.0) || !std::isfinite(var0))
      throw DegenerateState("series has no variation; the diffusion estimate collapses to zero");
    log_var0_ = std::log(var0);
    log_var_scale_ = std::sqrt(2.0 / static_cast<double>(n));

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(q, q);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double w = dt[r] / (s[r] * s[r]);
      gram.noalias() += w * x.row(r).transpose() * x.row(r);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double floor = std::max(lambda.maxCoeff(), 1e-300) * 1e-14;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      lambda(i) = 1.0 / std::sqrt(std::max(lambda(i), floor));
    whiten_ = std::sqrt(var0) * eig.eigenvectors() * lambda.asDiagonal();
  }

  int dim() const { return q_ + 1; }

  void to_phi(std::span<const double> u, std::vector<double>& phi) const {
    phi.resize(static_cast<std::size_t>(q_) + 1);
    phi[0] = std::exp(log_var0_ + log_var_scale_ * u[0]);
    const Eigen::Map<const Eigen::VectorXd> ua(u.data() + 1, q_);
    const Eigen::VectorXd beta = beta0_ + whiten_ * ua;
    double pow = 1.0;
    for (int i = 0; i < q_; ++i) {
      phi[static_cast<std::size_t>(i) + 1] = beta(i) / pow;
      pow *= scale_;
    }
  }

 private:
  int q_;
  double scale_ = 1.0;
  double log_var0_ = 0.0;
  double log_var_scale_ = 1.0;
  Eigen::VectorXd beta0_;
  Eigen::MatrixXd whiten_;
};

}  // namespace

FitResult fit_mle(const Series& series, int q, const FitOptions& options) {
  check_order(q);
  if (series.size() < static_cast<std::size_t>(q) + 2)
    throw std::invalid_argument("series of length " + std::to_string(series.size()) +
                                " is too short for order " + std::to_string(q));
  const auto& values = series.values();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(values[i] > 0.0)) throw DegenerateState("non-positive price at index " + std::to_string(i));

  const TransitionSet ts(series);
  const Reparam map(ts, q);
  const auto dim = static_cast<std::size_t>(map.dim());

  std::vector<double> phi_buf;
  auto objective = [&](std::span<const double> u) {
    map.to_phi(u, phi_buf);
    return -ts.loglik(phi_buf);
  };

  optim::NelderMeadOptions nm;
  nm.ftol = options.ftol;
  nm.max_iterations = 50 * (q + 1) * (q + 1);
  const std::vector<double> unit_step(dim, 1.0);

  auto best = optim::nelder_mead(objective, std::vector<double>(dim, 0.0), unit_step, nm);
  int iterations = best.iterations;

  Engine rng = make_engine(options.seed, {static_cast<std::uint64_t>(q)});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<double> start = best.x;
    for (auto& v : start) v += normal(rng);
    auto run = optim::nelder_mead(objective, start, unit_step, nm);
    iterations += run.iterations;
    if (run.f < best.f || (run.f == best.f && run.converged && !best.converged))
      best = std::move(run);
  }
  // A final small-simplex restart at the incumbent guards against a
  // collapsed simplex that stopped short of the optimum.
  {
    const std::vector<double> small_step(dim, 1e-2);
    auto run = optim::nelder_mead(objective, best.x, small_step, nm);
    iterations += run.iterations;
    if (run.f <= best.f) {
      best = std::move(run);
    }
  }

  if (!std::isfinite(best.f)) throw OptimizerFailure("no finite-likelihood point found");

  FitResult out;
  out.q = q;
  map.to_phi(best.x, out.phi);
  if (!(out.phi[0] > 0.0) || !std::isfinite(out.phi[0]))
    throw DegenerateState("fitted diffusion collapsed to zero");
  out.log_likelihood = total_loglik(out.model(), series);
  out.aic = akaike(out.log_likelihood, q);
  out.iterations = iterations;
  out.converged = best.converged;
  return out;
}

// --- model selection ------------------------------------------------------

std::size_t argmin_aic(std::span<const FitResult> fits) {
  if (fits.empty()) throw std::invalid_argument("argmin_aic of an empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i)
    if (fits[i].aic < fits[best].aic) best = i;
  return best;
}

const FitResult& ModelSelection::best() const {
  const auto* fit = fit_for(chosen);
  if (!fit) throw std::logic_error("model selection has no fit for the chosen order");
  return *fit;
}

const FitResult* ModelSelection::fit_for(int q) const {
  for (const auto& f : fits)
    if (f.q == q) return &f;
  return nullptr;
}

ModelSelection select_order(const Series& series, int q_max, const FitOptions& options) {
  check_order(q_max);
  ModelSelection out;
  for (int q = kMinOrder; q <= q_max; ++q) {
    try {
      out.fits.push_back(fit_mle(series, q, options));
    } catch (const Error& e) {
      out.failures.push_back({q, e.what()});
    } catch (const std::invalid_argument& e) {
      out.failures.push_back({q, e.what()});
    }
  }
  if (out.fits.empty()) {
    std::string reasons;
    for (const auto& f : out.failures) reasons += " q=" + std::to_string(f.q) + ": " + f.reason + ";";
    throw SelectionFailure("every order failed:" + reasons);
  }
  out.chosen = out.fits[argmin_aic(out.fits)].q;
  return out;
}

}  // namespace potwell
