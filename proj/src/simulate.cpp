#include "potwell/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "potwell/error.hpp"

namespace potwell {

namespace {

void validate(const SimConfig& c) {
  if (c.times.size() < 2) throw std::invalid_argument("time grid needs at least two points");
  for (std::size_t i = 1; i < c.times.size(); ++i)
    if (!(c.times[i] > c.times[i - 1]))
      throw std::invalid_argument("time grid must be strictly increasing");
  if (!(c.s0 > 0.0)) throw std::invalid_argument("initial value must be positive");
  if (!(c.divergence_bound > c.s0))
    throw std::invalid_argument("divergence bound must exceed the initial value");
  if (!(c.collapse_bound < c.s0))
    throw std::invalid_argument("collapse bound must lie below the initial value");
}

std::size_t attempt_limit(std::size_t count) { return 100 * count; }

}  // namespace

double euler_step(const DriftModel& model, double s, double dt, double eps) noexcept {
  return s + model.drift(s) * dt + model.sigma() * s * std::sqrt(dt) * eps;
}

PathOutcome simulate_path(const SimConfig& config) {
  validate(config);
  Engine rng = make_engine(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto& t = config.times;
  std::vector<double> values(t.size());
  values[0] = config.s0;
  for (std::size_t n = 0; n + 1 < t.size(); ++n) {
    const double next = euler_step(config.model, values[n], t[n + 1] - t[n], normal(rng));
    if (!std::isfinite(next) || std::abs(next) > config.divergence_bound ||
        next <= config.collapse_bound)
      return Diverged{n + 1, next};
    values[n + 1] = next;
  }
  return Series(t, std::move(values), {}, "synthetic");
}

std::vector<double> make_grid(std::size_t length, GridStyle style, Engine& rng, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive");
  std::vector<double> t(length);
  if (length == 0) return t;
  t[0] = 0.0;
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  for (std::size_t i = 1; i < length; ++i)
    t[i] = t[i - 1] + dt * (style == GridStyle::Jittered ? jitter(rng) : 1.0);
  return t;
}

namespace {

template <typename ModelFor>
Ensemble run_ensemble(std::size_t count, std::size_t length, GridStyle grid, std::uint64_t seed,
                      const EnsembleOptions& options, ModelFor&& model_for) {
  if (count < 1) throw std::invalid_argument("ensemble count must be at least 1");
  if (length < 2) throw std::invalid_argument("path length must be at least 2");

  Ensemble out;
  out.paths.reserve(count);
  while (out.paths.size() < count) {
    if (out.attempts >= attempt_limit(count))
      throw TooManyRejections("accepted " + std::to_string(out.paths.size()) + " of " +
                              std::to_string(count) + " paths after " +
                              std::to_string(out.attempts) + " attempts");
    const std::uint64_t k = out.attempts++;
    Engine grid_rng = make_engine(seed, {k, 0});
    SimConfig config{model_for(k), options.s0, make_grid(length, grid, grid_rng, options.dt),
                     derive_seed(seed, {k, 1}), options.divergence_bound, options.collapse_bound};
    auto outcome = simulate_path(config);
    if (auto* path = std::get_if<Series>(&outcome)) {
      out.paths.push_back(std::move(*path));
      out.models.push_back(config.model);
    } else {
      ++out.rejections;
    }
  }
  return out;
}

}  // namespace

Ensemble simulate_ensemble(const DriftModel& model, std::size_t count, std::size_t length,
                           GridStyle grid, std::uint64_t seed, const EnsembleOptions& options) {
  return run_ensemble(count, length, grid, seed, options, [&](std::uint64_t) { return model; });
}

DriftModel random_model(int q, std::uint64_t seed) {
  if (q < kMinOrder || q > kMaxOrder) throw OrderOutOfRange(q);
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> sigma(0.01, 0.3);
  std::vector<double> alpha(static_cast<std::size_t>(q));
  double scale = 1.0;
  for (auto& a : alpha) {
    a = normal(rng) * scale;
    scale *= 0.1;
  }
  const double s = sigma(rng);
  return DriftModel(std::move(alpha), s * s);
}

Ensemble simulate_random_ensemble(int q, std::size_t count, std::size_t length, GridStyle grid,
                                  std::uint64_t seed, const EnsembleOptions& options) {
  if (q < kMinOrder || q > kMaxOrder) throw OrderOutOfRange(q);
  return run_ensemble(count, length, grid, seed, options,
                      [&](std::uint64_t k) { return random_model(q, derive_seed(seed, {k, 2})); });
}

}  // namespace potwell
