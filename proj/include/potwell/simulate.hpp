#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "potwell/drift_model.hpp"
#include "potwell/rng.hpp"
#include "potwell/series.hpp"

namespace potwell {

/// Paths are rejected once a value leaves (collapse_bound, divergence_bound)
/// or becomes non-finite.
struct SimConfig {
  DriftModel model;
  double s0 = 1.0;
  std::vector<double> times;
  std::uint64_t seed = 0;
  double divergence_bound = 1e9;
  double collapse_bound = 1e-9;
};

struct Diverged {
  std::size_t step;  // index of the first rejected value
  double value;
};

using PathOutcome = std::variant<Series, Diverged>;

/// One Euler-Maruyama update: s + drift(s) dt + sigma s sqrt(dt) eps.
double euler_step(const DriftModel& model, double s, double dt, double eps) noexcept;

/// Throws std::invalid_argument if the config violates its invariants.
PathOutcome simulate_path(const SimConfig& config);

enum class GridStyle { Equidistant, Jittered };

/// Equidistant grids step by `dt`; jittered grids draw each step from
/// dt * U[0.5, 1.5].
std::vector<double> make_grid(std::size_t length, GridStyle style, Engine& rng, double dt = 1.0);

struct EnsembleOptions {
  double s0 = 1.0;
  double dt = 1.0;  // mean time step
  double divergence_bound = 1e9;
  double collapse_bound = 1e-9;
};

struct Ensemble {
  std::vector<Series> paths;
  std::vector<DriftModel> models;  // generating model of each path
  std::size_t attempts = 0;
  std::size_t rejections = 0;
};

/// `count` accepted paths of `length` points. Attempt k is seeded from
/// (seed, k), so results do not depend on how attempts are scheduled.
/// Throws TooManyRejections when 100 * count attempts do not suffice.
Ensemble simulate_ensemble(const DriftModel& model, std::size_t count, std::size_t length,
                           GridStyle grid, std::uint64_t seed, const EnsembleOptions& options = {});

/// alpha_i ~ N(0, 1) * 10^(1 - i), sigma ~ U(0.01, 0.3).
DriftModel random_model(int q, std::uint64_t seed);

/// Like simulate_ensemble, but every attempt draws a fresh random_model.
Ensemble simulate_random_ensemble(int q, std::size_t count, std::size_t length, GridStyle grid,
                                  std::uint64_t seed, const EnsembleOptions& options = {});

}  // namespace potwell
