#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "potwell/inference.hpp"
#include "potwell/series.hpp"

namespace potwell {

struct SamplerConfig {
  int walkers = 0;  // 0 selects max(32, 4 * dim)
  int steps = 5000;
  int burn_in = 1000;
  int thin = 5;
  double stretch = 2.0;
  std::uint64_t seed = 1;

  int walkers_for(int dim) const;
};

using LogDensity = std::function<double(std::span<const double>)>;

/// Goodman-Weare stretch move. Proposals are y + z (x - y) for a walker x
/// and a partner y from the complementary half-ensemble, with
/// z ~ g(z) ~ 1/sqrt(z) on [1/a, a].
class StretchMove {
 public:
  /// Throws std::invalid_argument unless a > 1.
  explicit StretchMove(double a);

  double scale() const noexcept { return a_; }

  /// Inverse CDF of g at u in [0, 1).
  double draw_z(double u) const noexcept;

  /// Log of the acceptance ratio for moving to a proposal with log
  /// density `log_proposal` from `log_current` in `dim` dimensions;
  /// -inf whenever the proposal is outside the support.
  static double log_acceptance(double z, int dim, double log_current, double log_proposal) noexcept;

 private:
  double a_;
};

/// Draws from a generic ensemble run, row-major: draw i occupies
/// values[i * dim, (i + 1) * dim).
struct ChainDraws {
  int dim = 0;
  std::vector<double> values;
  std::vector<int> walker;
  std::vector<int> step;
  double acceptance_fraction = 0.0;  // over post-burn-in steps

  std::size_t size() const noexcept { return walker.size(); }
  std::span<const double> draw(std::size_t i) const {
    return std::span<const double>(values).subspan(i * static_cast<std::size_t>(dim),
                                                   static_cast<std::size_t>(dim));
  }
};

/// Runs the ensemble sampler from the given walker positions. Walker k at
/// step t draws its randomness from a stream keyed by (seed, k, t), so the
/// result is independent of how a half-ensemble update is scheduled.
/// Every initial walker must have finite log density.
ChainDraws run_ensemble_sampler(const LogDensity& log_density,
                                std::vector<std::vector<double>> initial_walkers,
                                const SamplerConfig& config);

struct PosteriorEnsemble {
  int q = 0;
  ChainDraws chain;  // coordinates are (sigma^2, alpha_1..alpha_q)
  int walkers = 0;
  int steps = 0;
  int burn_in = 0;
  int thin = 0;
  double stretch = 2.0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return chain.size(); }
  std::span<const double> draw(std::size_t i) const { return chain.draw(i); }
  double acceptance_fraction() const noexcept { return chain.acceptance_fraction; }
};

/// Samples exp(total_loglik) under a flat prior restricted to sigma^2 > 0,
/// with walkers started in a relative 1e-3 Gaussian ball around the MLE.
/// Throws ChainStuck if fewer than 2% of post-burn-in proposals are
/// accepted.
PosteriorEnsemble sample_posterior(const Series& series, const FitResult& mle,
                                   const SamplerConfig& config = {});
PosteriorEnsemble sample_posterior(const Series& series, int q, const SamplerConfig& config = {},
                                   const FitOptions& fit = {});

struct PotentialBand {
  std::vector<double> grid;
  std::vector<double> v_mle;
  std::vector<double> lo68, hi68;
  std::vector<double> lo95, hi95;

  std::size_t size() const noexcept { return grid.size(); }
};

/// Linear-interpolation percentile (p in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double p);

/// Pointwise [16, 84] and [2.5, 97.5] percentiles of the potential
/// ensemble, plus the potential of the MLE. V(0) = 0 for every curve.
PotentialBand potential_band(const PosteriorEnsemble& ensemble, std::span<const double> grid,
                             const FitResult& mle);

/// 200 points on [0.9 min, 1.1 max] of the observed values.
std::vector<double> default_band_grid(const Series& series, std::size_t points = 200);

struct CoordinateSummary {
  double mean = 0.0;
  double std = 0.0;
  std::optional<double> autocorr_time;  // sampler steps; empty when not estimable
};

struct Diagnostics {
  std::vector<CoordinateSummary> coordinates;
  int chain_length = 0;  // post-burn-in steps per walker
  std::optional<double> mle_outside_fraction;
  bool multimodal = false;
};

/// Per-coordinate moments and integrated autocorrelation times (walker-
/// averaged autocorrelation, Sokal window with c = 5). With a band, the
/// posterior is flagged multimodal when the MLE curve leaves the 68% band
/// on more than `threshold` of the grid.
Diagnostics diagnostics(const PosteriorEnsemble& ensemble, const PotentialBand* band = nullptr,
                        double threshold = 0.10);

/// Integrated autocorrelation time of one or more equally long chains, in
/// units of chain entries. Empty if the chains have zero variance.
std::optional<double> integrated_autocorr_time(const std::vector<std::vector<double>>& chains,
                                               double window_c = 5.0);

}  // namespace potwell
