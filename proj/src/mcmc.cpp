#include "potwell/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "potwell/error.hpp"
#include "potwell/rng.hpp"

namespace potwell {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

int SamplerConfig::walkers_for(int dim) const {
  return walkers > 0 ? walkers : std::max(32, 4 * dim);
}

// --- stretch move -----------------------------------------------------------

StretchMove::StretchMove(double a) : a_(a) {
  if (!(a > 1.0) || !std::isfinite(a))
    throw std::invalid_argument("stretch scale must exceed 1");
}

double StretchMove::draw_z(double u) const noexcept {
  const double r = (a_ - 1.0) * u + 1.0;
  return r * r / a_;
}

double StretchMove::log_acceptance(double z, int dim, double log_current,
                                   double log_proposal) noexcept {
  if (!std::isfinite(log_proposal)) return kNegInf;
  const double v = (dim - 1) * std::log(z) + log_proposal - log_current;
  return std::isnan(v) ? kNegInf : v;
}

ChainDraws run_ensemble_sampler(const LogDensity& log_density,
                                std::vector<std::vector<double>> walkers,
                                const SamplerConfig& config) {
  const int n_walkers = static_cast<int>(walkers.size());
  if (n_walkers < 2) throw std::invalid_argument("ensemble sampler needs at least two walkers");
  const int dim = static_cast<int>(walkers.front().size());
  if (dim < 1) throw std::invalid_argument("walkers must have at least one coordinate");
  for (const auto& w : walkers)
    if (static_cast<int>(w.size()) != dim) throw std::invalid_argument("walker dimensions differ");
  if (config.steps <= config.burn_in || config.burn_in < 0)
    throw std::invalid_argument("steps must exceed burn-in");
  if (config.thin < 1) throw std::invalid_argument("thinning must be at least 1");
  const StretchMove move(config.stretch);

  std::vector<double> logp(walkers.size());
  for (std::size_t k = 0; k < walkers.size(); ++k) {
    logp[k] = log_density(walkers[k]);
    if (!std::isfinite(logp[k]))
      throw std::invalid_argument("initial walker " + std::to_string(k) +
                                  " has non-finite log density");
  }

  ChainDraws out;
  out.dim = dim;
  const int kept_per_walker = (config.steps - config.burn_in) / config.thin;
  out.values.reserve(static_cast<std::size_t>(kept_per_walker) * n_walkers * dim);
  out.walker.reserve(static_cast<std::size_t>(kept_per_walker) * n_walkers);
  out.step.reserve(out.walker.capacity());

  const int half = n_walkers / 2;
  const int bounds[3] = {0, half, n_walkers};
  std::vector<double> proposal(static_cast<std::size_t>(dim));
  long long accepted = 0, proposed = 0;

  for (int t = 0; t < config.steps; ++t) {
    for (int h = 0; h < 2; ++h) {
      const int lo = bounds[h], hi = bounds[h + 1];
      const int c_lo = bounds[1 - h], c_size = bounds[2 - h] - bounds[1 - h];
      // Half h moves against the frozen complement: the complement is not
      // written during this loop, so its walkers may be read freely.
      for (int k = lo; k < hi; ++k) {
        SplitMix64 rng(derive_seed(config.seed, {static_cast<std::uint64_t>(k),
                                                 static_cast<std::uint64_t>(t)}));
        const int j = c_lo + std::min(c_size - 1, static_cast<int>(rng.uniform() * c_size));
        const double z = move.draw_z(rng.uniform());
        const auto& x = walkers[static_cast<std::size_t>(k)];
        const auto& y = walkers[static_cast<std::size_t>(j)];
        for (int d = 0; d < dim; ++d) proposal[d] = y[d] + z * (x[d] - y[d]);
        const double lp = log_density(proposal);
        const double log_acc = StretchMove::log_acceptance(z, dim, logp[k], lp);
        const bool accept = std::log(rng.uniform()) < log_acc;
        if (accept) {
          walkers[static_cast<std::size_t>(k)] = proposal;
          logp[k] = lp;
        }
        if (t >= config.burn_in) {
          ++proposed;
          accepted += accept ? 1 : 0;
        }
      }
    }
    if (t >= config.burn_in && (t - config.burn_in + 1) % config.thin == 0) {
      for (int k = 0; k < n_walkers; ++k) {
        const auto& w = walkers[static_cast<std::size_t>(k)];
        out.values.insert(out.values.end(), w.begin(), w.end());
        out.walker.push_back(k);
        out.step.push_back(t);
      }
    }
  }
  out.acceptance_fraction =
      proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  return out;
}

// --- posterior --------------------------------------------------------------

PosteriorEnsemble sample_posterior(const Series& series, const FitResult& mle,
                                   const SamplerConfig& config) {
  const int dim = mle.q + 1;
  const int n_walkers = config.walkers_for(dim);
  if (n_walkers < 2 * dim)
    throw std::invalid_argument("need at least 2(q+1) walkers, got " + std::to_string(n_walkers));
  if (static_cast<int>(mle.phi.size()) != dim) throw std::invalid_argument("malformed MLE vector");

  const TransitionSet ts(series);
  const LogDensity log_post = [&ts](std::span<const double> phi) {
    // Flat prior on (sigma^2, alpha) restricted to sigma^2 > 0.
    return phi[0] > 0.0 ? ts.loglik(phi) : kNegInf;
  };

  Engine rng = make_engine(config.seed, {0xBA11});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> init;
  init.reserve(static_cast<std::size_t>(n_walkers));
  int tries = 0;
  while (static_cast<int>(init.size()) < n_walkers) {
    if (++tries > 1000 * n_walkers)
      throw ChainStuck("could not place walkers with finite posterior density near the MLE");
    std::vector<double> w(mle.phi);
    for (auto& v : w) v += 1e-3 * std::max(std::abs(v), 1e-12) * normal(rng);
    if (std::isfinite(log_post(w))) init.push_back(std::move(w));
  }

  SamplerConfig cfg = config;
  cfg.walkers = n_walkers;
  PosteriorEnsemble out;
  out.q = mle.q;
  out.chain = run_ensemble_sampler(log_post, std::move(init), cfg);
  out.walkers = n_walkers;
  out.steps = cfg.steps;
  out.burn_in = cfg.burn_in;
  out.thin = cfg.thin;
  out.stretch = cfg.stretch;
  out.seed = cfg.seed;
  if (out.acceptance_fraction() < 0.02)
    throw ChainStuck("acceptance fraction " + std::to_string(out.acceptance_fraction()) +
                     " below 0.02");
  return out;
}

PosteriorEnsemble sample_posterior(const Series& series, int q, const SamplerConfig& config,
                                   const FitOptions& fit) {
  return sample_posterior(series, fit_mle(series, q, fit), config);
}

// --- bands ------------------------------------------------------------------

namespace {

double percentile_sorted(const std::vector<double>& values, double p) {
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

}  // namespace

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  return percentile_sorted(values, p);
}

PotentialBand potential_band(const PosteriorEnsemble& ensemble, std::span<const double> grid,
                             const FitResult& mle) {
  if (grid.empty()) throw std::invalid_argument("band grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("band grid must be sorted");
  if (ensemble.q != mle.q) throw std::invalid_argument("ensemble and MLE orders differ");
  if (ensemble.size() == 0) throw std::invalid_argument("empty posterior ensemble");

  PotentialBand band;
  band.grid.assign(grid.begin(), grid.end());
  const std::size_t m = grid.size();
  band.v_mle.resize(m);
  band.lo68.resize(m);
  band.hi68.resize(m);
  band.lo95.resize(m);
  band.hi95.resize(m);

  std::vector<double> v(ensemble.size());
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t j = 0; j < ensemble.size(); ++j)
      v[j] = potential_of(ensemble.draw(j).subspan(1), grid[g]);
    std::sort(v.begin(), v.end());
    band.lo95[g] = percentile_sorted(v, 0.025);
    band.lo68[g] = percentile_sorted(v, 0.16);
    band.hi68[g] = percentile_sorted(v, 0.84);
    band.hi95[g] = percentile_sorted(v, 0.975);
    band.v_mle[g] = potential_of(mle.alpha(), grid[g]);
    if (!(band.lo95[g] <= band.lo68[g] && band.lo68[g] <= band.hi68[g] &&
          band.hi68[g] <= band.hi95[g]))
      throw std::logic_error("credible bands are not nested");
  }
  return band;
}

std::vector<double> default_band_grid(const Series& series, std::size_t points) {
  const auto [lo_it, hi_it] = std::minmax_element(series.values().begin(), series.values().end());
  const double lo = 0.9 * *lo_it, hi = 1.1 * *hi_it;
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

// --- diagnostics ------------------------------------------------------------

namespace {

// Shifting by the first entry keeps a constant chain's mean exact.
double shifted_mean(const std::vector<double>& c) {
  double acc = 0.0;
  for (double x : c) acc += x - c.front();
  return c.front() + acc / static_cast<double>(c.size());
}

}  // namespace

std::optional<double> integrated_autocorr_time(const std::vector<std::vector<double>>& chains,
                                               double window_c) {
  if (chains.empty() || chains.front().size() < 2) return std::nullopt;
  const std::size_t len = chains.front().size();

  // Walker-averaged autocovariance, normalised by the lag-0 average.
  std::vector<std::vector<double>> centred;
  centred.reserve(chains.size());
  for (const auto& c : chains) {
    if (c.size() != len) throw std::invalid_argument("chains must have equal length");
    const double mean = shifted_mean(c);
    std::vector<double> d(len);
    for (std::size_t i = 0; i < len; ++i) d[i] = c[i] - mean;
    centred.push_back(std::move(d));
  }
  const auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (const auto& d : centred)
      for (std::size_t i = 0; i + lag < len; ++i) acc += d[i] * d[i + lag];
    return acc / static_cast<double>(len * centred.size());
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return std::nullopt;

  double tau = 1.0;
  for (std::size_t lag = 1; lag < len; ++lag) {
    tau += 2.0 * autocov(lag) / c0;
    if (static_cast<double>(lag) >= window_c * tau) return std::max(tau, 1.0);
  }
  return std::max(tau, 1.0);
}

Diagnostics diagnostics(const PosteriorEnsemble& ensemble, const PotentialBand* band,
                        double threshold) {
  if (ensemble.size() == 0) throw std::invalid_argument("diagnostics of an empty ensemble");
  const auto& chain = ensemble.chain;
  const int dim = chain.dim;
  Diagnostics out;
  out.chain_length = ensemble.steps - ensemble.burn_in;

  // Group draws per walker in step order; a draw matrix without walker
  // labels is treated as a single chain.
  int n_walkers = 1;
  for (int w : chain.walker) n_walkers = std::max(n_walkers, w + 1);
  std::vector<std::vector<std::size_t>> rows(static_cast<std::size_t>(n_walkers));
  for (std::size_t i = 0; i < chain.size(); ++i)
    rows[chain.walker.empty() ? 0 : static_cast<std::size_t>(chain.walker[i])].push_back(i);
  std::erase_if(rows, [](const auto& r) { return r.empty(); });
  std::size_t min_len = rows.front().size();
  for (const auto& r : rows) min_len = std::min(min_len, r.size());

  const double n = static_cast<double>(chain.size());
  for (int d = 0; d < dim; ++d) {
    CoordinateSummary s;
    double shift_sum = 0.0;
    const double k = chain.draw(0)[d];
    for (std::size_t i = 0; i < chain.size(); ++i) shift_sum += chain.draw(i)[d] - k;
    const double mean = k + shift_sum / n;
    double var = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const double e = chain.draw(i)[d] - mean;
      var += e * e;
    }
    s.mean = mean;
    s.std = chain.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;

    std::vector<std::vector<double>> per_walker;
    for (const auto& r : rows) {
      std::vector<double> c(min_len);
      for (std::size_t i = 0; i < min_len; ++i) c[i] = chain.draw(r[i])[d];
      per_walker.push_back(std::move(c));
    }
    if (s.std > 0.0) {
      if (auto tau = integrated_autocorr_time(per_walker))
        s.autocorr_time = *tau * std::max(1, ensemble.thin);
    }
    out.coordinates.push_back(s);
  }

  if (band && band->size() > 0) {
    std::size_t outside = 0;
    for (std::size_t g = 0; g < band->size(); ++g)
      if (band->v_mle[g] < band->lo68[g] || band->v_mle[g] > band->hi68[g]) ++outside;
    const double frac = static_cast<double>(outside) / static_cast<double>(band->size());
    out.mle_outside_fraction = frac;
    out.multimodal = frac > threshold;
  }
  return out;
}

}  // namespace potwell
