#include "potwell/regimes.hpp"

#include <algorithm>

#include "potwell/error.hpp"

namespace potwell {

const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::StableFP: return "StableFP";
    case Regime::Growth: return "Growth";
    case Regime::Stagnation: return "Stagnation";
    case Regime::Decline: return "Decline";
    case Regime::Noise: return "Noise";
  }
  return "?";
}

RegimeLabel classify_window(const ModelSelection& selection, const PotentialBand& band,
                            const WindowContext& context, const ClassifyOptions& options) {
  const int q = selection.chosen;
  if (q < kMinOrder || q > kMaxOrder) throw OrderOutOfRange(q);

  RegimeLabel out;
  out.tag = context.tag;
  out.q = q;

  std::size_t above = 0, below = 0, evaluated = 0;
  for (std::size_t g = 0; g < band.size(); ++g) {
    if (!(band.grid[g] > context.min_price)) continue;
    ++evaluated;
    if (band.lo68[g] > 0.0) ++above;
    if (band.hi68[g] < 0.0) ++below;
  }
  out.band.evaluated_points = evaluated;
  if (evaluated > 0) {
    out.band.above_fraction = static_cast<double>(above) / static_cast<double>(evaluated);
    out.band.below_fraction = static_cast<double>(below) / static_cast<double>(evaluated);
  }

  switch (q) {
    case 1:
      if (evaluated > 0 && out.band.above_fraction >= options.exclusion_fraction)
        out.label = Regime::Decline;
      else if (evaluated > 0 && out.band.below_fraction >= options.exclusion_fraction)
        out.label = Regime::Growth;
      else
        out.label = Regime::Stagnation;
      break;
    case 2: {
      out.label = Regime::StableFP;
      if (const auto* fit = selection.fit_for(2)) {
        const double hi = context.max_price > 0.0 ? 2.0 * context.max_price : 1.0;
        for (const auto& fp : fixed_points(fit->model(), {0.0, hi}))
          if (fp.location > 0.0 && fp.stability == Stability::Stable) {
            out.well_price = fp.location;
            break;
          }
      }
      break;
    }
    default:
      out.label = Regime::Noise;
      break;
  }
  return out;
}

std::vector<TrackEntry> regime_track(const DatedSeries& data, const TrackConfig& config) {
  const auto windows = make_windows(data, config.mode);

  std::vector<TrackEntry> out;
  for (const auto& w : windows) {
    TrackEntry entry{w.tag, std::nullopt, {}};
    try {
      const auto selection = select_order(w.series, config.q_max, config.fit);
      const auto& mle = selection.best();
      const auto ensemble = sample_posterior(w.series, mle, config.sampler);
      const auto grid = default_band_grid(w.series, config.grid_points);
      const auto band = potential_band(ensemble, grid, mle);
      const auto [lo, hi] = std::minmax_element(w.series.values().begin(), w.series.values().end());
      entry.label = classify_window(selection, band, {w.tag, *lo, *hi}, config.classify);
    } catch (const std::exception& e) {
      entry.skip_reason = e.what();
    }
    out.push_back(std::move(entry));
  }

  // Months too short to form a window still get a marker.
  if (config.mode == WindowMode::Monthly) {
    std::vector<TrackEntry> full;
    std::size_t next = 0;
    for (const auto& tag : months_present(data.calendar)) {
      if (next < out.size() && out[next].tag == tag) {
        full.push_back(std::move(out[next++]));
      } else {
        full.push_back({tag, std::nullopt, "fewer than two observations in month"});
      }
    }
    out = std::move(full);
  }
  return out;
}

ConfusionMatrix order_confusion(const std::vector<ModelSelection>& a,
                                const std::vector<ModelSelection>& b) {
  if (a.size() != b.size())
    throw LengthMismatch("order_confusion needs window-aligned lists of equal length");
  ConfusionMatrix m{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int qa = a[i].chosen, qb = b[i].chosen;
    if (qa < kMinOrder || qa > kMaxOrder) throw OrderOutOfRange(qa);
    if (qb < kMinOrder || qb > kMaxOrder) throw OrderOutOfRange(qb);
    ++m[static_cast<std::size_t>(qa - 1)][static_cast<std::size_t>(qb - 1)];
  }
  return m;
}

}  // namespace potwell
