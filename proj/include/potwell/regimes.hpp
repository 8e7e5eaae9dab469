#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "potwell/inference.hpp"
#include "potwell/mcmc.hpp"
#include "potwell/series.hpp"

namespace potwell {

enum class Regime { StableFP, Growth, Stagnation, Decline, Noise };

const char* to_string(Regime r) noexcept;

/// Where the 68% band sits relative to V = 0 over the evaluation region
/// (grid points above the smallest observed price).
struct BandSummary {
  std::size_t evaluated_points = 0;
  double above_fraction = 0.0;  // lo68 > 0
  double below_fraction = 0.0;  // hi68 < 0
};

struct RegimeLabel {
  WindowTag tag;
  Regime label = Regime::Noise;
  int q = 0;
  BandSummary band;
  std::optional<double> well_price;  // stable positive fixed point of the MLE drift
};

struct ClassifyOptions {
  /// The band "excludes zero" when it does so on at least this fraction of
  /// the evaluation region.
  double exclusion_fraction = 0.9;
};

struct WindowContext {
  WindowTag tag;
  double min_price = 0.0;
  double max_price = 0.0;
};

/// q = 2 -> StableFP, q in {3, 4} -> Noise. For q = 1 the band decides:
/// entirely above zero -> Decline (the potential rises with price, so the
/// force points down), entirely below -> Growth, otherwise Stagnation.
RegimeLabel classify_window(const ModelSelection& selection, const PotentialBand& band,
                            const WindowContext& context, const ClassifyOptions& options = {});

struct TrackEntry {
  WindowTag tag;
  std::optional<RegimeLabel> label;
  std::string skip_reason;  // set when label is empty

  bool skipped() const noexcept { return !label.has_value(); }
};

struct TrackConfig {
  WindowMode mode = WindowMode::Monthly;
  int q_max = kMaxOrder;
  FitOptions fit;
  SamplerConfig sampler;
  ClassifyOptions classify;
  std::size_t grid_points = 200;
};

/// Full per-window pipeline: select_order -> sample_posterior ->
/// potential_band -> classify_window. Failing windows and months with
/// fewer than two observations become skipped entries, so every month of
/// the input appears exactly once, in calendar order.
std::vector<TrackEntry> regime_track(const DatedSeries& data, const TrackConfig& config = {});

using ConfusionMatrix = std::array<std::array<long, kMaxOrder>, kMaxOrder>;

/// Entry (i, j) counts windows with order i + 1 under `a` and j + 1 under
/// `b`. Throws LengthMismatch for lists of different length.
ConfusionMatrix order_confusion(const std::vector<ModelSelection>& a,
                                const std::vector<ModelSelection>& b);

}  // namespace potwell
