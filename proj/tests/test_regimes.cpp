#include <doctest.h>

#include <chrono>
#include <set>

#include "potwell/error.hpp"
#include "potwell/regimes.hpp"
#include "support.hpp"

using namespace potwell;
using namespace std::chrono;

namespace {

ModelSelection chosen(int q, std::vector<double> phi = {}) {
  ModelSelection s;
  s.chosen = q;
  if (!phi.empty()) {
    FitResult f;
    f.q = q;
    f.phi = std::move(phi);
    s.fits.push_back(f);
  }
  return s;
}

// Band on grid 1..10 whose 68% interval is [centre - 1, centre + 1] pointwise.
PotentialBand band_around(std::vector<double> centre) {
  PotentialBand b;
  for (std::size_t g = 0; g < centre.size(); ++g) {
    b.grid.push_back(static_cast<double>(g + 1));
    b.v_mle.push_back(centre[g]);
    b.lo68.push_back(centre[g] - 1.0);
    b.hi68.push_back(centre[g] + 1.0);
    b.lo95.push_back(centre[g] - 2.0);
    b.hi95.push_back(centre[g] + 2.0);
  }
  return b;
}

const WindowContext ctx{{2020, 3}, 0.5, 10.0};

Timestamp hour(int y, unsigned m, unsigned d, int h) {
  return time_point_cast<milliseconds>(sys_days{year{y} / month{m} / day{d}} + hours{h});
}

}  // namespace

TEST_CASE("order decides the fixed-point and noise regimes") {
  const auto flat = band_around(std::vector<double>(10, 0.0));
  CHECK(classify_window(chosen(2), flat, ctx).label == Regime::StableFP);
  CHECK(classify_window(chosen(3), flat, ctx).label == Regime::Noise);
  CHECK(classify_window(chosen(4), flat, ctx).label == Regime::Noise);
  CHECK_THROWS_AS(classify_window(chosen(0), flat, ctx), OrderOutOfRange);
  CHECK_THROWS_AS(classify_window(chosen(5), flat, ctx), OrderOutOfRange);

  const auto well = classify_window(chosen(2, {0.0004, 0.5, -0.005}), flat, {{2020, 3}, 90.0, 110.0});
  REQUIRE(well.well_price);
  CHECK(*well.well_price == doctest::Approx(100.0).epsilon(1e-8));
  CHECK(well.tag == WindowTag{2020, 3});
}

TEST_CASE("linear drift is labelled by the band sign") {
  CHECK(classify_window(chosen(1), band_around(std::vector<double>(10, 5.0)), ctx).label == Regime::Decline);
  CHECK(classify_window(chosen(1), band_around(std::vector<double>(10, -5.0)), ctx).label == Regime::Growth);
  CHECK(classify_window(chosen(1), band_around(std::vector<double>(10, 0.5)), ctx).label == Regime::Stagnation);

  SUBCASE("exclusion fraction") {
    // Nine of ten evaluated points exclude zero from below.
    std::vector<double> c(10, -5.0);
    c[9] = 0.0;
    const auto b = band_around(c);
    const auto lbl = classify_window(chosen(1), b, ctx);
    CHECK(lbl.band.evaluated_points == 10);
    CHECK(lbl.band.below_fraction == doctest::Approx(0.9));
    CHECK(lbl.label == Regime::Growth);
    CHECK(classify_window(chosen(1), b, ctx, {.exclusion_fraction = 1.0}).label == Regime::Stagnation);
    c[8] = 0.0;
    CHECK(classify_window(chosen(1), band_around(c), ctx).label == Regime::Stagnation);
  }
  SUBCASE("grid points at or below the smallest price are ignored") {
    std::vector<double> c(10, -5.0);
    c[0] = c[1] = c[2] = 0.0;
    const auto lbl = classify_window(chosen(1), band_around(c), {{2020, 3}, 3.0, 10.0});
    CHECK(lbl.band.evaluated_points == 7);
    CHECK(lbl.label == Regime::Growth);
  }
  SUBCASE("no evaluated points") {
    const auto lbl = classify_window(chosen(1), band_around(std::vector<double>(10, -5.0)), {{}, 20.0, 30.0});
    CHECK(lbl.band.evaluated_points == 0);
    CHECK(lbl.label == Regime::Stagnation);
  }
}

TEST_CASE("labels partition the windows") {
  std::set<Regime> seen;
  for (int q = 1; q <= 4; ++q)
    for (double level : {-5.0, 0.0, 5.0}) {
      const auto lbl = classify_window(chosen(q), band_around(std::vector<double>(10, level)), ctx);
      seen.insert(lbl.label);
      CHECK(lbl.q == q);
    }
  CHECK(seen.size() == 5);
}

TEST_CASE("order confusion") {
  std::vector<ModelSelection> a, b;
  const std::vector<std::pair<int, int>> pairs{{1, 1}, {2, 2}, {2, 3}, {4, 1}, {2, 2}, {3, 3}};
  for (auto [x, y] : pairs) {
    a.push_back(chosen(x));
    b.push_back(chosen(y));
  }
  const auto m = order_confusion(a, b);
  long total = 0;
  for (const auto& row : m)
    for (long v : row) total += v;
  CHECK(total == static_cast<long>(pairs.size()));
  CHECK(m[1][1] == 2);
  CHECK(m[1][2] == 1);
  CHECK(m[3][0] == 1);

  const auto self = order_confusion(a, a);
  long diag = 0;
  for (std::size_t i = 0; i < 4; ++i) diag += self[i][i];
  CHECK(diag == static_cast<long>(a.size()));

  const auto transposed = order_confusion(b, a);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(transposed[i][j] == m[j][i]);

  b.pop_back();
  CHECK_THROWS_AS(order_confusion(a, b), LengthMismatch);
  CHECK(order_confusion({}, {}) == ConfusionMatrix{});
}

TEST_CASE("regime track") {
  TrackConfig cfg;
  cfg.sampler.steps = 1500;
  cfg.sampler.burn_in = 300;
  cfg.fit.restarts = 2;

  SUBCASE("constant prices are skipped month by month") {
    DatedSeries d{Series::unit_spaced(std::vector<double>(60, 4.0)), {}};
    for (int i = 0; i < 60; ++i) d.calendar.push_back(i < 30 ? hour(2021, 1, 1, i) : hour(2021, 2, 1, i - 30));
    const auto track = regime_track(d, cfg);
    REQUIRE(track.size() == 2);
    for (const auto& e : track) {
      CHECK(e.skipped());
      CHECK_FALSE(e.skip_reason.empty());
    }
  }
  SUBCASE("a well month followed by a growth month") {
    const auto well = testing::euler_path(DriftModel({0.5, -0.005}, 0.0004), 100.0, 1.0, 600, 4);
    const auto up = testing::euler_path(DriftModel({0.001}, 1e-5), well.values().back(), 1.0, 600, 9);
    std::vector<double> v = well.values();
    v.insert(v.end(), up.values().begin(), up.values().end());
    DatedSeries d{Series::unit_spaced(v), {}};
    for (int i = 0; i < 600; ++i) d.calendar.push_back(hour(2019, 5, 1, i));
    for (int i = 0; i < 600; ++i) d.calendar.push_back(hour(2019, 6, 1, i));
    // One lone observation in July cannot form a window.
    d.series = Series::unit_spaced([&] { auto w = v; w.push_back(v.back()); return w; }());
    d.calendar.push_back(hour(2019, 7, 3, 0));

    const auto track = regime_track(d, cfg);
    REQUIRE(track.size() == 3);
    CHECK(track[0].tag == WindowTag{2019, 5});
    CHECK(track[1].tag == WindowTag{2019, 6});
    CHECK(track[2].tag == WindowTag{2019, 7});
    REQUIRE_FALSE(track[0].skipped());
    REQUIRE_FALSE(track[1].skipped());
    CHECK(track[2].skipped());
    CHECK(track[0].label->q == 2);
    CHECK(track[0].label->label == Regime::StableFP);
    REQUIRE(track[0].label->well_price);
    CHECK(*track[0].label->well_price == doctest::Approx(100.0).epsilon(0.05));
    CHECK(track[1].label->q == 1);
    CHECK(track[1].label->label == Regime::Growth);

    SUBCASE("whole-series mode gives one entry") {
      cfg.mode = WindowMode::WholeSeries;
      const auto whole = regime_track(d, cfg);
      REQUIRE(whole.size() == 1);
      CHECK(whole[0].tag == WindowTag{2019, 5});
    }
  }
  SUBCASE("monthly mode needs dates") {
    const DatedSeries d{Series::unit_spaced({1.0, 1.1, 1.2}), {}};
    CHECK_THROWS_AS(regime_track(d, cfg), ConfigError);
  }
}
