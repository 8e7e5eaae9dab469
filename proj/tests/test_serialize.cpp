#include <doctest.h>

#include <random>
#include <sstream>

#include "potwell/error.hpp"
#include "potwell/serialize.hpp"

using namespace potwell;

namespace {

double awkward(std::mt19937_64& rng) {
  // Mix of magnitudes so the shortest round-trip form is exercised.
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(-12, 12);
  return u(rng) * std::pow(10.0, e(rng));
}

FitResult random_fit(std::mt19937_64& rng, int q) {
  FitResult f;
  f.q = q;
  f.phi.push_back(std::abs(awkward(rng)));
  for (int i = 0; i < q; ++i) f.phi.push_back(awkward(rng));
  f.log_likelihood = awkward(rng);
  f.aic = akaike(f.log_likelihood, q);
  f.iterations = 317;
  f.converged = q % 2 == 0;
  return f;
}

}  // namespace

TEST_CASE("fit and selection JSON round-trip exactly") {
  std::mt19937_64 rng(1);
  for (int q = 1; q <= 4; ++q) {
    const auto f = random_fit(rng, q);
    const auto back = fit_from_json(Json::parse(to_json(f).dump()));
    CHECK(back.q == f.q);
    CHECK(back.phi == f.phi);
    CHECK(back.log_likelihood == f.log_likelihood);
    CHECK(back.aic == f.aic);
    CHECK(back.iterations == f.iterations);
    CHECK(back.converged == f.converged);
  }

  ModelSelection s;
  for (int q = 1; q <= 3; ++q) s.fits.push_back(random_fit(rng, q));
  s.failures.push_back({4, "optimizer did not converge"});
  s.chosen = 2;
  const auto back = selection_from_json(Json::parse(to_json(s).dump()));
  REQUIRE(back.fits.size() == 3);
  CHECK(back.fits[2].phi == s.fits[2].phi);
  REQUIRE(back.failures.size() == 1);
  CHECK(back.failures[0].q == 4);
  CHECK(back.failures[0].reason == s.failures[0].reason);
  CHECK(back.chosen == 2);

  Json bad = to_json(s.fits[0]);
  bad["q"] = 3;
  CHECK_THROWS_AS(fit_from_json(bad), Error);
  CHECK_THROWS(fit_from_json(Json{{"q", 1}}));
}

TEST_CASE("ensemble CSV round-trip") {
  std::mt19937_64 rng(2);
  PosteriorEnsemble e;
  e.q = 3;
  e.chain.dim = 4;
  for (int i = 0; i < 50; ++i) {
    e.chain.walker.push_back(i % 10);
    e.chain.step.push_back(1000 + 5 * (i / 10));
    for (int d = 0; d < 4; ++d) e.chain.values.push_back(awkward(rng));
  }
  std::stringstream ss;
  write_ensemble_csv(ss, e);
  CHECK(ss.str().rfind("walker,step,sigma2,alpha1,alpha2,alpha3\n", 0) == 0);
  const auto back = read_ensemble_csv(ss);
  CHECK(back.q == 3);
  CHECK(back.chain.dim == 4);
  CHECK(back.chain.values == e.chain.values);
  CHECK(back.chain.walker == e.chain.walker);
  CHECK(back.chain.step == e.chain.step);

  std::istringstream empty;
  CHECK_THROWS_AS(read_ensemble_csv(empty), EmptyInput);
  std::istringstream wrong("a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(read_ensemble_csv(wrong), ParseError);
  std::istringstream short_row("walker,step,sigma2,alpha1\n0,1,0.5\n");
  CHECK_THROWS_AS(read_ensemble_csv(short_row), ParseError);
}

TEST_CASE("band CSV round-trip") {
  std::mt19937_64 rng(3);
  PotentialBand b;
  for (int g = 0; g < 30; ++g) {
    b.grid.push_back(1.0 + g / 7.0);
    for (auto* v : {&b.v_mle, &b.lo68, &b.hi68, &b.lo95, &b.hi95}) v->push_back(awkward(rng));
  }
  std::stringstream ss;
  write_band_csv(ss, b);
  const auto back = read_band_csv(ss);
  CHECK(back.grid == b.grid);
  CHECK(back.v_mle == b.v_mle);
  CHECK(back.lo68 == b.lo68);
  CHECK(back.hi68 == b.hi68);
  CHECK(back.lo95 == b.lo95);
  CHECK(back.hi95 == b.hi95);

  std::istringstream bad("P,V_mle,lo68,hi68,lo95,hi95\n1,2,x,4,5,6\n");
  try {
    read_band_csv(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("track output") {
  RegimeLabel growth;
  growth.tag = {2018, 4};
  growth.label = Regime::Growth;
  growth.q = 1;
  RegimeLabel well;
  well.tag = {2018, 5};
  well.label = Regime::StableFP;
  well.q = 2;
  well.well_price = 101.25;
  const std::vector<TrackEntry> track{
      {{2018, 4}, growth, {}}, {{2018, 5}, well, {}}, {{2018, 6}, std::nullopt, "no data"}};

  std::ostringstream os;
  write_track_csv(os, track);
  CHECK(os.str() ==
        "year,month,label,q,well_price\n"
        "2018,4,Growth,1,\n"
        "2018,5,StableFP,2,101.25\n"
        "2018,6,Skipped,,\n");

  const auto j = to_json(track[1]);
  CHECK(j.at("label") == "StableFP");
  CHECK(j.at("well_price").get<double>() == 101.25);
  CHECK(to_json(track[0]).at("well_price").is_null());
  CHECK(to_json(track[2]).at("reason") == "no data");
}

TEST_CASE("long ensemble CSV") {
  const std::vector<Series> paths{Series({0.0, 0.5}, {1.0, 1.25}), Series({0.0, 1.0}, {2.0, 0.1})};
  std::ostringstream os;
  write_long_ensemble_csv(os, paths);
  CHECK(os.str() == "path_id,time,value\n0,0,1\n0,0.5,1.25\n1,0,2\n1,1,0.1\n");
}

TEST_CASE("sidecar and diagnostics documents") {
  PosteriorEnsemble e;
  e.q = 2;
  e.chain.dim = 3;
  e.chain.values = {0.1, 0.2, 0.3};
  e.chain.walker = {0};
  e.chain.step = {0};
  e.walkers = 32;
  e.steps = 5000;
  e.seed = 7;
  const auto j = ensemble_sidecar(e);
  CHECK(j.at("walkers") == 32);
  CHECK(j.at("n_samples") == 1);
  CHECK(j.at("seed") == 7);

  Diagnostics d;
  d.coordinates.push_back({1.0, 0.5, std::nullopt});
  d.coordinates.push_back({2.0, 0.25, 12.5});
  d.chain_length = 4000;
  const auto dj = to_json(d);
  CHECK(dj.dump().find("12.5") != std::string::npos);

  const auto mj = to_json(DriftModel({0.5, -0.005}, 0.0004));
  CHECK(mj.at("q") == 2);
  CHECK(mj.at("alpha").get<std::vector<double>>() == std::vector<double>{0.5, -0.005});
}
