#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>

#include "potwell/error.hpp"
#include "potwell/inference.hpp"
#include "potwell/nelder_mead.hpp"
#include "potwell/simulate.hpp"
#include "support.hpp"

using namespace potwell;

namespace {

// Brute-force oracle: Gaussian log-pdf from Boost, summed step by step.
double oracle_loglik(const DriftModel& m, const Series& s) {
  double sum = 0.0;
  for (std::size_t n = 0; n + 1 < s.size(); ++n) {
    const double x = s.values()[n];
    const double dt = s.times()[n + 1] - s.times()[n];
    double drift = 0.0;
    for (std::size_t i = 0; i < m.alpha().size(); ++i)
      drift += m.alpha()[i] * std::pow(x, static_cast<double>(i + 1));
    const boost::math::normal_distribution<double> g(x + drift * dt, std::sqrt(m.sigma2()) * x * std::sqrt(dt));
    sum += std::log(boost::math::pdf(g, s.values()[n + 1]));
  }
  return sum;
}

// Exact MLE: for fixed sigma^2 the log-likelihood is a weighted least-squares
// problem in alpha with weights 1 / (s^2 dt), and sigma^2 is then the mean
// weighted squared residual.
std::vector<double> closed_form_mle(const Series& s, int q) {
  const auto n = static_cast<Eigen::Index>(s.size() - 1);
  Eigen::MatrixXd x(n, q);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = s.values()[i];
    const double dt = s.times()[i + 1] - s.times()[i];
    const double w = 1.0 / (v * std::sqrt(dt));
    double p = 1.0;
    for (int k = 0; k < q; ++k) {
      p *= v;
      x(i, k) = w * p * dt;
    }
    y(i) = w * (s.values()[i + 1] - v);
  }
  // Column equilibration keeps exploding paths (prices spanning many
  // decades) from losing rank in the QR.
  const Eigen::VectorXd norms = x.colwise().norm().transpose();
  const Eigen::MatrixXd xs = x * norms.cwiseInverse().asDiagonal();
  const Eigen::VectorXd a = (xs.colPivHouseholderQr().solve(y)).cwiseQuotient(norms);
  std::vector<double> phi{(y - x * a).squaredNorm() / static_cast<double>(n)};
  for (int k = 0; k < q; ++k) phi.push_back(a(k));
  return phi;
}

Series simulated(int q, std::uint64_t seed, std::size_t len = 1000, double dt = 0.1) {
  return simulate_random_ensemble(q, 1, len, GridStyle::Jittered, seed, {.s0 = 1.0, .dt = dt}).paths[0];
}

}  // namespace

TEST_CASE("step likelihood examples") {
  const DriftModel flat({0.0}, 1.0);
  CHECK(step_loglik(flat, 1.0, 0.0, 1.0, 1.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
  CHECK(step_loglik(flat, 1.0, 0.0, 2.0, 1.0) == doctest::Approx(-1.4189385332046727).epsilon(1e-14));

  const DriftModel m({0.01}, 0.04);
  const boost::math::normal_distribution<double> g(100.5, std::sqrt(200.0));
  const double oracle = std::log(boost::math::pdf(g, 100.5));
  CHECK(oracle == doctest::Approx(-3.5680972164786913).epsilon(1e-12));
  CHECK(step_loglik(m, 100.0, 3.0, 100.5, 3.5) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("step likelihood errors") {
  const DriftModel m({0.1}, 0.04);
  CHECK_THROWS_AS(step_loglik(m, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(step_loglik(m, 1.0, 2.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(step_loglik(m, 0.0, 0.0, 1.0, 1.0), DegenerateState);
  CHECK_THROWS_AS(step_loglik(DriftModel({0.1}, 0.0), 1.0, 0.0, 1.0, 1.0), DegenerateState);
  CHECK_THROWS_AS(step_loglik(m, 1e-200, 0.0, 1.0, 1.0), DegenerateState);

  const Series s({0, 1, 2, 3}, {1.0, 2.0, 0.0, 1.0});
  try {
    total_loglik(m, s);
    FAIL("expected DegenerateState");
  } catch (const DegenerateState& e) {
    CHECK(e.index() == 2);
  }
}

TEST_CASE("total likelihood matches the brute-force oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> order(1, 4);
  std::uniform_int_distribution<std::uint64_t> seed;
  for (int k = 0; k < 20; ++k) {
    const int q = order(rng);
    const auto e = simulate_random_ensemble(q, 1, 400, GridStyle::Jittered, seed(rng), {.s0 = 1.0, .dt = 0.2});
    const auto& model = e.models[0];
    const auto& path = e.paths[0];
    const double ours = total_loglik(model, path);
    const double ref = oracle_loglik(model, path);
    CHECK(std::abs(ours - ref) <= 1e-9 * std::abs(ref));
    CHECK(std::abs(TransitionSet(path).loglik(model.phi()) - ref) <= 1e-9 * std::abs(ref));
  }

  SUBCASE("long path under its generator") {
    const DriftModel m({2.0, -1.0, 0.01}, 0.05);
    const auto path = testing::euler_path(m, 1.0, 0.05, 1001, 77);
    const double ref = oracle_loglik(m, path);
    CHECK(std::abs(total_loglik(m, path) - ref) <= 1e-9 * std::abs(ref));
  }
}

TEST_CASE("one-step propagator is normalized") {
  const struct {
    double s, dt, sigma2;
    std::vector<double> alpha;
  } cases[] = {{1.0, 1.0, 1.0, {0.0}},
               {100.0, 0.5, 0.04, {0.01}},
               {2.3, 0.01, 0.05, {2.0, -1.0, 0.01}},
               {45.0, 1.3, 0.001, {0.3, -0.004, 1e-5, -1e-7}},
               {0.7, 2.0, 0.09, {-0.2, 0.1}}};
  for (const auto& c : cases) {
    const DriftModel m(c.alpha, c.sigma2);
    const double mean = c.s + m.drift(c.s) * c.dt;
    const double sd = std::sqrt(c.sigma2 * c.dt) * c.s;
    const double a = mean - 12 * sd, b = mean + 12 * sd;
    const int n = 20000;
    const double h = (b - a) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * std::exp(step_loglik(m, c.s, 0.0, a + i * h, c.dt));
    }
    CHECK(std::abs(acc * h / 3.0 - 1.0) < 1e-4);
  }
}

TEST_CASE("Markov sum structure") {
  const DriftModel m({0.5, -0.1}, 0.02);
  const auto path = testing::euler_path(m, 3.0, 0.1, 300, 5);
  SUBCASE("two-point series is one step") {
    const auto two = path.slice(10, 12);
    CHECK(total_loglik(m, two) == step_loglik(m, two.values()[0], 0.0, two.values()[1], two.times()[1]));
  }
  SUBCASE("concatenation") {
    for (std::size_t k : {std::size_t{1}, std::size_t{150}, std::size_t{298}}) {
      const double whole = total_loglik(m, path);
      const double parts = total_loglik(m, path.slice(0, k + 1)) + total_loglik(m, path.slice(k, path.size()));
      CHECK(parts == doctest::Approx(whole).epsilon(1e-12));
    }
  }
  SUBCASE("time shift") {
    auto t = path.times();
    for (auto& x : t) x += 1234.5;
    const Series shifted(t, path.values());
    CHECK(total_loglik(m, shifted) == doctest::Approx(total_loglik(m, path)).epsilon(1e-10));
  }
}

TEST_CASE("maximum likelihood agrees with the closed-form optimum") {
  for (int q = 1; q <= 4; ++q) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto path = simulated(q, 900 + seed);
      for (int fq = 1; fq <= 4; ++fq) {
        const auto fit = fit_mle(path, fq);
        const auto exact = closed_form_mle(path, fq);
        const double l_exact = total_loglik(DriftModel::from_phi(exact), path);
        CHECK(fit.log_likelihood >= l_exact - 1e-6);
        CHECK(fit.log_likelihood <= l_exact + 1e-6);
        CHECK(fit.sigma2() > 0.0);
        CHECK(fit.sigma2() == doctest::Approx(exact[0]).epsilon(1e-3));
      }
    }
  }
}

TEST_CASE("noiseless GBM drift is recovered") {
  const double mu = 0.03;
  const auto path = testing::euler_path(DriftModel({mu}, 1e-12), 10.0, 1.0, 200, 3);
  const auto fit = fit_mle(path, 1);
  CHECK(fit.alpha()[0] == doctest::Approx(mu).epsilon(0.01));
}

TEST_CASE("fitted point is a local maximum") {
  for (int q = 1; q <= 4; ++q) {
    const auto path = simulated(q, 300 + static_cast<std::uint64_t>(q));
    const auto fit = fit_mle(path, q);
    const double l0 = total_loglik(fit.model(), path);

    // No coordinate-wise relative perturbation improves the likelihood.
    for (std::size_t k = 0; k < fit.phi.size(); ++k)
      for (double sign : {-1.0, 1.0}) {
        auto phi = fit.phi;
        phi[k] *= 1.0 + sign * 1e-4;
        CHECK(total_loglik(DriftModel::from_phi(phi), path) <= l0 + 1e-6);
      }

    // A fresh simplex started at the optimum finds nothing better.
    auto neg = [&](std::span<const double> u) {
      std::vector<double> phi(u.begin(), u.end());
      phi[0] = std::exp(u[0]);
      return -total_loglik(DriftModel::from_phi(phi), path);
    };
    std::vector<double> u0 = fit.phi;
    u0[0] = std::log(u0[0]);
    std::vector<double> step(u0.size());
    for (std::size_t k = 0; k < u0.size(); ++k) step[k] = 1e-3 * std::max(1e-6, std::abs(u0[k]));
    optim::NelderMeadOptions opt;
    opt.max_iterations = 2000;
    const auto again = optim::nelder_mead(neg, u0, step, opt);
    CHECK(-again.f - l0 < 1e-8);
  }
}

TEST_CASE("AIC identity holds bitwise") {
  for (int q = 1; q <= 4; ++q) {
    const auto path = simulated(q, 40 + static_cast<std::uint64_t>(q));
    const auto sel = select_order(path);
    for (const auto& f : sel.fits) {
      CHECK(f.aic == -2.0 * f.log_likelihood + 2.0 * (f.q + 1));
      CHECK(f.log_likelihood == total_loglik(f.model(), path));
    }
  }
}

TEST_CASE("order selection") {
  SUBCASE("equal likelihoods choose the smallest order") {
    std::vector<FitResult> fits;
    for (int q = 1; q <= 4; ++q) {
      FitResult f;
      f.q = q;
      f.log_likelihood = -123.0;
      f.aic = akaike(f.log_likelihood, q);
      fits.push_back(f);
    }
    CHECK(argmin_aic(fits) == 0);
  }
  SUBCASE("exact AIC ties go to the earlier entry") {
    std::vector<FitResult> fits(3);
    fits[0].aic = 5.0;
    fits[1].aic = 3.0;
    fits[2].aic = 3.0;
    CHECK(argmin_aic(fits) == 1);
  }
  SUBCASE("chosen order minimizes AIC and runs are deterministic") {
    const auto path = simulated(2, 71);
    const auto a = select_order(path);
    const auto b = select_order(path);
    REQUIRE(a.fits.size() == 4);
    for (const auto& f : a.fits) CHECK(a.best().aic <= f.aic);
    CHECK(a.chosen == b.chosen);
    for (std::size_t i = 0; i < a.fits.size(); ++i) CHECK(a.fits[i].phi == b.fits[i].phi);
  }
  SUBCASE("short series record failing orders") {
    const auto sel = select_order(Series::unit_spaced({1.0, 1.1, 1.05}));
    CHECK(sel.fits.size() == 1);
    CHECK(sel.failures.size() == 3);
    CHECK(sel.chosen == 1);
  }
  SUBCASE("all orders failing") {
    CHECK_THROWS_AS(select_order(Series::unit_spaced({1.0, 0.0, 1.0, 2.0, 1.5, 1.2})), SelectionFailure);
    CHECK_THROWS_AS(select_order(Series::unit_spaced(std::vector<double>(50, 7.0))), SelectionFailure);
  }
  CHECK_THROWS_AS(select_order(Series::unit_spaced({1, 2, 3}), 5), OrderOutOfRange);
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_mle(Series::unit_spaced({1.0, 0.0, 1.0, 2.0}), 1), DegenerateState);
  CHECK_THROWS_AS(fit_mle(Series::unit_spaced({1.0, -1.0, 1.0, 2.0}), 1), DegenerateState);
  CHECK_THROWS_AS(fit_mle(Series::unit_spaced(std::vector<double>(30, 2.0)), 2), DegenerateState);
  CHECK_THROWS_AS(fit_mle(Series::unit_spaced({1.0, 1.2, 1.1}), 2), std::invalid_argument);
  CHECK_THROWS_AS(fit_mle(Series::unit_spaced({1.0, 1.2, 1.1, 1.3}), 0), OrderOutOfRange);
  CHECK_THROWS_AS(fit_mle(Series::unit_spaced({1.0, 1.2, 1.1, 1.3}), 5), OrderOutOfRange);
}
