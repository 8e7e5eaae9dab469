#include "potwell/replicate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "potwell/error.hpp"

namespace potwell::replicate {

namespace {

std::string interval_text(const ParameterSummary& s) {
  std::ostringstream os;
  os << s.name << ": truth " << s.truth << ", mean " << s.mean << " +/- " << s.std;
  return os.str();
}

}  // namespace

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

ParameterSummary summarize(const std::vector<FitResult>& fits, std::size_t k, std::string name,
                           double truth) {
  ParameterSummary s{std::move(name), truth, 0.0, 0.0};
  if (fits.empty()) return s;
  for (const auto& f : fits) s.mean += f.phi.at(k);
  s.mean /= static_cast<double>(fits.size());
  if (fits.size() > 1) {
    double ss = 0.0;
    for (const auto& f : fits) ss += (f.phi[k] - s.mean) * (f.phi[k] - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(fits.size() - 1));
  }
  return s;
}

ParameterRecoveryReport run_parameter_recovery(const ParameterRecoveryConfig& config) {
  ParameterRecoveryReport r;
  const auto ensemble =
      simulate_ensemble(r.truth, config.paths, config.length, config.grid, config.seed,
                        EnsembleOptions{.s0 = 1.0, .dt = config.dt});
  r.attempts = ensemble.attempts;
  r.rejections = ensemble.rejections;

  for (const auto& path : ensemble.paths) {
    try {
      auto f3 = fit_mle(path, 3, config.fit);
      auto f4 = fit_mle(path, 4, config.fit);
      r.fits_q3.push_back(std::move(f3));
      r.fits_q4.push_back(std::move(f4));
    } catch (const Error&) {
      ++r.failed_fits;
    }
  }

  const auto truth = r.truth.phi();
  const char* names[] = {"sigma2", "alpha1", "alpha2", "alpha3", "alpha4"};
  for (std::size_t k = 0; k < 4; ++k) r.q3.push_back(summarize(r.fits_q3, k, names[k], truth[k]));
  for (std::size_t k = 0; k < 5; ++k)
    r.q4.push_back(summarize(r.fits_q4, k, names[k], k < 4 ? truth[k] : 0.0));

  for (const auto& s : r.q3)
    r.checks.push_back({"q3 " + s.name + " truth within mean +/- std", s.covers(s.truth),
                        interval_text(s)});
  const auto& a3 = r.q3[3];
  r.checks.push_back({"q3 alpha3 indistinguishable from zero (|mean| < std)",
                      std::abs(a3.mean) < a3.std, interval_text(a3)});
  const auto& a2 = r.q4[2];
  r.checks.push_back({"q4 alpha2 interval contains 0", a2.covers(0.0), interval_text(a2)});
  return r;
}

int OrderRecoveryReport::modal_order(int true_q) const {
  const auto& row = histogram.at(static_cast<std::size_t>(true_q - 1));
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()) + 1;
}

OrderRecoveryReport run_order_recovery(const OrderRecoveryConfig& config) {
  OrderRecoveryReport r;
  for (int q = kMinOrder; q <= config.max_true_order; ++q) {
    const auto ensemble = simulate_random_ensemble(
        q, config.paths, config.length, config.grid,
        derive_seed(config.seed, {static_cast<std::uint64_t>(q)}),
        EnsembleOptions{.s0 = 1.0, .dt = config.dt});
    const auto qi = static_cast<std::size_t>(q - 1);
    r.rejections[qi] = ensemble.rejections;
    for (const auto& path : ensemble.paths) {
      try {
        const auto sel = select_order(path, kMaxOrder, config.fit);
        ++r.histogram[qi][static_cast<std::size_t>(sel.chosen - 1)];
      } catch (const Error&) {
        ++r.failed[qi];
      }
    }
  }
  for (int q = kMinOrder; q <= std::min(3, config.max_true_order); ++q) {
    const auto& row = r.histogram[static_cast<std::size_t>(q - 1)];
    std::ostringstream os;
    os << "histogram [" << row[0] << ", " << row[1] << ", " << row[2] << ", " << row[3] << "]";
    r.checks.push_back({"true q=" + std::to_string(q) + " modal estimate",
                        r.modal_order(q) == q, os.str()});
  }
  return r;
}

}  // namespace potwell::replicate
