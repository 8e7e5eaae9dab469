#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "potwell/inference.hpp"
#include "potwell/simulate.hpp"

namespace potwell::replicate {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

bool all_pass(const std::vector<Check>& checks);

struct ParameterSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double std = 0.0;

  bool covers(double v) const { return v >= mean - std && v <= mean + std; }
};

/// mean and sample standard deviation of coordinate k across fits.
ParameterSummary summarize(const std::vector<FitResult>& fits, std::size_t k, std::string name,
                           double truth);

// Fixed-parameter experiment: paths from phi = (0.05, 2, -1, 0.01) fitted
// at q = 3 and q = 4.

struct ParameterRecoveryConfig {
  std::size_t paths = 100;
  std::size_t length = 1000;
  std::uint64_t seed = 11;
  GridStyle grid = GridStyle::Jittered;
  double dt = 0.1;
  FitOptions fit;
};

struct ParameterRecoveryReport {
  DriftModel truth = DriftModel({2.0, -1.0, 0.01}, 0.05);
  std::size_t attempts = 0;
  std::size_t rejections = 0;
  std::vector<FitResult> fits_q3;
  std::vector<FitResult> fits_q4;
  std::size_t failed_fits = 0;
  std::vector<ParameterSummary> q3;  // sigma2, alpha1..alpha3
  std::vector<ParameterSummary> q4;  // sigma2, alpha1..alpha4 (truth alpha4 = 0)
  std::vector<Check> checks;
};

ParameterRecoveryReport run_parameter_recovery(const ParameterRecoveryConfig& config = {});

// Random-parameter experiment: for each true order, AIC-selected orders of
// paths drawn from random models.

struct OrderRecoveryConfig {
  std::size_t paths = 100;
  std::size_t length = 1000;
  std::uint64_t seed = 11;
  GridStyle grid = GridStyle::Jittered;
  double dt = 0.1;
  int max_true_order = kMaxOrder;
  FitOptions fit;
};

struct OrderRecoveryReport {
  /// histogram[true_q - 1][estimated_q - 1]
  std::array<std::array<long, kMaxOrder>, kMaxOrder> histogram{};
  std::array<std::size_t, kMaxOrder> rejections{};
  std::array<std::size_t, kMaxOrder> failed{};
  std::vector<Check> checks;

  int modal_order(int true_q) const;
};

OrderRecoveryReport run_order_recovery(const OrderRecoveryConfig& config = {});

}  // namespace potwell::replicate
