#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "didc/data.hpp"
#include "didc/kernels.hpp"
#include "didc/lpreg.hpp"

namespace didc {

enum class BandwidthRule { Smallest, Biggest, Pooled };

BandwidthRule bandwidth_rule_from_string(const std::string& name);
std::string to_string(BandwidthRule rule);

struct WaldTestResult {
  std::vector<double> theta_hat;  // per-period treated jump coefficients
  std::vector<double> theta_se;
  double f_stat = 0.0;
  int df_num = 0;
  long df_den = 0;
  double p_value = 1.0;
  double bandwidth_used = 0.0;
  BandwidthRule bandwidth_rule = BandwidthRule::Pooled;
};

// Stacked kernel-weighted least squares over the listed pre-treatment
// periods; per period the regression carries an intercept, a centered-z
// slope, a treated jump dummy and a treated slope. H0: equal jumps.
// With literal_slope_only the jump dummies are dropped and H0 is equality of
// the treated-slope interactions instead.
WaldTestResult wald_time_invariance(const PanelDataset& panel,
                                    const std::vector<std::string>& pre_periods,
                                    BandwidthRule rule, const KernelSpec& kernel,
                                    bool literal_slope_only = false);

struct KsSideResult {
  double ks = 0.0;
  double p_value = 1.0;
  int K = 0;
  int B = 0;
  Side side = Side::Above;
};

struct KsTestResult {
  double ks_plus = 0.0;
  double ks_minus = 0.0;
  double p_plus = 1.0;
  double p_minus = 1.0;
  int K = 0;
  int B = 0;
};

// K = 0 picks the default series dimension ceil(2 n^{1/5}) capped at 8,
// where n counts observations on the requested side.
KsSideResult ks_time_invariance(const PanelDataset& panel, const std::string& t_a,
                                const std::string& t_b, Side side, int K, int B,
                                uint64_t rng_seed);

KsTestResult ks_time_invariance_both(const PanelDataset& panel, const std::string& t_a,
                                     const std::string& t_b, int K, int B, uint64_t rng_seed);

}  // namespace didc
