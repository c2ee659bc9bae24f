#pragma once

#include <optional>
#include <string>

#include "didc/bandwidth.hpp"
#include "didc/data.hpp"
#include "didc/kernels.hpp"
#include "didc/lpreg.hpp"

namespace didc {

struct EstimatorConfig {
  int p = 1;   // point-estimation order
  int q = 2;   // bias-estimation order, q > p
  int nu = 0;  // derivative of interest
  KernelSpec kernel;
  double alpha = 0.05;
  std::optional<double> h;  // override automatic selection
  std::optional<double> b;
  BandwidthOptions bandwidth;
  VarianceMethod variance_method = VarianceMethod::NearestNeighbor;
};

struct RdEstimate {
  double tau = 0.0;  // boundary jump
  double se = 0.0;   // conventional standard error
  double h = 0.0;
  double b = 0.0;
  int n_eff_left = 0;
  int n_eff_right = 0;
};

// Point estimate, bias-corrected estimate, conventional and robust variance,
// and the robust confidence interval for the jump in a cross-section (levels
// or first differences alike).
struct DidcEstimate {
  double tau = 0.0;
  double tau_bc = 0.0;
  double bias_hat = 0.0;  // h^{p+1-nu} * estimated bias constant
  double var_conventional = 0.0;
  double var_robust = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double h = 0.0;
  double b = 0.0;
  int p = 1, q = 2, nu = 0;
  KernelFamily kernel = KernelFamily::Triangular;
  double alpha = 0.05;
  int n_eff_left = 0;
  int n_eff_right = 0;
  BandwidthPlan bandwidths;

  // One-sided components, used by the bounds module.
  double level_above = 0.0;
  double level_below = 0.0;
  double level_above_bc = 0.0;
  double level_below_bc = 0.0;
};

// Core routine shared by the RD and DiDC entry points.
DidcEstimate estimate_cutoff_effect(const CrossSection& data, const EstimatorConfig& config);

RdEstimate estimate_rd(const CrossSection& data, const EstimatorConfig& config);

DidcEstimate estimate_didc(const PanelDataset& panel, const std::string& t1,
                           const std::string& t0, const EstimatorConfig& config);

// Difference of per-period RD estimates. With shared_bandwidth the two
// periods reuse the bandwidths selected on the differenced outcome, making
// the result algebraically identical to estimate_didc's point estimate.
DidcEstimate estimate_didc_as_difference_of_rds(const PanelDataset& panel, const std::string& t1,
                                                const std::string& t0,
                                                const EstimatorConfig& config,
                                                bool shared_bandwidth = true);

struct MultiplicativeEffect {
  double value = 0.0;
  double se = 0.0;
};

// tau_didc / tau_rd0 + 1, with a delta-method standard error treating the
// per-period estimates as independent.
MultiplicativeEffect multiplicative_effect(const PanelDataset& panel, const std::string& t1,
                                           const std::string& t0, const EstimatorConfig& config);

struct BiasDecomposition {
  double didc = 0.0;
  double rd1 = 0.0;
  double rd0 = 0.0;
};

// Estimated leading-bias terms at a shared bandwidth pair; satisfies
// didc = rd1 - rd0 by linearity of the weighted fits.
BiasDecomposition bias_decomposition(const PanelDataset& panel, const std::string& t1,
                                     const std::string& t0, const EstimatorConfig& config);

}  // namespace didc
