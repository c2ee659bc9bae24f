#include "didc/estimator.hpp"

#include <cmath>

#include "didc/mathutil.hpp"

namespace didc {

namespace {

struct SideInference {
  double level = 0.0;       // nu! e_nu' delta_p(h)
  double level_bc = 0.0;
  double bias = 0.0;        // h^{p+1-nu} * deriv_{p+1,q}(b) * calB / (p+1)!
  double var_conv = 0.0;
  double var_robust = 0.0;
  int n_eff = 0;
};

// Bias-corrected one-sided inference following the robust local-polynomial
// recipe: a p-th order fit at h for the point estimate, a q-th order fit at b
// for the (p+1)-th derivative, and a variance that carries the covariance
// between the two fits.
SideInference infer_side(const CrossSection& data, Side side, const EstimatorConfig& cfg,
                         double h, double b, const ResidualVariance& sigma) {
  const int p = cfg.p, q = cfg.q, nu = cfg.nu;
  const long n = static_cast<long>(data.size());

  LocalPolyFit fit_p = fit_one_sided(data, side, p, h, cfg.kernel);
  LocalPolyFit fit_q = fit_one_sided(data, side, q, b, cfg.kernel);

  SideInference out;
  out.n_eff = fit_p.n_eff;
  out.level = fit_p.derivative(nu);

  double calB = fit_p.bias_constant(nu, p + 1);
  double deriv_p1 = fit_q.derivative(p + 1);
  out.bias = std::pow(h, p + 1 - nu) * deriv_p1 / factorial(p + 1) * calB;
  out.level_bc = out.level - out.bias;

  Eigen::MatrixXd psi_pp = sample_psi(fit_p, fit_p, sigma, data);
  Eigen::MatrixXd psi_qq = sample_psi(fit_q, fit_q, sigma, data);
  Eigen::MatrixXd psi_pq = sample_psi(fit_p, fit_q, sigma, data);

  Eigen::VectorXd e_nu = Eigen::VectorXd::Zero(p + 1);
  e_nu(nu) = 1.0;
  Eigen::VectorXd e_p1 = Eigen::VectorXd::Zero(q + 1);
  e_p1(p + 1) = 1.0;

  Eigen::VectorXd gp_inv_e = fit_p.gamma_h.ldlt().solve(e_nu);
  Eigen::VectorXd gq_inv_e = fit_q.gamma_h.ldlt().solve(e_p1);

  const double fn = factorial(nu), fp1 = factorial(p + 1);
  double v_point = fn * fn / (n * std::pow(h, 2.0 * nu)) * gp_inv_e.dot(psi_pp * gp_inv_e);
  double v_deriv =
      fp1 * fp1 / (n * std::pow(b, 2.0 * (p + 1))) * gq_inv_e.dot(psi_qq * gq_inv_e);
  double cov = fn * fp1 / (n * std::pow(h, nu) * std::pow(b, p + 1)) *
               gp_inv_e.dot(psi_pq * gq_inv_e);

  double hp = std::pow(h, p + 1 - nu);
  out.var_conv = v_point;
  out.var_robust = v_point + hp * hp * v_deriv * calB * calB / (fp1 * fp1) -
                   2.0 * hp * cov * calB / fp1;
  return out;
}

}  // namespace

DidcEstimate estimate_cutoff_effect(const CrossSection& data, const EstimatorConfig& cfg) {
  if (cfg.q <= cfg.p) throw std::invalid_argument("q must exceed p");
  if (cfg.nu > cfg.p) throw std::invalid_argument("nu must not exceed p");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0,1)");
  if (data.count_above() < cfg.p + 1 || data.count_below() < cfg.p + 1)
    throw EstimationError("two-sided data required");

  DidcEstimate est;
  est.p = cfg.p;
  est.q = cfg.q;
  est.nu = cfg.nu;
  est.kernel = cfg.kernel.family;
  est.alpha = cfg.alpha;

  BandwidthPlan plan;
  if (cfg.h && cfg.b) {
    plan.h = *cfg.h;
    plan.b = *cfg.b;
    plan.n = static_cast<long>(data.size());
  } else {
    plan = plan_bandwidths(data, cfg.p, cfg.q, cfg.nu, cfg.kernel, cfg.bandwidth);
    if (cfg.h) plan.h = *cfg.h;
    if (cfg.b) plan.b = *cfg.b;
  }
  if (!(plan.h > 0.0) || !(plan.b > 0.0)) throw EstimationError("bandwidths must be positive");
  est.h = plan.h;
  est.b = plan.b;
  est.bandwidths = plan;

  ResidualVariance sigma = estimate_residual_variance(data, cfg.variance_method);
  SideInference above = infer_side(data, Side::Above, cfg, plan.h, plan.b, sigma);
  SideInference below = infer_side(data, Side::Below, cfg, plan.h, plan.b, sigma);

  est.level_above = above.level;
  est.level_below = below.level;
  est.level_above_bc = above.level_bc;
  est.level_below_bc = below.level_bc;
  est.n_eff_right = above.n_eff;
  est.n_eff_left = below.n_eff;

  est.tau = above.level - below.level;
  est.bias_hat = above.bias - below.bias;
  est.tau_bc = est.tau - est.bias_hat;
  est.var_conventional = above.var_conv + below.var_conv;
  est.var_robust = above.var_robust + below.var_robust;
  if (est.var_robust < 0.0) est.var_robust = 0.0;  // numerical guard

  double zq = normal_quantile(1.0 - cfg.alpha / 2.0);
  double half = zq * std::sqrt(est.var_robust);
  est.ci_lower = est.tau_bc - half;
  est.ci_upper = est.tau_bc + half;
  return est;
}

RdEstimate estimate_rd(const CrossSection& data, const EstimatorConfig& config) {
  DidcEstimate full = estimate_cutoff_effect(data, config);
  RdEstimate rd;
  rd.tau = full.tau;
  rd.se = std::sqrt(full.var_conventional);
  rd.h = full.h;
  rd.b = full.b;
  rd.n_eff_left = full.n_eff_left;
  rd.n_eff_right = full.n_eff_right;
  return rd;
}

DidcEstimate estimate_didc(const PanelDataset& panel, const std::string& t1,
                           const std::string& t0, const EstimatorConfig& config) {
  CrossSection dy = first_difference(panel, t1, t0);
  return estimate_cutoff_effect(dy, config);
}

DidcEstimate estimate_didc_as_difference_of_rds(const PanelDataset& panel, const std::string& t1,
                                                const std::string& t0,
                                                const EstimatorConfig& config,
                                                bool shared_bandwidth) {
  EstimatorConfig cfg1 = config, cfg0 = config;
  if (shared_bandwidth && !(config.h && config.b)) {
    CrossSection dy = first_difference(panel, t1, t0);
    BandwidthPlan plan = plan_bandwidths(dy, config.p, config.q, config.nu, config.kernel,
                                         config.bandwidth);
    cfg1.h = cfg0.h = plan.h;
    cfg1.b = cfg0.b = plan.b;
  }
  DidcEstimate e1 = estimate_cutoff_effect(slice_period(panel, t1), cfg1);
  DidcEstimate e0 = estimate_cutoff_effect(slice_period(panel, t0), cfg0);

  DidcEstimate out = e1;
  out.tau = e1.tau - e0.tau;
  out.tau_bc = e1.tau_bc - e0.tau_bc;
  out.bias_hat = e1.bias_hat - e0.bias_hat;
  out.level_above = e1.level_above - e0.level_above;
  out.level_below = e1.level_below - e0.level_below;
  out.level_above_bc = e1.level_above_bc - e0.level_above_bc;
  out.level_below_bc = e1.level_below_bc - e0.level_below_bc;
  // Noise is independent across periods, so the variances add.
  out.var_conventional = e1.var_conventional + e0.var_conventional;
  out.var_robust = e1.var_robust + e0.var_robust;
  double zq = normal_quantile(1.0 - config.alpha / 2.0);
  double half = zq * std::sqrt(out.var_robust);
  out.ci_lower = out.tau_bc - half;
  out.ci_upper = out.tau_bc + half;
  out.n_eff_left = std::min(e1.n_eff_left, e0.n_eff_left);
  out.n_eff_right = std::min(e1.n_eff_right, e0.n_eff_right);
  return out;
}

MultiplicativeEffect multiplicative_effect(const PanelDataset& panel, const std::string& t1,
                                           const std::string& t0,
                                           const EstimatorConfig& config) {
  EstimatorConfig cfg = config;
  if (!(config.h && config.b)) {
    CrossSection dy = first_difference(panel, t1, t0);
    BandwidthPlan plan = plan_bandwidths(dy, config.p, config.q, config.nu, config.kernel,
                                         config.bandwidth);
    cfg.h = plan.h;
    cfg.b = plan.b;
  }
  DidcEstimate e1 = estimate_cutoff_effect(slice_period(panel, t1), cfg);
  DidcEstimate e0 = estimate_cutoff_effect(slice_period(panel, t0), cfg);
  if (std::fabs(e0.tau) <= 1e-8)
    throw EstimationError("multiplicative estimand undefined: period-0 RD is near zero");
  MultiplicativeEffect out;
  // tau_didc / tau_rd0 + 1 collapses to the period ratio at shared smoothing.
  out.value = e1.tau / e0.tau;
  double r1 = 1.0 / e0.tau;
  double r0 = -e1.tau / (e0.tau * e0.tau);
  out.se = std::sqrt(r1 * r1 * e1.var_robust + r0 * r0 * e0.var_robust);
  return out;
}

BiasDecomposition bias_decomposition(const PanelDataset& panel, const std::string& t1,
                                     const std::string& t0, const EstimatorConfig& config) {
  EstimatorConfig cfg = config;
  if (!(config.h && config.b)) {
    CrossSection dy = first_difference(panel, t1, t0);
    BandwidthPlan plan = plan_bandwidths(dy, config.p, config.q, config.nu, config.kernel,
                                         config.bandwidth);
    cfg.h = plan.h;
    cfg.b = plan.b;
  }
  DidcEstimate ed = estimate_cutoff_effect(first_difference(panel, t1, t0), cfg);
  DidcEstimate e1 = estimate_cutoff_effect(slice_period(panel, t1), cfg);
  DidcEstimate e0 = estimate_cutoff_effect(slice_period(panel, t0), cfg);
  return BiasDecomposition{ed.bias_hat, e1.bias_hat, e0.bias_hat};
}

}  // namespace didc
