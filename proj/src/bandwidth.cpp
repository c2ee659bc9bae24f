#include "didc/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "didc/mathutil.hpp"

namespace didc {

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  double pos = q * (static_cast<double>(s.size()) - 1.0);
  auto lo = static_cast<std::size_t>(pos);
  auto hi = std::min(lo + 1, s.size() - 1);
  double w = pos - static_cast<double>(lo);
  return (1.0 - w) * s[lo] + w * s[hi];
}

// One-sided global polynomial pilot: returns the der-th derivative at 0 and
// the homoskedastic variance factor of that estimate per unit error variance.
struct PilotDerivative {
  double value = 0.0;
  double var_factor = 0.0;
};

PilotDerivative global_derivative(const CrossSection& data, Side side, int degree, int der) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool on_side = (side == Side::Above) ? (data.z[i] >= 0.0) : (data.z[i] < 0.0);
    if (on_side) idx.push_back(i);
  }
  const int ns = static_cast<int>(idx.size());
  if (ns < degree + 2)
    throw EstimationError("too few observations for the pilot polynomial fit");
  // Scale z by its side range so the Vandermonde system stays well-posed.
  double scale = 0.0;
  for (auto i : idx) scale = std::max(scale, std::fabs(data.z[i]));
  if (scale <= 0.0) scale = 1.0;
  Eigen::MatrixXd X(ns, degree + 1);
  Eigen::VectorXd Y(ns);
  for (int r = 0; r < ns; ++r) {
    double u = data.z[idx[static_cast<std::size_t>(r)]] / scale;
    double pw = 1.0;
    for (int j = 0; j <= degree; ++j) {
      X(r, j) = pw;
      pw *= u;
    }
    Y(r) = data.y[idx[static_cast<std::size_t>(r)]];
  }
  Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  Eigen::VectorXd beta = ldlt.solve(X.transpose() * Y);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(degree + 1);
  e(der) = 1.0;
  Eigen::VectorXd xtx_inv_e = ldlt.solve(e);
  double fact = factorial(der);
  double unscale = std::pow(scale, -der);
  PilotDerivative out;
  out.value = fact * beta(der) * unscale;
  out.var_factor = fact * fact * xtx_inv_e(der) * unscale * unscale;
  return out;
}

struct PilotSet {
  double f_hat, pilot_h;
  double sigma2_plus, sigma2_minus;
  double cap;
  double iqr;
  long n;
};

PilotSet common_pilots(const CrossSection& data, const BandwidthOptions& options) {
  PilotSet ps;
  ps.n = static_cast<long>(data.size());
  auto [f0, bw] = density_at_cutoff(data.z);
  ps.f_hat = f0;
  ps.pilot_h = bw;
  if (!(ps.f_hat > 0.0)) throw EstimationError("density estimate at the cutoff is zero");
  ResidualVariance rv = estimate_residual_variance(data, options.variance_method);
  ps.sigma2_plus = rv.side_mean(data, Side::Above);
  ps.sigma2_minus = rv.side_mean(data, Side::Below);
  double max_above = 0.0, max_below = 0.0;
  for (double z : data.z) {
    if (z >= 0.0)
      max_above = std::max(max_above, z);
    else
      max_below = std::max(max_below, -z);
  }
  ps.cap = std::min(max_above, max_below);
  std::vector<double> s(data.z);
  std::sort(s.begin(), s.end());
  ps.iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  return ps;
}

// Shared skeleton of the two selectors: MSE-optimal bandwidth for the
// `der`-th derivative estimated with an `ord`-order fit, parity sign `sgn`.
double select_bandwidth(const CrossSection& data, const PilotSet& ps, const KernelSpec& kernel,
                        int ord, int der, int pilot_degree, double sgn, bool regularize,
                        const BandwidthOptions& options, BandwidthDiagnostics& diag) {
  const auto& km = kernel_moments(kernel, ord, ord + 2);
  const double fact_der = factorial(der);

  diag.f_hat = ps.f_hat;
  diag.sigma2_plus = ps.sigma2_plus;
  diag.sigma2_minus = ps.sigma2_minus;

  double v_const = km.variance_constant(der);
  diag.V_hat = fact_der * fact_der * (ps.sigma2_plus + ps.sigma2_minus) / ps.f_hat * v_const;

  PilotDerivative up = global_derivative(data, Side::Above, pilot_degree, ord + 1);
  PilotDerivative um = global_derivative(data, Side::Below, pilot_degree, ord + 1);
  diag.deriv_plus = up.value;
  diag.deriv_minus = um.value;

  double c_bias = km.bias_constant(der, ord + 1) / factorial(ord + 1);
  diag.B_hat = (up.value - sgn * um.value) * c_bias;
  diag.R_hat = regularize
                   ? 3.0 * (up.var_factor * ps.sigma2_plus + um.var_factor * ps.sigma2_minus) *
                         c_bias * c_bias
                   : 0.0;
  diag.B2_plus_reg = diag.B_hat * diag.B_hat + diag.R_hat;

  double scale = std::max({std::fabs(up.value), std::fabs(um.value), 1.0});
  if (diag.B2_plus_reg < 1e-20 * scale * scale) {
    if (!options.fallback_on_degenerate) throw EstimationError("bias constant vanishes");
    std::cerr << "didc: warning: bias constant vanished; using IQR fallback bandwidth\n";
    diag.fallback = true;
    double bw = 1.5 * ps.iqr * std::pow(static_cast<double>(ps.n), -1.0 / (2 * ord + 3));
    if (options.cap_to_data && bw > ps.cap) {
      bw = ps.cap;
      diag.capped = true;
    }
    return bw;
  }

  double bw = mse_bandwidth_formula(diag.V_hat, diag.B2_plus_reg, ps.n, ord, der);
  if (options.cap_to_data && bw > ps.cap) {
    bw = ps.cap;
    diag.capped = true;
  }
  return bw;
}

}  // namespace

std::pair<double, double> density_at_cutoff(const std::vector<double>& z) {
  const auto n = static_cast<double>(z.size());
  if (z.size() < 3) throw EstimationError("too few observations for a density estimate");
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  std::vector<double> s(z);
  std::sort(s.begin(), s.end());
  double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  double spread = std::min(sd, iqr > 0.0 ? iqr / 1.349 : sd);
  if (spread <= 0.0) throw EstimationError("running variable is degenerate");
  double bw = 1.06 * spread * std::pow(n, -0.2);
  double acc = 0.0;
  const double inv_sqrt2pi = 0.3989422804014327;
  for (double v : z) acc += std::exp(-0.5 * (v / bw) * (v / bw));
  return {acc * inv_sqrt2pi / (n * bw), bw};
}

double mse_bandwidth_formula(double V, double D, long n, int p, int nu) {
  if (!(V > 0.0) || !(D > 0.0) || n < 1)
    throw EstimationError("bandwidth formula needs positive variance and bias constants");
  double num = (1.0 + 2.0 * nu) * V;
  double den = 2.0 * static_cast<double>(n) * (1.0 + p - nu) * D;
  return std::pow(num / den, 1.0 / (2.0 * p + 3.0));
}

BandwidthPlan mse_optimal_h(const CrossSection& data, int p, int nu, const KernelSpec& kernel,
                            const BandwidthOptions& options) {
  if (nu > p) throw std::invalid_argument("mse_optimal_h: nu must not exceed p");
  BandwidthPlan plan;
  PilotSet ps = common_pilots(data, options);
  plan.n = ps.n;
  plan.pilot_h = ps.pilot_h;
  // Parity: the one-sided bias constants combine as mu+ - (-1)^{nu+p+1} mu-.
  double sgn = ((nu + p + 1) % 2 == 0) ? 1.0 : -1.0;
  plan.h = select_bandwidth(data, ps, kernel, p, nu, p + 2, sgn, options.regularize_h, options,
                            plan.h_diag);
  return plan;
}

double mse_optimal_b(const CrossSection& data, int p, int q, int nu, const KernelSpec& kernel,
                     const BandwidthOptions& options, BandwidthDiagnostics* diagnostics) {
  if (q <= p) throw std::invalid_argument("q must exceed p");
  PilotSet ps = common_pilots(data, options);
  BandwidthDiagnostics local;
  BandwidthDiagnostics& diag = diagnostics ? *diagnostics : local;
  // s = nu + p + 1 in the parity factor (-1)^{(p+1)+q+s}.
  double sgn = (((p + 1) + q + (nu + p + 1)) % 2 == 0) ? 1.0 : -1.0;
  return select_bandwidth(data, ps, kernel, q, p + 1, q + 2, sgn, options.regularize_b, options,
                          diag);
}

BandwidthPlan plan_bandwidths(const CrossSection& data, int p, int q, int nu,
                              const KernelSpec& kernel, const BandwidthOptions& options) {
  BandwidthPlan plan = mse_optimal_h(data, p, nu, kernel, options);
  plan.b = mse_optimal_b(data, p, q, nu, kernel, options, &plan.b_diag);
  return plan;
}

}  // namespace didc
