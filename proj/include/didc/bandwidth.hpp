#pragma once

#include "didc/data.hpp"
#include "didc/kernels.hpp"
#include "didc/lpreg.hpp"

namespace didc {

// Plug-in ingredients behind one bandwidth. Substituting V_hat and
// B2_plus_reg back into mse_bandwidth_formula reproduces the reported value.
struct BandwidthDiagnostics {
  double f_hat = 0.0;          // density of z at the cutoff
  double sigma2_plus = 0.0;
  double sigma2_minus = 0.0;
  double deriv_plus = 0.0;     // pilot one-sided derivative estimates
  double deriv_minus = 0.0;
  double V_hat = 0.0;          // variance constant
  double B_hat = 0.0;          // bias constant
  double R_hat = 0.0;          // regularization term (0 when disabled)
  double B2_plus_reg = 0.0;    // B_hat^2 + R_hat (the denominator actually used)
  bool capped = false;
  bool fallback = false;
};

struct BandwidthPlan {
  double h = 0.0;
  double b = 0.0;
  double pilot_h = 0.0;  // Silverman bandwidth used for the density estimate
  long n = 0;
  BandwidthDiagnostics h_diag;
  BandwidthDiagnostics b_diag;
};

struct BandwidthOptions {
  // Adds a term proportional to the sampling variance of the pilot
  // derivative estimates to the squared bias constant, keeping the point
  // bandwidth stable when the bias constant is near zero.
  bool regularize_h = true;
  // The bias bandwidth uses the plain plug-in formula by default.
  bool regularize_b = false;
  // Never smooth past the data: cap at the shorter side's |z| range.
  bool cap_to_data = true;
  // When the denominator degenerates, fall back to 1.5*IQR(z)*n^{-1/(2p+3)}
  // with a warning instead of throwing.
  bool fallback_on_degenerate = false;
  VarianceMethod variance_method = VarianceMethod::NearestNeighbor;
};

// h = ((1+2nu) V / (2 n (1+p-nu) D))^{1/(2p+3)} with D = B^2 (+ regularizer).
double mse_bandwidth_formula(double V, double D, long n, int p, int nu);

BandwidthPlan mse_optimal_h(const CrossSection& data, int p, int nu, const KernelSpec& kernel,
                            const BandwidthOptions& options = {});

double mse_optimal_b(const CrossSection& data, int p, int q, int nu, const KernelSpec& kernel,
                     const BandwidthOptions& options = {},
                     BandwidthDiagnostics* diagnostics = nullptr);

// Both bandwidths from one pass over the pilot estimates.
BandwidthPlan plan_bandwidths(const CrossSection& data, int p, int q, int nu,
                              const KernelSpec& kernel, const BandwidthOptions& options = {});

// Gaussian KDE at 0 with Silverman's rule; returns {f_hat, bandwidth}.
std::pair<double, double> density_at_cutoff(const std::vector<double>& z);

}  // namespace didc
