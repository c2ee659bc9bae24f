#pragma once

#include <Eigen/Dense>
#include <vector>

#include "didc/data.hpp"
#include "didc/kernels.hpp"

namespace didc {

enum class Side { Above, Below };

// One-sided kernel-weighted polynomial fit at the boundary. Coefficients are
// in the raw basis r_p(z) = (1, z, ..., z^p), so delta[0] is the boundary
// level and nu! * delta[nu] the nu-th one-sided derivative at 0. Internally
// the design is scaled by the bandwidth for conditioning; gamma_h and the
// vartheta vectors are the sample matrices in that scaled basis.
struct LocalPolyFit {
  Side side = Side::Above;
  int p = 1;
  double h = 0.0;
  int n_total = 0;  // cross-section size (the 1/n in all sample matrices)
  int n_eff = 0;    // observations with positive kernel weight

  Eigen::VectorXd delta;         // raw-basis coefficients
  Eigen::VectorXd delta_scaled;  // (z/h)-basis coefficients
  Eigen::MatrixXd gamma_h;       // Z_p' W Z_p / n
  Eigen::VectorXd vartheta_h(int q) const;  // Z_p' W S_q / n
  std::vector<double> weights;   // 1{side} K_h(z_i), per observation
  std::vector<double> residuals; // y_i - r_p(z_i)' delta, zero off-side

  double boundary_level() const { return delta(0); }
  double derivative(int nu) const;

  // nu! e_nu' gamma_h^{-1} vartheta_{p,r}(h): the sample bias constant.
  double bias_constant(int nu, int r) const;

  std::vector<Eigen::VectorXd> vartheta_cache;  // q = p+1, p+2
};

LocalPolyFit fit_one_sided(const CrossSection& data, Side side, int p, double h,
                           const KernelSpec& kernel);

// Per-observation conditional-variance estimates for the outcome.
struct ResidualVariance {
  std::vector<double> sigma2;
  double side_mean(const CrossSection& data, Side side) const;
};

enum class VarianceMethod { NearestNeighbor, PilotResidual };

// NearestNeighbor: J same-side nearest neighbors in z,
//   sigma2_i = J/(J+1) * (y_i - neighbor mean)^2.
// PilotResidual: squared residuals from a per-side global polynomial fit.
ResidualVariance estimate_residual_variance(const CrossSection& data,
                                            VarianceMethod method = VarianceMethod::NearestNeighbor,
                                            int neighbors = 3,
                                            int pilot_degree = 4);

// Sample matrix Z_p(h)' W(h) diag(sigma2) W(b) Z_q(b) / n for two fits that
// share a side and underlying data.
Eigen::MatrixXd sample_psi(const LocalPolyFit& fit_a, const LocalPolyFit& fit_b,
                           const ResidualVariance& sigma, const CrossSection& data);

}  // namespace didc
