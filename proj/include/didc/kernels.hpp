#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace didc {

enum class KernelFamily { Triangular, Uniform, Epanechnikov };

KernelFamily kernel_family_from_string(const std::string& name);
std::string to_string(KernelFamily family);

// A symmetric, nonnegative kernel supported on [-kappa, kappa] and normalized
// to integrate to one over its support.
struct KernelSpec {
  KernelFamily family = KernelFamily::Triangular;
  double support = 1.0;
};

double kernel_weight(double u, const KernelSpec& k);

// Limit constants of one-sided local polynomial theory:
//   gamma[j][k]      = int_0^kappa K(u) u^{j+k} du
//   vartheta(q)[j]   = int_0^kappa K(u) u^{j+q} du
//   psi[j][k]        = int_0^kappa K(u)^2 u^{j+k} du
struct KernelMoments {
  int p = 0;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd psi;
  std::vector<Eigen::VectorXd> vartheta_by_q;  // indexed by q = 0..max_q
  const Eigen::VectorXd& vartheta(int q) const;

  // e_nu' gamma^{-1} psi gamma^{-1} e_nu
  double variance_constant(int nu) const;
  // nu! e_nu' gamma^{-1} vartheta_{p,r}
  double bias_constant(int nu, int r) const;
};

// Computed by adaptive quadrature (abs. tol 1e-12) and cached per
// (family, support, p, max_q). Thread-safe.
const KernelMoments& kernel_moments(const KernelSpec& k, int p, int max_q);

}  // namespace didc
