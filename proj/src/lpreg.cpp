#include "didc/lpreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "didc/mathutil.hpp"

namespace didc {

double LocalPolyFit::derivative(int nu) const {
  if (nu < 0 || nu > p) throw std::invalid_argument("derivative order exceeds fit order");
  return factorial(nu) * delta(nu);
}

Eigen::VectorXd LocalPolyFit::vartheta_h(int q) const {
  if (q >= p + 1 && q <= p + 2) return vartheta_cache[static_cast<std::size_t>(q - p - 1)];
  throw std::invalid_argument("vartheta_h cached only for q in {p+1, p+2}");
}

double LocalPolyFit::bias_constant(int nu, int r) const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p + 1);
  e(nu) = 1.0;
  return factorial(nu) * e.dot(gamma_h.ldlt().solve(vartheta_h(r)));
}

LocalPolyFit fit_one_sided(const CrossSection& data, Side side, int p, double h,
                           const KernelSpec& kernel) {
  if (!(h > 0.0)) throw EstimationError("bandwidth must be positive");
  if (p < 0) throw std::invalid_argument("polynomial order must be >= 0");
  const auto n = static_cast<int>(data.size());

  LocalPolyFit fit;
  fit.side = side;
  fit.p = p;
  fit.h = h;
  fit.n_total = n;
  fit.weights.assign(static_cast<std::size_t>(n), 0.0);

  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    double z = data.z[static_cast<std::size_t>(i)];
    bool on_side = (side == Side::Above) ? (z >= 0.0) : (z < 0.0);
    if (!on_side) continue;
    double w = kernel_weight(z / h, kernel) / h;
    if (w <= 0.0) continue;
    fit.weights[static_cast<std::size_t>(i)] = w;
    active.push_back(i);
  }
  fit.n_eff = static_cast<int>(active.size());
  if (fit.n_eff < p + 1)
    throw EstimationError("insufficient effective observations: " + std::to_string(fit.n_eff) +
                          " kernel-positive points for order " + std::to_string(p));

  const int m = p + 1;
  Eigen::MatrixXd X(fit.n_eff, m);  // sqrt(w)-scaled design in the (z/h) basis
  Eigen::VectorXd Y(fit.n_eff);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd vt1 = Eigen::VectorXd::Zero(m), vt2 = Eigen::VectorXd::Zero(m);
  for (int r = 0; r < fit.n_eff; ++r) {
    int i = active[static_cast<std::size_t>(r)];
    double u = data.z[static_cast<std::size_t>(i)] / h;
    double w = fit.weights[static_cast<std::size_t>(i)];
    double sw = std::sqrt(w);
    double pow_u = 1.0;
    for (int j = 0; j < m; ++j) {
      X(r, j) = sw * pow_u;
      pow_u *= u;
    }
    // pow_u now holds u^{p+1}
    Eigen::VectorXd rp = X.row(r).transpose() / sw;
    gamma.noalias() += w * rp * rp.transpose();
    vt1.noalias() += w * pow_u * rp;
    vt2.noalias() += w * pow_u * u * rp;
    Y(r) = sw * data.y[static_cast<std::size_t>(i)];
  }
  gamma /= n;
  vt1 /= n;
  vt2 /= n;
  fit.gamma_h = gamma;
  fit.vartheta_cache = {vt1, vt2};

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(m - 1);
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw EstimationError("singular one-sided design (condition number above 1e12)");
  fit.delta_scaled = svd.solve(Y);

  fit.delta.resize(m);
  double hp = 1.0;
  for (int j = 0; j < m; ++j) {
    fit.delta(j) = fit.delta_scaled(j) / hp;  // H_p(h) unscaling
    hp *= h;
  }

  fit.residuals.assign(static_cast<std::size_t>(n), 0.0);
  for (int i : active) {
    double u = data.z[static_cast<std::size_t>(i)] / h;
    double pred = 0.0, pow_u = 1.0;
    for (int j = 0; j < m; ++j) {
      pred += fit.delta_scaled(j) * pow_u;
      pow_u *= u;
    }
    fit.residuals[static_cast<std::size_t>(i)] = data.y[static_cast<std::size_t>(i)] - pred;
  }
  return fit;
}

double ResidualVariance::side_mean(const CrossSection& data, Side side) const {
  double sum = 0.0;
  int cnt = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool on_side = (side == Side::Above) ? (data.z[i] >= 0.0) : (data.z[i] < 0.0);
    if (!on_side) continue;
    sum += sigma2[i];
    ++cnt;
  }
  if (cnt == 0) throw EstimationError("no observations on requested side");
  return sum / cnt;
}

namespace {

void nn_variance_side(const CrossSection& data, const std::vector<std::size_t>& idx,
                      int J, std::vector<double>& out) {
  const int ns = static_cast<int>(idx.size());
  if (ns < 2) throw EstimationError("nearest-neighbor variance needs >= 2 observations per side");
  // idx is sorted by z; neighbors are found by expanding left/right.
  for (int a = 0; a < ns; ++a) {
    int take = std::min(J, ns - 1);
    int lo = a - 1, hi = a + 1;
    double acc = 0.0;
    double zi = data.z[idx[static_cast<std::size_t>(a)]];
    for (int t = 0; t < take; ++t) {
      double dlo = lo >= 0 ? std::fabs(data.z[idx[static_cast<std::size_t>(lo)]] - zi)
                           : std::numeric_limits<double>::infinity();
      double dhi = hi < ns ? std::fabs(data.z[idx[static_cast<std::size_t>(hi)]] - zi)
                           : std::numeric_limits<double>::infinity();
      if (dlo <= dhi) {
        acc += data.y[idx[static_cast<std::size_t>(lo)]];
        --lo;
      } else {
        acc += data.y[idx[static_cast<std::size_t>(hi)]];
        ++hi;
      }
    }
    double diff = data.y[idx[static_cast<std::size_t>(a)]] - acc / take;
    out[idx[static_cast<std::size_t>(a)]] =
        static_cast<double>(take) / (take + 1) * diff * diff;
  }
}

void pilot_residual_side(const CrossSection& data, const std::vector<std::size_t>& idx,
                         int degree, std::vector<double>& out) {
  const int ns = static_cast<int>(idx.size());
  int deg = std::min(degree, ns - 1);
  Eigen::MatrixXd X(ns, deg + 1);
  Eigen::VectorXd Y(ns);
  for (int r = 0; r < ns; ++r) {
    double z = data.z[idx[static_cast<std::size_t>(r)]];
    double pw = 1.0;
    for (int j = 0; j <= deg; ++j) {
      X(r, j) = pw;
      pw *= z;
    }
    Y(r) = data.y[idx[static_cast<std::size_t>(r)]];
  }
  Eigen::VectorXd beta = X.colPivHouseholderQr().solve(Y);
  Eigen::VectorXd resid = Y - X * beta;
  for (int r = 0; r < ns; ++r)
    out[idx[static_cast<std::size_t>(r)]] = resid(r) * resid(r);
}

}  // namespace

ResidualVariance estimate_residual_variance(const CrossSection& data, VarianceMethod method,
                                            int neighbors, int pilot_degree) {
  ResidualVariance rv;
  rv.sigma2.assign(data.size(), 0.0);
  std::vector<std::size_t> above, below;
  for (std::size_t i = 0; i < data.size(); ++i)
    (data.z[i] >= 0.0 ? above : below).push_back(i);
  auto by_z = [&](std::size_t a, std::size_t b) { return data.z[a] < data.z[b]; };
  std::sort(above.begin(), above.end(), by_z);
  std::sort(below.begin(), below.end(), by_z);

  for (const auto* side : {&above, &below}) {
    if (side->empty()) continue;
    if (method == VarianceMethod::NearestNeighbor) {
      nn_variance_side(data, *side, neighbors, rv.sigma2);
    } else {
      pilot_residual_side(data, *side, pilot_degree, rv.sigma2);
    }
  }
  return rv;
}

Eigen::MatrixXd sample_psi(const LocalPolyFit& fit_a, const LocalPolyFit& fit_b,
                           const ResidualVariance& sigma, const CrossSection& data) {
  if (fit_a.side != fit_b.side) throw std::invalid_argument("sample_psi: side mismatch");
  if (fit_a.n_total != fit_b.n_total ||
      fit_a.n_total != static_cast<int>(data.size()))
    throw std::invalid_argument("sample_psi: fits do not share the data");
  const int ma = fit_a.p + 1, mb = fit_b.p + 1;
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(ma, mb);
  Eigen::VectorXd ra(ma), rb(mb);
  for (std::size_t i = 0; i < data.size(); ++i) {
    double wa = fit_a.weights[i], wb = fit_b.weights[i];
    if (wa <= 0.0 || wb <= 0.0) continue;
    double ua = data.z[i] / fit_a.h, ub = data.z[i] / fit_b.h;
    double pw = 1.0;
    for (int j = 0; j < ma; ++j) {
      ra(j) = pw;
      pw *= ua;
    }
    pw = 1.0;
    for (int j = 0; j < mb; ++j) {
      rb(j) = pw;
      pw *= ub;
    }
    psi.noalias() += (wa * wb * sigma.sigma2[i]) * ra * rb.transpose();
  }
  return psi / fit_a.n_total;
}

}  // namespace didc
