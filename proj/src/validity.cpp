#include "didc/validity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "didc/bandwidth.hpp"
#include "didc/mathutil.hpp"
#include "didc/rng.hpp"

namespace didc {

BandwidthRule bandwidth_rule_from_string(const std::string& name) {
  if (name == "smallest") return BandwidthRule::Smallest;
  if (name == "biggest") return BandwidthRule::Biggest;
  if (name == "pooled") return BandwidthRule::Pooled;
  throw std::invalid_argument("unknown bandwidth rule: " + name);
}

std::string to_string(BandwidthRule rule) {
  switch (rule) {
    case BandwidthRule::Smallest: return "smallest";
    case BandwidthRule::Biggest: return "biggest";
    case BandwidthRule::Pooled: return "pooled";
  }
  return "?";
}

namespace {

double rule_bandwidth(const PanelDataset& panel, const std::vector<std::string>& periods,
                      BandwidthRule rule, const KernelSpec& kernel) {
  BandwidthOptions options;
  if (rule == BandwidthRule::Pooled) {
    CrossSection pooled;
    for (const auto& t : periods) {
      CrossSection cs = slice_period(panel, t);
      pooled.z.insert(pooled.z.end(), cs.z.begin(), cs.z.end());
      pooled.y.insert(pooled.y.end(), cs.y.begin(), cs.y.end());
    }
    return mse_optimal_h(pooled, 1, 0, kernel, options).h;
  }
  double best = rule == BandwidthRule::Smallest ? std::numeric_limits<double>::infinity() : 0.0;
  for (const auto& t : periods) {
    double h = mse_optimal_h(slice_period(panel, t), 1, 0, kernel, options).h;
    best = rule == BandwidthRule::Smallest ? std::min(best, h) : std::max(best, h);
  }
  return best;
}

}  // namespace

WaldTestResult wald_time_invariance(const PanelDataset& panel,
                                    const std::vector<std::string>& pre_periods,
                                    BandwidthRule rule, const KernelSpec& kernel,
                                    bool literal_slope_only) {
  const int K = static_cast<int>(pre_periods.size());
  if (K < 2) throw std::invalid_argument("wald test needs at least 2 pre-treatment periods");
  const std::string& post = panel.period_order().back();
  for (const auto& t : pre_periods) {
    if (t == post)
      throw std::invalid_argument("wald test: period " + t + " is the post-treatment period");
    (void)panel.period_index(t);
  }

  WaldTestResult result;
  result.bandwidth_rule = rule;
  const double h = rule_bandwidth(panel, pre_periods, rule, kernel);
  result.bandwidth_used = h;

  // Per-period regressors; coefficients for period k start at block*k.
  const int block = literal_slope_only ? 2 : 4;
  const int ncoef = literal_slope_only ? 1 + block * K : block * K;
  const int theta_offset = literal_slope_only ? 1 : 2;  // position inside a block

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> ys, ws;
  for (int k = 0; k < K; ++k) {
    CrossSection cs = slice_period(panel, pre_periods[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      double w = kernel_weight(cs.z[i] / h, kernel) / h;
      if (w <= 0.0) continue;
      Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(ncoef);
      double d = cs.z[i] >= 0.0 ? 1.0 : 0.0;
      if (literal_slope_only) {
        x(0) = 1.0;
        x(1 + block * k + 0) = cs.z[i];
        x(1 + block * k + 1) = d * cs.z[i];
      } else {
        x(block * k + 0) = 1.0;
        x(block * k + 1) = cs.z[i];
        x(block * k + 2) = d;
        x(block * k + 3) = d * cs.z[i];
      }
      rows.push_back(x);
      ys.push_back(cs.y[i]);
      ws.push_back(w);
    }
  }
  const long N = static_cast<long>(rows.size());
  if (N <= ncoef) throw EstimationError("wald test: too few in-bandwidth observations");

  Eigen::MatrixXd X(N, ncoef);
  Eigen::VectorXd y(N), w(N);
  for (long i = 0; i < N; ++i) {
    X.row(i) = rows[static_cast<std::size_t>(i)];
    y(i) = ys[static_cast<std::size_t>(i)];
    w(i) = ws[static_cast<std::size_t>(i)];
  }

  Eigen::MatrixXd Xw = w.asDiagonal() * X;
  Eigen::MatrixXd xtx = Xw.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success) throw EstimationError("wald test: singular stacked design");
  Eigen::VectorXd beta = ldlt.solve(Xw.transpose() * y);
  Eigen::VectorXd resid = y - X * beta;

  // HC3-type sandwich for the weighted fit: residuals are inflated by the
  // leverage of each observation in the weighted design.
  Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(ncoef, ncoef));
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(ncoef, ncoef);
  for (long i = 0; i < N; ++i) {
    Eigen::VectorXd xi = X.row(i).transpose();
    double lev = w(i) * xi.dot(bread * xi);
    if (lev > 0.9999) lev = 0.9999;
    double u = resid(i) / (1.0 - lev);
    Eigen::VectorXd xw = w(i) * xi;
    meat.noalias() += (u * u) * xw * xw.transpose();
  }
  Eigen::MatrixXd V = bread * meat * bread;

  result.theta_hat.resize(static_cast<std::size_t>(K));
  result.theta_se.resize(static_cast<std::size_t>(K));
  auto theta_index = [&](int k) {
    return literal_slope_only ? 1 + block * k + theta_offset - 1 + 1  // slope interaction
                              : block * k + theta_offset;
  };
  for (int k = 0; k < K; ++k) {
    int idx = theta_index(k);
    result.theta_hat[static_cast<std::size_t>(k)] = beta(idx);
    result.theta_se[static_cast<std::size_t>(k)] = std::sqrt(V(idx, idx));
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(K - 1, ncoef);
  for (int j = 0; j + 1 < K; ++j) {
    R(j, theta_index(j)) = 1.0;
    R(j, theta_index(j + 1)) = -1.0;
  }
  Eigen::VectorXd r = R * beta;
  Eigen::MatrixXd rvr = R * V * R.transpose();
  double wald = r.dot(rvr.ldlt().solve(r));
  result.df_num = K - 1;
  result.df_den = N - ncoef;
  result.f_stat = wald / result.df_num;
  result.p_value = f_tail(result.f_stat, result.df_num, static_cast<double>(result.df_den));
  return result;
}

namespace {

Eigen::MatrixXd series_basis(const std::vector<double>& z, int K) {
  const auto n = static_cast<long>(z.size());
  Eigen::MatrixXd X(n, K);
  for (long i = 0; i < n; ++i) {
    double pw = 1.0;
    for (int j = 0; j < K; ++j) {
      X(i, j) = pw;
      pw *= z[static_cast<std::size_t>(i)];
    }
  }
  // Rescale the non-constant columns to unit sample variance.
  for (int j = 1; j < K; ++j) {
    double mean = X.col(j).mean();
    double sd = std::sqrt((X.col(j).array() - mean).square().sum() / (n - 1));
    if (sd > 0.0) X.col(j) /= sd;
  }
  return X;
}

// Cumulative-sum statistic over the z-sorted fitted differences.
double ks_statistic(const Eigen::VectorXd& diff, const std::vector<long>& z_order) {
  double acc = 0.0, best = 0.0;
  for (long i : z_order) {
    acc += diff(i);
    best = std::max(best, std::fabs(acc));
  }
  return best / std::sqrt(static_cast<double>(diff.size()));
}

}  // namespace

KsSideResult ks_time_invariance(const PanelDataset& panel, const std::string& t_a,
                                const std::string& t_b, Side side, int K, int B,
                                uint64_t rng_seed) {
  if (B < 100) throw std::invalid_argument("ks test: need at least 100 bootstrap replications");
  const std::string& post = panel.period_order().back();
  if (t_a == post || t_b == post)
    throw std::invalid_argument("ks test: both periods must be pre-treatment");

  CrossSection ca = slice_period(panel, t_a);
  CrossSection cb = slice_period(panel, t_b);
  std::vector<double> z;
  std::vector<double> ya, yb;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    bool on_side = (side == Side::Above) ? (ca.z[i] >= 0.0) : (ca.z[i] < 0.0);
    if (!on_side) continue;
    z.push_back(ca.z[i]);
    ya.push_back(ca.y[i]);
    yb.push_back(cb.y[i]);
  }
  const long n = static_cast<long>(z.size());
  if (K <= 0) K = std::min(8, static_cast<int>(std::ceil(2.0 * std::pow(n, 0.2))));
  if (n < K + 2) throw EstimationError("ks test: side sample too small for K");

  Eigen::MatrixXd X = series_basis(z, K);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(X.transpose() * X);
  if (ldlt.info() != Eigen::Success) throw EstimationError("ks test: singular series design");

  Eigen::VectorXd va = Eigen::Map<const Eigen::VectorXd>(ya.data(), n);
  Eigen::VectorXd vb = Eigen::Map<const Eigen::VectorXd>(yb.data(), n);
  Eigen::VectorXd ga = ldlt.solve(X.transpose() * va);
  Eigen::VectorXd gb = ldlt.solve(X.transpose() * vb);

  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0L);
  std::sort(order.begin(), order.end(),
            [&](long a, long b2) { return z[static_cast<std::size_t>(a)] < z[static_cast<std::size_t>(b2)]; });

  KsSideResult result;
  result.side = side;
  result.K = K;
  result.B = B;
  result.ks = ks_statistic(X * (ga - gb), order);

  // Recentered bootstrap: the null-imposed mean is the pooled fit, and the
  // unit-level residual pair is resampled jointly to keep the within-unit
  // dependence across periods.
  Eigen::VectorXd gpool = ldlt.solve(X.transpose() * (0.5 * (va + vb)));
  Eigen::VectorXd m = X * gpool;
  Eigen::VectorXd ra = va - X * ga;
  Eigen::VectorXd rb = vb - X * gb;

  long exceed = 0;
  Eigen::VectorXd bsa(n), bsb(n);
  for (int rep = 0; rep < B; ++rep) {
    CounterRng rng(rng_seed, static_cast<uint64_t>(rep) + 1 +
                                 (side == Side::Above ? 0u : 0x80000000u));
    for (long i = 0; i < n; ++i) {
      long j = static_cast<long>(rng.below(static_cast<uint64_t>(n)));
      bsa(i) = m(i) + ra(j);
      bsb(i) = m(i) + rb(j);
    }
    Eigen::VectorXd gsa = ldlt.solve(X.transpose() * bsa);
    Eigen::VectorXd gsb = ldlt.solve(X.transpose() * bsb);
    if (ks_statistic(X * (gsa - gsb), order) >= result.ks) ++exceed;
  }
  result.p_value = static_cast<double>(exceed) / B;
  return result;
}

KsTestResult ks_time_invariance_both(const PanelDataset& panel, const std::string& t_a,
                                     const std::string& t_b, int K, int B, uint64_t rng_seed) {
  KsSideResult above = ks_time_invariance(panel, t_a, t_b, Side::Above, K, B, rng_seed);
  KsSideResult below = ks_time_invariance(panel, t_a, t_b, Side::Below, K, B, rng_seed);
  KsTestResult both;
  both.ks_plus = above.ks;
  both.p_plus = above.p_value;
  both.ks_minus = below.ks;
  both.p_minus = below.p_value;
  both.K = above.K;
  both.B = B;
  return both;
}

}  // namespace didc
