#include "didc/kernels.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "didc/mathutil.hpp"

namespace didc {

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "triangular") return KernelFamily::Triangular;
  if (name == "uniform") return KernelFamily::Uniform;
  if (name == "epanechnikov") return KernelFamily::Epanechnikov;
  throw std::invalid_argument("unknown kernel: " + name);
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Triangular: return "triangular";
    case KernelFamily::Uniform: return "uniform";
    case KernelFamily::Epanechnikov: return "epanechnikov";
  }
  return "?";
}

double kernel_weight(double u, const KernelSpec& k) {
  double t = std::fabs(u) / k.support;
  if (t > 1.0) return 0.0;
  switch (k.family) {
    case KernelFamily::Triangular: return (1.0 - t) / k.support;
    case KernelFamily::Uniform: return 0.5 / k.support;
    case KernelFamily::Epanechnikov: return 0.75 * (1.0 - t * t) / k.support;
  }
  return 0.0;
}

const Eigen::VectorXd& KernelMoments::vartheta(int q) const {
  if (q < 0 || q >= static_cast<int>(vartheta_by_q.size()))
    throw std::invalid_argument("kernel moments: q out of cached range");
  return vartheta_by_q[q];
}

double KernelMoments::variance_constant(int nu) const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p + 1);
  e(nu) = 1.0;
  Eigen::MatrixXd gi = gamma.inverse();
  return e.dot(gi * psi * gi * e);
}

double KernelMoments::bias_constant(int nu, int r) const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p + 1);
  e(nu) = 1.0;
  return factorial(nu) * e.dot(gamma.inverse() * vartheta(r));
}

namespace {

struct CacheKey {
  KernelFamily family;
  double support;
  int p;
  int max_q;
  bool operator<(const CacheKey& o) const {
    return std::tie(family, support, p, max_q) <
           std::tie(o.family, o.support, o.p, o.max_q);
  }
};

double half_moment(const KernelSpec& k, int r, bool squared) {
  auto f = [&](double u) {
    double w = kernel_weight(u, k);
    return (squared ? w * w : w) * std::pow(u, r);
  };
  return integrate(f, 0.0, k.support, 1e-12);
}

}  // namespace

const KernelMoments& kernel_moments(const KernelSpec& k, int p, int max_q) {
  static std::mutex mu;
  static std::map<CacheKey, std::unique_ptr<KernelMoments>> cache;
  if (p < 0) throw std::invalid_argument("kernel_moments: p must be >= 0");
  if (max_q < p + 1) max_q = p + 1;

  CacheKey key{k.family, k.support, p, max_q};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto m = std::make_unique<KernelMoments>();
  m->p = p;
  m->gamma.resize(p + 1, p + 1);
  m->psi.resize(p + 1, p + 1);
  for (int j = 0; j <= p; ++j) {
    for (int kk = j; kk <= p; ++kk) {
      double g = half_moment(k, j + kk, false);
      double s = half_moment(k, j + kk, true);
      m->gamma(j, kk) = m->gamma(kk, j) = g;
      m->psi(j, kk) = m->psi(kk, j) = s;
    }
  }
  m->vartheta_by_q.resize(max_q + 1);
  for (int q = 0; q <= max_q; ++q) {
    Eigen::VectorXd v(p + 1);
    for (int j = 0; j <= p; ++j) v(j) = half_moment(k, j + q, false);
    m->vartheta_by_q[q] = v;
  }
  auto& ref = *m;
  cache.emplace(key, std::move(m));
  return ref;
}

}  // namespace didc
