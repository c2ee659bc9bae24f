#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace didc {

// Estimation-level failures (bad bandwidths, singular designs, degenerate
// plug-ins). Input/usage problems throw std::invalid_argument instead.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

double factorial(int n);

// Standard normal CDF and quantile. The quantile uses a rational
// approximation refined by one Halley step, accurate to ~1e-15.
double normal_cdf(double x);
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b) via continued fraction.
double incomplete_beta(double a, double b, double x);

// Upper-tail p-value of the F(df1, df2) distribution.
double f_tail(double f, double df1, double df2);

// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

}  // namespace didc
