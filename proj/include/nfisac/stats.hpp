#ifndef NFISAC_STATS_HPP
#define NFISAC_STATS_HPP

// Small special-function kit for detection thresholds.

namespace nfisac {

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Chi-square CDF with k degrees of freedom.
double chi_square_cdf(double x, double k);

// Inverse chi-square CDF (quantile). p in (0, 1), k > 0.
double chi_square_quantile(double p, double k);

}  // namespace nfisac

#endif
