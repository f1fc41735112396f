#ifndef MVJUMP_ANALYSIS_HPP
#define MVJUMP_ANALYSIS_HPP

#include <cstddef>
#include <vector>

#include "mvjump/model.hpp"

namespace mvj {

/// Upper end of the Osgood modulus domain, e^{-2}.
double osgood_domain_cap();

/// M(x) = integral of 1 / (-s ln s) from x to e^{-2} = ln(-ln x) - ln 2,
/// for x in (0, e^{-2}]. Strictly decreasing, M(e^{-2}) = 0, M(0+) = +inf.
double osgood_m(double x);

/// Closed inverse of M on [0, inf): M^{-1}(y) = exp(-2 e^{y}).
double osgood_m_inverse(double y);

/// Osgood comparison bound: a nonnegative rho with rho(t0) <= c and
/// rho' <= gamma(t) * (-rho ln rho) satisfies
/// rho(t) <= M^{-1}(M(c) - gamma_integral); when M(c) - gamma_integral <= 0
/// the bound is capped at the (vacuous) domain end e^{-2}.
double osgood_bound(double c, double gamma_integral);

/// The exponential-moment growth constant
///   K = a ||b||_inf + (1/2) a^2 ||sigma||_inf^2
///       + ||f||_inf sup int e^{a|Phi|} drho   (own jumps)
///       + ||f||_inf sup int e^{a|Theta|} dnu  (collective jumps, if any),
/// assembled from the model's declared bounds.
double gronwall_rate_constant(const ModelSpec& spec);

/// sup_{s <= t} E e^{a|X_s|} <= e_exp_x0 * e^{K t}; e_exp_x0 = E e^{a|X_0|}.
double gronwall_exp_moment_bound(const ModelSpec& spec, double e_exp_x0, double t);

/// Recursive propagation-of-chaos speed: starting from S_0 = s0, applies
///   S_k = c1 (S_{k-1} + N^{-1/2})^{c2}
/// k times and returns S_k. Non-increasing in N for c2 in (0, 1].
double chaos_rate_bound(double s0, std::size_t n_particles, double c1, double c2, std::size_t k);

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;  // of the log-log line
    double r2 = 0.0;
};

/// Least squares of ln y against ln x; needs >= 3 strictly positive points.
PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);

} // namespace mvj

#endif
