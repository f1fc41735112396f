#include "mvjump/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace mvj {

double osgood_domain_cap() { return std::exp(-2.0); }

double osgood_m(double x) {
    if (!(x > 0.0) || x > osgood_domain_cap())
        throw std::domain_error("osgood_m: x must lie in (0, e^{-2}]");
    return std::log(-std::log(x)) - std::log(2.0);
}

double osgood_m_inverse(double y) {
    if (!(y >= 0.0)) throw std::domain_error("osgood_m_inverse: y must be nonnegative");
    return std::exp(-2.0 * std::exp(y));
}

double osgood_bound(double c, double gamma_integral) {
    if (!(c > 0.0) || c >= osgood_domain_cap())
        throw std::domain_error("osgood_bound: c must lie in (0, e^{-2})");
    if (!(gamma_integral >= 0.0))
        throw std::domain_error("osgood_bound: gamma_integral must be nonnegative");
    const double y = osgood_m(c) - gamma_integral;
    if (y <= 0.0) return osgood_domain_cap();
    return osgood_m_inverse(y);
}

double gronwall_rate_constant(const ModelSpec& spec) {
    const double a = spec.exp_exponent;
    const ModelBounds& bd = spec.bounds;
    if (!(a > 0.0) || bd.drift_sup < 0.0 || bd.diffusion_sup < 0.0 || bd.rate_sup < 0.0 ||
        bd.self_jump_exp_sup < 1.0 || bd.collective_jump_exp_sup < 1.0)
        throw std::domain_error("gronwall_rate_constant: missing or invalid declared bounds");
    double k = a * bd.drift_sup + 0.5 * a * a * bd.diffusion_sup * bd.diffusion_sup;
    if (spec.has_self_jump()) k += bd.rate_sup * bd.self_jump_exp_sup;
    if (spec.has_collective_jump()) k += bd.rate_sup * bd.collective_jump_exp_sup;
    return k;
}

double gronwall_exp_moment_bound(const ModelSpec& spec, double e_exp_x0, double t) {
    if (!(e_exp_x0 >= 1.0))
        throw std::domain_error("gronwall_exp_moment_bound: E e^{a|X_0|} must be >= 1");
    if (!(t >= 0.0)) throw std::domain_error("gronwall_exp_moment_bound: t must be nonnegative");
    return e_exp_x0 * std::exp(gronwall_rate_constant(spec) * t);
}

double chaos_rate_bound(double s0, std::size_t n_particles, double c1, double c2, std::size_t k) {
    if (!(s0 >= 0.0)) throw std::domain_error("chaos_rate_bound: s0 must be nonnegative");
    if (n_particles == 0) throw std::domain_error("chaos_rate_bound: need n_particles >= 1");
    if (!(c1 > 0.0) || !(c2 > 0.0) || c2 > 1.0)
        throw std::domain_error("chaos_rate_bound: need c1 > 0 and c2 in (0, 1]");
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_particles));
    double s = s0;
    for (std::size_t i = 0; i < k; ++i) s = c1 * std::pow(s + inv_sqrt_n, c2);
    return s;
}

PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw std::domain_error("fit_power_law: need >= 3 paired points");
    const std::size_t n = xs.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::domain_error("fit_power_law: all points must be strictly positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
        sx += lx[i];
        sy += ly[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::domain_error("fit_power_law: xs must not all coincide");
    PowerLawFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace mvj
