#include "mvjump/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvj {

namespace {

const char* kProbeDisclaimer =
    "sampling-based probe: a pass certifies the inequality on the probed set only";

EmpiricalMeasure random_cloud(CounterRng& rng, double x_range) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.u01() * 12.0);
    std::vector<std::pair<double, double>> atoms(k);
    double total = 0.0;
    for (auto& [p, w] : atoms) {
        p = rng.uniform(-x_range, x_range);
        w = 0.05 + rng.u01();
        total += w;
    }
    for (auto& [p, w] : atoms) w /= total;
    return EmpiricalMeasure::from_atoms(std::move(atoms));
}

} // namespace

PointSampler default_point_sampler(double x_range) {
    return [x_range](CounterRng& rng) {
        return ProbePoint{rng.uniform(-x_range, x_range), random_cloud(rng, x_range)};
    };
}

PairSampler default_pair_sampler(double x_range) {
    auto point = default_point_sampler(x_range);
    return [point](CounterRng& rng) { return std::make_pair(point(rng), point(rng)); };
}

LipschitzProbeReport probe_local_lipschitz(const ModelSpec& spec, const PairSampler& sampler,
                                           std::size_t n_pairs, std::uint64_t seed,
                                           std::size_t n_marks) {
    if (n_pairs < 1) throw std::invalid_argument("probe_local_lipschitz: n_pairs must be >= 1");
    CounterRng rng = make_rng(seed, 0, Substream::Probe);

    LipschitzProbeReport report;
    report.n_pairs = n_pairs;
    report.note = kProbeDisclaimer;
    const double a = spec.exp_exponent;
    const double L = spec.lipschitz_const;

    for (std::size_t p = 0; p < n_pairs; ++p) {
        auto [p1, p2] = sampler(rng);

        double left = std::abs(spec.drift(p1.x, p1.m) - spec.drift(p2.x, p2.m));
        if (spec.has_self_jump()) {
            const double f1 = std::max(0.0, spec.rate(p1.x, p1.m));
            const double f2 = std::max(0.0, spec.rate(p2.x, p2.m));
            const double fmin = std::min(f1, f2);
            // int_{R+} |Phi1 1{z<=f1} - Phi2 1{z<=f2}| dz
            //   = fmin |Phi1 - Phi2| + (fmax - fmin) |Phi of the larger-rate argument|
            double mc = 0.0;
            for (std::size_t s = 0; s < n_marks; ++s) {
                const double u = spec.mark_law.sample(rng);
                const double phi1 = spec.self_jump(p1.x, p1.m, u);
                const double phi2 = spec.self_jump(p2.x, p2.m, u);
                const double tail = f1 >= f2 ? std::abs(phi1) : std::abs(phi2);
                mc += fmin * std::abs(phi1 - phi2) + (std::max(f1, f2) - fmin) * tail;
            }
            left += mc / static_cast<double>(n_marks);
        }

        const double right =
            L *
            (1.0 + std::abs(p1.x) + std::abs(p2.x) + p1.m.exp_moment(a) + p2.m.exp_moment(a)) *
            (std::abs(p1.x - p2.x) + w1(p1.m, p2.m));

        double ratio;
        if (right == 0.0) {
            if (left == 0.0) continue;  // identical pair
            ratio = std::numeric_limits<double>::infinity();
        } else {
            ratio = left / right;
        }
        if (ratio > report.max_ratio) {
            report.max_ratio = ratio;
            report.witness_x1 = p1.x;
            report.witness_x2 = p2.x;
            report.witness_left = left;
            report.witness_right = right;
        }
    }
    report.pass = report.max_ratio <= 1.0;
    return report;
}

BoundednessProbeReport probe_boundedness(const ModelSpec& spec, const PointSampler& sampler,
                                         std::size_t n_points, std::uint64_t seed,
                                         std::size_t n_marks) {
    if (n_points < 1) throw std::invalid_argument("probe_boundedness: n_points must be >= 1");
    CounterRng rng = make_rng(seed, 1, Substream::Probe);

    BoundednessProbeReport report;
    report.n_points = n_points;
    report.note = kProbeDisclaimer;
    report.min_rate = std::numeric_limits<double>::infinity();
    const double a = spec.exp_exponent;

    auto check = [&](const char* what, double observed, double declared, double at_x) {
        if (observed > declared)
            report.violations.push_back(BoundednessViolation{what, observed, declared, at_x});
    };

    for (std::size_t p = 0; p < n_points; ++p) {
        ProbePoint pt = sampler(rng);

        const double b = std::abs(spec.drift(pt.x, pt.m));
        const double sg = std::abs(spec.diffusion(pt.x, pt.m));
        const double f = spec.rate(pt.x, pt.m);
        report.max_drift_abs = std::max(report.max_drift_abs, b);
        report.max_diffusion_abs = std::max(report.max_diffusion_abs, sg);
        report.max_rate = std::max(report.max_rate, f);
        report.min_rate = std::min(report.min_rate, f);
        check("|b|", b, spec.bounds.drift_sup, pt.x);
        check("|sigma|", sg, spec.bounds.diffusion_sup, pt.x);
        check("f", f, spec.bounds.rate_sup, pt.x);
        if (f < 0.0)
            report.violations.push_back(BoundednessViolation{"f >= 0", f, 0.0, pt.x});

        if (spec.has_self_jump()) {
            double acc = 0.0;
            for (std::size_t s = 0; s < n_marks; ++s) {
                const double u = spec.mark_law.sample(rng);
                acc += std::exp(a * std::abs(spec.self_jump(pt.x, pt.m, u)));
            }
            acc /= static_cast<double>(n_marks);
            report.max_self_jump_exp = std::max(report.max_self_jump_exp, acc);
            check("int e^{a|Phi|} drho", acc, spec.bounds.self_jump_exp_sup, pt.x);
        }
        if (spec.has_collective_jump()) {
            const double x_tgt = rng.uniform(-std::abs(pt.x) - 1.0, std::abs(pt.x) + 1.0);
            double acc = 0.0;
            for (std::size_t s = 0; s < n_marks; ++s) {
                const double v1 = spec.mark_law.sample(rng);
                const double v2 = spec.mark_law.sample(rng);
                acc += std::exp(a * std::abs(spec.collective_jump(pt.x, x_tgt, pt.m, v1, v2)));
            }
            acc /= static_cast<double>(n_marks);
            report.max_collective_jump_exp = std::max(report.max_collective_jump_exp, acc);
            check("int e^{a|Theta|} dnu", acc, spec.bounds.collective_jump_exp_sup, pt.x);
        }
    }
    report.pass = report.violations.empty();
    return report;
}

} // namespace mvj
