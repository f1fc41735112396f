#ifndef MVJUMP_PROBES_HPP
#define MVJUMP_PROBES_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mvjump/model.hpp"

namespace mvj {

/// Probes are sampling-based, not symbolic: a pass certifies the checked
/// inequality only on the probed set (see ProbeReport::note).

struct ProbePoint {
    double x;
    EmpiricalMeasure m;
};

using PointSampler = std::function<ProbePoint(CounterRng&)>;
using PairSampler = std::function<std::pair<ProbePoint, ProbePoint>(CounterRng&)>;

/// x uniform on [-x_range, x_range]; m a random weighted cloud of 1..12
/// atoms on the same range.
PointSampler default_point_sampler(double x_range);
PairSampler default_pair_sampler(double x_range);

struct LipschitzProbeReport {
    bool pass = false;
    double max_ratio = 0.0;  // left side / right side; +inf on degenerate pairs
    std::size_t n_pairs = 0;
    // witness of the max ratio (the violating pair when pass is false)
    double witness_x1 = 0.0;
    double witness_x2 = 0.0;
    double witness_left = 0.0;
    double witness_right = 0.0;
    std::string note;
};

/// Evaluates the left side of the locally-Lipschitz inequality (drift
/// difference plus the thinned-jump L1 difference, Monte Carlo over marks
/// and exact integration over z) against L times the right side, for
/// n_pairs sampled pairs. Ratio <= 1 everywhere means pass.
LipschitzProbeReport probe_local_lipschitz(const ModelSpec& spec, const PairSampler& sampler,
                                           std::size_t n_pairs, std::uint64_t seed = 7,
                                           std::size_t n_marks = 256);

struct BoundednessViolation {
    std::string quantity;
    double observed = 0.0;
    double declared = 0.0;
    double at_x = 0.0;
};

struct BoundednessProbeReport {
    bool pass = false;
    std::size_t n_points = 0;
    double max_drift_abs = 0.0;
    double max_diffusion_abs = 0.0;
    double max_rate = 0.0;
    double min_rate = 0.0;
    double max_self_jump_exp = 1.0;
    double max_collective_jump_exp = 1.0;
    std::vector<BoundednessViolation> violations;
    std::string note;
};

/// Checks declared sup-norms, rate nonnegativity, and Monte Carlo estimates
/// of the exponential jump integrals against the declared bounds.
BoundednessProbeReport probe_boundedness(const ModelSpec& spec, const PointSampler& sampler,
                                         std::size_t n_points, std::uint64_t seed = 11,
                                         std::size_t n_marks = 512);

} // namespace mvj

#endif
