#ifndef MVJUMP_EXPERIMENTS_HPP
#define MVJUMP_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mvjump/analysis.hpp"
#include "mvjump/model.hpp"
#include "mvjump/picard.hpp"

namespace mvj {

/// Mean and standard error of one aggregation cell (e.g. one particle count).
struct SummaryPoint {
    double x = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

// ---------------------------------------------------------------- chaos ----

struct ChaosConfig {
    std::vector<std::size_t> ns = {10, 40, 160, 640};
    double t_end = 1.0;
    double dt = 1e-3;
    std::size_t replicas = 50;
    std::uint64_t seed = 1;
    /// Shared initial draws give a zero initial coupling gap; disable to
    /// exercise independent initial conditions.
    bool shared_initial = true;
    PicardOptions picard;  // solver settings for the limit flow
    unsigned n_threads = 0;
};

struct ChaosRow {
    std::size_t n = 0;
    std::size_t replica = 0;
    double sup_distance = 0.0;  // sup over grid nodes of |X^{N,1} - Xbar^1|
};

struct ChaosResult {
    std::string model_id;
    std::uint64_t seed = 0;
    double dt = 0.0;
    double t_end = 0.0;
    std::size_t replicas = 0;

    std::vector<ChaosRow> rows;  // sorted by (n, replica)
    std::vector<SummaryPoint> per_n;
    PowerLawFit fit;  // log E sup-distance against log N

    /// Windowed errors S_k = E sup over contraction window k, per particle
    /// count (aligned with per_n); windows have length min(1/(16 L^2), T).
    std::vector<double> window_end_times;
    std::vector<std::vector<double>> window_errors;

    /// Recursion constants fitted on windows 1-2 of the largest N, then
    /// checked predictively on window 3.
    double c1 = 0.0;
    double c2 = 0.0;
    double window3_predicted = 0.0;
    double window3_observed = 0.0;
    bool recursion_within_factor3 = false;
    std::string recursion_note;

    PicardDiagnostics flow_diagnostics;
};

/// Synchronous-coupling propagation-of-chaos experiment: for each replica one
/// noise bundle drives both the N-particle system and the limit copy of
/// particle 1 against the pre-solved limit flow; the same bundle seed serves
/// every N (stream prefix property), so errors across N are positively
/// coupled. Refuses to run when the limit flow has not converged.
ChaosResult run_chaos(const ModelSpec& spec, const ChaosConfig& cfg);

// ----------------------------------------------------- rate experiments ----

struct RateConfig {
    std::vector<std::size_t> ns;
    std::size_t replicas = 50;
    std::uint64_t seed = 1;
    double t_end = 1.0;  // gn only
    double dt = 1e-3;    // gn only
    std::size_t reference_samples = 1000000;  // fournier only
    unsigned n_threads = 0;
};

struct RateRow {
    std::size_t n = 0;
    std::size_t replica = 0;
    double value = 0.0;
};

struct RateResult {
    std::string id;
    std::uint64_t seed = 0;
    std::vector<RateRow> rows;  // sorted by (n, replica)
    std::vector<SummaryPoint> per_n;
    PowerLawFit fit;
    bool warning = false;
    std::string note;
};

/// E W2 between an N-sample empirical measure of `law` and a large-sample
/// reference measure, per N, with a fitted log-log slope (theory: -1/2).
/// Laws with too-heavy tails get a warning annotation.
RateResult run_fournier_check(const InitialLaw& law, const RateConfig& cfg);

/// E sup_t |G^N_t|^2 (collective-jump martingale defect of particle 1) per
/// N, with a fitted slope (theory: -1).
RateResult run_gn_rate(const ModelSpec& spec, const RateConfig& cfg);

// --------------------------------------------------------- moment audit ----

struct MomentAuditConfig {
    std::size_t n = 100;  // particles per replica
    double t_end = 1.0;
    double dt = 1e-3;
    std::size_t replicas = 32;
    std::uint64_t seed = 1;
    unsigned n_threads = 0;
};

struct MomentAuditResult {
    std::string model_id;
    double k_constant = 0.0;  // exponential-moment growth rate
    double e_exp_x0 = 0.0;    // E e^{a|X_0|} from the initial law

    /// Per grid node: replica mean / stderr of the sample mean of e^{a|X_t|},
    /// and the closed-form bound at that time.
    std::vector<double> times;
    std::vector<SummaryPoint> observed;
    std::vector<double> bound;

    double max_ratio = 0.0;      // max over t of observed mean / bound
    double witness_time = 0.0;   // argmax
    double max_excess_sigmas = 0.0;  // max over t of (mean - bound) / stderr
    bool saturated = false;
    bool pass = false;  // mean <= bound + 3 stderr at every node
};

/// Simulates the particle system and audits the running sample exponential
/// moment against the closed-form growth bound.
MomentAuditResult run_moment_audit(const ModelSpec& spec, const MomentAuditConfig& cfg);

/// Deterministic per-task seed derivation: a pure function of (seed, tag,
/// index), independent of thread schedule.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

} // namespace mvj

#endif
