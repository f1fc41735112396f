#ifndef MVJUMP_PICARD_HPP
#define MVJUMP_PICARD_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "mvjump/engine.hpp"
#include "mvjump/measure.hpp"
#include "mvjump/model.hpp"

namespace mvj {

/// Starting flow of the fixed-point iteration. Both choices use the same
/// initial-state draws; they differ only in the frozen flow of iteration 0.
enum class Mu0Start {
    InitialLaw,  // constant flow at the empirical law of the initial draws
    DiracZero,   // constant flow at the Dirac mass in 0
};

struct PicardOptions {
    std::size_t n_samples = 5000;  // M atoms per law
    double tol = 0.02;             // stop when sup-over-nodes W1 between iterates < tol
    std::size_t max_iter = 50;     // per window
    std::uint64_t seed = 1;
    Mu0Start start = Mu0Start::InitialLaw;
    /// Override of the model's declared L when choosing the contraction
    /// window T_w = min(1 / (16 L^2), horizon); <= 0 uses the model's value.
    double lipschitz_override = 0.0;
    const InitialLaw* initial_law_override = nullptr;
    EngineOptions engine;  // compensator sampling controls
};

struct WindowDiagnostics {
    std::size_t first_step = 0;
    std::size_t n_steps = 0;
    /// d_n = sup over the window's nodes of W1 between consecutive iterates.
    std::vector<double> distances;
    bool converged = false;
};

struct PicardDiagnostics {
    std::vector<WindowDiagnostics> windows;
    std::size_t total_iterations = 0;
    bool converged = false;       // every window hit tol
    double final_distance = 0.0;  // last d_n of the last window
};

/// Fixed-point iteration on measure flows: freeze the flow, advance the M
/// coupled sample paths through the limit dynamics (drift plus collective
/// compensator, thinned own jumps), refreeze at the empirical node laws, and
/// repeat with the same noise (common random numbers) until the sup-W1 gap
/// between consecutive flows drops below tol. The horizon is processed in
/// contraction windows of length min(1/(16 L^2), horizon) snapped to grid
/// steps, each restarting from the previous window's terminal samples.
std::pair<MeasureFlow, PicardDiagnostics> solve_flow(const ModelSpec& spec, const TimeGrid& grid,
                                                     const PicardOptions& opts = {});

struct UniquenessReport {
    bool conclusive = false;  // both runs converged
    bool pass = false;        // conclusive and distance < 2 * tol
    double distance = 0.0;    // flow_sup_w1 of the two final flows
    double tol = 0.0;
    PicardDiagnostics diag_a;
    PicardDiagnostics diag_b;
};

/// Runs the solver twice with identical initial draws and noise but different
/// iteration-0 flows (the initial law vs the Dirac mass at 0) and compares
/// the final flows; a unique fixed point forces them together.
UniquenessReport uniqueness_probe(const ModelSpec& spec, const TimeGrid& grid,
                                  const PicardOptions& opts = {});

} // namespace mvj

#endif
