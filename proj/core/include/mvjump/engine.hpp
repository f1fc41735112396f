#ifndef MVJUMP_ENGINE_HPP
#define MVJUMP_ENGINE_HPP

#include <cstddef>
#include <vector>

#include "mvjump/measure.hpp"
#include "mvjump/model.hpp"
#include "mvjump/noise.hpp"

namespace mvj {

/// One candidate Poisson event as processed by an engine run. Accepted
/// events of owner j carry the Psi displacement of j and the mean of the N
/// collective Theta/N displacements (the full per-target list only when
/// EngineOptions::record_theta is set).
struct JumpLogEntry {
    double time = 0.0;
    std::size_t owner = 0;
    bool accepted = false;
    double psi = 0.0;
    double theta_mean = 0.0;
    std::size_t n_targets = 0;
    std::vector<double> theta;  // per-target displacements, optional
};

/// Trajectories sampled at grid nodes plus the jump-event log. Node times
/// are absolute (windowed runs keep the parent grid's clock).
struct PathEnsemble {
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // [node][particle]
    std::vector<JumpLogEntry> jump_log;

    std::size_t n_particles() const { return states.empty() ? 0 : states.front().size(); }
    std::size_t n_nodes() const { return times.size(); }
    double state(std::size_t node, std::size_t particle) const { return states[node][particle]; }
    EmpiricalMeasure measure_at(std::size_t node) const {
        return EmpiricalMeasure::from_samples(states[node]);
    }
};

struct EngineOptions {
    /// i.i.d. mark pairs per step for compensator estimation.
    std::size_t n_mark_samples = 64;
    /// Above this atom count the compensator switches from the exact
    /// atom sum to Monte Carlo subsampling (target-dependent Theta only).
    std::size_t max_compensator_atoms = 512;
    /// Keep the per-target displacement list in the jump log.
    bool record_theta = false;
    /// Abort with a diagnostic when a coefficient exceeds its declared
    /// sup-norm along the trajectory.
    bool enforce_declared_bounds = false;
    /// Run steps [first_step, first_step + n_steps) of the bundle grid
    /// (n_steps = 0 means through the end). Windowed solvers use this.
    std::size_t first_step = 0;
    std::size_t n_steps = 0;
    /// Explicit initial states (window restarts); otherwise drawn i.i.d.
    /// from the initial law through the bundle's per-stream generators.
    const std::vector<double>* initial_states = nullptr;
    const InitialLaw* initial_law_override = nullptr;
    std::uint64_t init_salt = 0;
};

/// Simulates the N-particle system with mean-field drift/diffusion, thinned
/// own jumps Psi and simultaneous collective jumps Theta/N. Euler-Maruyama
/// with step-frozen coefficients; candidate events processed in global time
/// order within each step, all displacements of one event computed from the
/// pre-event left limits and applied atomically.
PathEnsemble simulate_particle_system(const ModelSpec& spec, std::size_t n_particles,
                                      const NoiseView& noise, const EngineOptions& opts = {});

/// Simulates independent copies of the limit system against a frozen measure
/// flow: drift b plus the collective-jump compensator, diffusion, and own
/// jumps Psi by thinning of the copy's stream. Flow grid must equal the
/// bundle grid.
PathEnsemble simulate_limit_copies(const ModelSpec& spec, const MeasureFlow& flow,
                                   std::size_t n_copies, const NoiseView& noise,
                                   const EngineOptions& opts = {});

/// Martingale defect of the collective-jump term for particle 0: accumulated
/// applied Theta/N jumps minus the compensator integral along the particle
/// trajectory.
struct GnPath {
    std::vector<double> times;
    std::vector<double> values;  // G^N at grid nodes
    double sup_abs = 0.0;
};

GnPath estimate_gn(const ModelSpec& spec, std::size_t n_particles, const NoiseView& noise,
                   const EngineOptions& opts = {});

/// Dominating thinning rate for a model: ||f||_inf, floored away from zero
/// so rateless models still yield a (practically empty) event stream.
double dominating_rate(const ModelSpec& spec);

} // namespace mvj

#endif
