#ifndef MVJUMP_NOISE_HPP
#define MVJUMP_NOISE_HPP

#include <cstdint>
#include <vector>

#include "mvjump/grid.hpp"
#include "mvjump/model.hpp"
#include "mvjump/rng.hpp"

namespace mvj {

/// One candidate point of the dominating Poisson process of a stream.
/// Candidates are accepted downstream by thinning (z <= f at the left limit).
struct PoissonEvent {
    double time;        // in (0, T]
    double z;           // uniform level on [0, lambda]
    double owner_mark;  // the event owner's mark coordinate
    std::uint64_t ordinal;
};

/// Seeded Brownian increments and marked Poisson candidate streams. A bundle
/// is a deterministic function of (seed, N, grid, lambda); stream i depends
/// only on (seed, i), so enlarging N preserves streams 0..N-1. Immutable
/// after construction; the N-particle system and the i.i.d. limit copies
/// consume the identical randomness through it (synchronous coupling).
class NoiseBundle {
public:
    NoiseBundle(std::uint64_t seed, std::size_t n_streams, TimeGrid grid, double lambda,
                MarkLaw mark_law);

    std::uint64_t seed() const { return seed_; }
    std::size_t n_streams() const { return brownian_.size(); }
    double lambda() const { return lambda_; }
    const TimeGrid& grid() const { return grid_; }
    const MarkLaw& mark_law() const { return mark_law_; }

    /// Increment over step k has variance grid.dt(k).
    const std::vector<double>& brownian(std::size_t stream) const { return brownian_[stream]; }

    const std::vector<PoissonEvent>& events(std::size_t stream) const { return events_[stream]; }

    /// Lazily drawn per-target mark coordinate of one collective-jump event:
    /// a pure function of (seed, owner, ordinal, target), so a coupled
    /// re-simulation sees the same mark.
    double target_mark(std::size_t owner, std::uint64_t ordinal, std::size_t target) const;

    /// Generator for the i.i.d. initial draw of stream i; salt separates
    /// deliberately independent draws of coupled systems.
    CounterRng initial_rng(std::size_t stream, std::uint64_t salt = 0) const;

    /// Generator for compensator mark/atom sampling at one grid step.
    CounterRng compensator_rng(std::size_t step) const;

private:
    std::uint64_t seed_;
    double lambda_;
    TimeGrid grid_;
    MarkLaw mark_law_;
    std::vector<std::vector<double>> brownian_;
    std::vector<std::vector<PoissonEvent>> events_;
};

/// Read-only view over a bundle; the same streams drive the limit copies.
class NoiseView {
public:
    NoiseView(const NoiseBundle& bundle) : bundle_(&bundle) {}
    const NoiseBundle& operator*() const { return *bundle_; }
    const NoiseBundle* operator->() const { return bundle_; }

private:
    const NoiseBundle* bundle_;
};

NoiseBundle build_bundle(std::uint64_t seed, std::size_t n_streams, const TimeGrid& grid,
                         double lambda, const MarkLaw& mark_law);

inline NoiseView split_for_limit(const NoiseBundle& bundle) { return NoiseView(bundle); }

} // namespace mvj

#endif
