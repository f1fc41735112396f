#include "mvjump/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace mvj {

NoiseBundle::NoiseBundle(std::uint64_t seed, std::size_t n_streams, TimeGrid grid, double lambda,
                         MarkLaw mark_law)
    : seed_(seed), lambda_(lambda), grid_(std::move(grid)), mark_law_(std::move(mark_law)) {
    if (!(lambda > 0.0))
        throw std::domain_error("NoiseBundle: dominating rate lambda must be positive");

    brownian_.resize(n_streams);
    events_.resize(n_streams);
    const double t_end = grid_.t_end();

    for (std::size_t i = 0; i < n_streams; ++i) {
        CounterRng brng = make_rng(seed_, i, Substream::Brownian);
        auto& dw = brownian_[i];
        dw.resize(grid_.n_steps());
        for (std::size_t k = 0; k < dw.size(); ++k)
            dw[k] = std::sqrt(grid_.dt(k)) * brng.gaussian();

        CounterRng prng = make_rng(seed_, i, Substream::PoissonEvents);
        auto& ev = events_[i];
        double t = 0.0;
        std::uint64_t ordinal = 0;
        for (;;) {
            t += prng.exponential(lambda_);
            const double z = prng.uniform(0.0, lambda_);
            if (t > t_end) break;
            CounterRng mrng = make_rng(seed_, i, Substream::OwnerMark, ordinal);
            ev.push_back(PoissonEvent{t, z, mark_law_.sample(mrng), ordinal});
            ++ordinal;
        }
    }
}

double NoiseBundle::target_mark(std::size_t owner, std::uint64_t ordinal,
                                std::size_t target) const {
    CounterRng rng{seed_, static_cast<std::uint64_t>(owner),
                   static_cast<std::uint64_t>(Substream::TargetMark), ordinal,
                   static_cast<std::uint64_t>(target)};
    return mark_law_.sample(rng);
}

CounterRng NoiseBundle::initial_rng(std::size_t stream, std::uint64_t salt) const {
    return make_rng(seed_, stream, Substream::InitialState, salt);
}

CounterRng NoiseBundle::compensator_rng(std::size_t step) const {
    return make_rng(seed_, step, Substream::Compensator);
}

NoiseBundle build_bundle(std::uint64_t seed, std::size_t n_streams, const TimeGrid& grid,
                         double lambda, const MarkLaw& mark_law) {
    return NoiseBundle(seed, n_streams, grid, lambda, mark_law);
}

} // namespace mvj
