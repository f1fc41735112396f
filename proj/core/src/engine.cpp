#include "mvjump/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvj {

namespace {

std::vector<double> draw_initial_states(const ModelSpec& spec, std::size_t n,
                                        const NoiseBundle& bundle, const EngineOptions& opts) {
    if (opts.initial_states) {
        if (opts.initial_states->size() != n)
            throw std::invalid_argument("engine: initial_states size mismatch");
        return *opts.initial_states;
    }
    const InitialLaw& law = opts.initial_law_override ? *opts.initial_law_override : spec.initial_law;
    if (!law.sample) throw std::invalid_argument("engine: model has no initial law");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng = bundle.initial_rng(i, opts.init_salt);
        x[i] = law.sample(rng);
    }
    return x;
}

[[noreturn]] void abort_non_finite(double t, std::size_t particle, double b, double s, double f) {
    throw std::runtime_error("simulation aborted: non-finite state at t=" + std::to_string(t) +
                             " particle=" + std::to_string(particle) + " (b=" + std::to_string(b) +
                             " sigma=" + std::to_string(s) + " f=" + std::to_string(f) + ")");
}

void check_declared(const ModelSpec& spec, double t, std::size_t i, double b, double s, double f) {
    const double tol = 1e-9;
    if (std::abs(b) > spec.bounds.drift_sup + tol || std::abs(s) > spec.bounds.diffusion_sup + tol ||
        f > spec.bounds.rate_sup + tol)
        throw std::runtime_error("declared sup-norm exceeded at t=" + std::to_string(t) +
                                 " particle=" + std::to_string(i) + " (b=" + std::to_string(b) +
                                 " sigma=" + std::to_string(s) + " f=" + std::to_string(f) + ")");
}

struct StepRange {
    std::size_t first;
    std::size_t last;  // exclusive
};

StepRange step_range(const TimeGrid& grid, const EngineOptions& opts) {
    const std::size_t first = opts.first_step;
    const std::size_t last = opts.n_steps ? first + opts.n_steps : grid.n_steps();
    if (first >= last || last > grid.n_steps())
        throw std::invalid_argument("engine: step range outside grid");
    return {first, last};
}

// Accumulates the collective-jump martingale defect for particle 0.
struct GnAccumulator {
    double jumps = 0.0;
    double compensator = 0.0;
    GnPath path;
};

struct EventCursor {
    std::size_t next = 0;
};

struct Candidate {
    double time;
    std::size_t stream;
    const PoissonEvent* ev;
};

// Mark-averaged Theta at (x_src, x_tgt) times the (clamped) rate at x_src.
double rated_theta(const ModelSpec& spec, double x_src, double x_tgt, const EmpiricalMeasure& m,
                   const std::vector<std::pair<double, double>>& mark_pairs) {
    const double f = std::max(0.0, spec.rate(x_src, m));
    if (f == 0.0) return 0.0;
    if (spec.collective_mark_free) return f * spec.collective_jump(x_src, x_tgt, m, 0.0, 0.0);
    double acc = 0.0;
    for (const auto& [v1, v2] : mark_pairs) acc += spec.collective_jump(x_src, x_tgt, m, v1, v2);
    return f * acc / static_cast<double>(mark_pairs.size());
}

} // namespace

double dominating_rate(const ModelSpec& spec) {
    return spec.bounds.rate_sup > 0.0 ? spec.bounds.rate_sup : 1e-9;
}

static PathEnsemble run_particle_system(const ModelSpec& spec, std::size_t n, const NoiseView& noise,
                                        const EngineOptions& opts, GnAccumulator* gn) {
    const NoiseBundle& bundle = *noise;
    const TimeGrid& grid = bundle.grid();
    if (n == 0) throw std::invalid_argument("engine: need at least one particle");
    if (bundle.n_streams() < n)
        throw std::invalid_argument("engine: bundle has fewer streams than particles");
    if (spec.bounds.rate_sup > bundle.lambda() + 1e-12)
        throw std::invalid_argument("engine: bundle lambda below the model's ||f||_inf");
    const auto [first, last] = step_range(grid, opts);

    std::vector<double> x = draw_initial_states(spec, n, bundle, opts);

    PathEnsemble out;
    out.times.reserve(last - first + 1);
    out.states.reserve(last - first + 1);
    out.times.push_back(grid.node(first));
    out.states.push_back(x);

    std::vector<EventCursor> cursors(n);
    const double t_first = grid.node(first);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ev = bundle.events(i);
        while (cursors[i].next < ev.size() && ev[cursors[i].next].time <= t_first)
            ++cursors[i].next;
    }

    std::vector<Candidate> cands;
    std::vector<double> theta(n);
    std::vector<std::pair<double, double>> gn_marks;
    const double inv_n = 1.0 / static_cast<double>(n);

    if (gn) {
        gn->path.times.push_back(grid.node(first));
        gn->path.values.push_back(0.0);
    }

    for (std::size_t k = first; k < last; ++k) {
        const double t0 = grid.node(k);
        const double t1 = grid.node(k + 1);
        const double dt = grid.dt(k);

        EmpiricalMeasure mu = EmpiricalMeasure::from_samples(x);

        if (gn && spec.has_collective_jump()) {
            gn_marks.clear();
            if (!spec.collective_mark_free) {
                CounterRng crng = bundle.compensator_rng(k);
                for (std::size_t s = 0; s < opts.n_mark_samples; ++s)
                    gn_marks.emplace_back(spec.mark_law.sample(crng), spec.mark_law.sample(crng));
            }
            double comp = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                comp += rated_theta(spec, x[j], x[0], mu, gn_marks);
            gn->compensator += dt * comp * inv_n;
        }

        // drift + diffusion, coefficients frozen at step start
        for (std::size_t i = 0; i < n; ++i) {
            const double b = spec.drift(x[i], mu);
            const double s = spec.diffusion(x[i], mu);
            if (opts.enforce_declared_bounds) check_declared(spec, t0, i, b, s, 0.0);
            x[i] = x[i] + b * dt + s * bundle.brownian(i)[k];
            if (!std::isfinite(x[i])) abort_non_finite(t0, i, b, s, 0.0);
        }

        // candidate events of this step, globally time-ordered
        cands.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& ev = bundle.events(i);
            auto& c = cursors[i];
            while (c.next < ev.size() && ev[c.next].time <= t1) {
                cands.push_back(Candidate{ev[c.next].time, i, &ev[c.next]});
                ++c.next;
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            return a.time != b.time ? a.time < b.time : a.stream < b.stream;
        });

        EmpiricalMeasure mu_cur = cands.empty() ? std::move(mu) : EmpiricalMeasure::from_samples(x);
        for (const Candidate& c : cands) {
            const std::size_t j = c.stream;
            const double f = spec.rate(x[j], mu_cur);
            if (opts.enforce_declared_bounds) check_declared(spec, c.time, j, 0.0, 0.0, f);
            JumpLogEntry entry;
            entry.time = c.time;
            entry.owner = j;
            entry.accepted = c.ev->z <= f;
            entry.n_targets = spec.has_collective_jump() ? n : 0;
            if (entry.accepted) {
                // all displacements from the pre-event left limits
                const double psi = spec.has_self_jump()
                                       ? spec.self_jump(x[j], mu_cur, c.ev->owner_mark)
                                       : 0.0;
                double theta_sum = 0.0;
                if (spec.has_collective_jump()) {
                    const double x_src = x[j];
                    for (std::size_t i = 0; i < n; ++i) {
                        const double v_tgt = spec.collective_mark_free
                                                 ? 0.0
                                                 : bundle.target_mark(j, c.ev->ordinal, i);
                        theta[i] = inv_n * spec.collective_jump(x_src, x[i], mu_cur,
                                                                c.ev->owner_mark, v_tgt);
                        theta_sum += theta[i];
                    }
                }
                // applied atomically
                x[j] += psi;
                if (spec.has_collective_jump())
                    for (std::size_t i = 0; i < n; ++i) x[i] += theta[i];
                entry.psi = psi;
                entry.theta_mean = spec.has_collective_jump() ? theta_sum * inv_n : 0.0;
                if (opts.record_theta && spec.has_collective_jump())
                    entry.theta.assign(theta.begin(), theta.end());
                if (gn && spec.has_collective_jump()) gn->jumps += theta[0];
                for (std::size_t i = 0; i < n; ++i)
                    if (!std::isfinite(x[i])) abort_non_finite(c.time, i, 0.0, 0.0, f);
                mu_cur = EmpiricalMeasure::from_samples(x);
            }
            out.jump_log.push_back(std::move(entry));
        }

        out.times.push_back(t1);
        out.states.push_back(x);
        if (gn) {
            gn->path.times.push_back(t1);
            gn->path.values.push_back(gn->jumps - gn->compensator);
        }
    }
    return out;
}

PathEnsemble simulate_particle_system(const ModelSpec& spec, std::size_t n_particles,
                                      const NoiseView& noise, const EngineOptions& opts) {
    return run_particle_system(spec, n_particles, noise, opts, nullptr);
}

GnPath estimate_gn(const ModelSpec& spec, std::size_t n_particles, const NoiseView& noise,
                   const EngineOptions& opts) {
    GnAccumulator gn;
    run_particle_system(spec, n_particles, noise, opts, &gn);
    for (double v : gn.path.values) gn.path.sup_abs = std::max(gn.path.sup_abs, std::abs(v));
    return std::move(gn.path);
}

namespace {

/// Per-step estimator of the mean-field jump compensator drift
///   D(x') = int int Theta(x, x', m, v1, v2) f(x, m) dnu(v) dm(x).
/// Exact weighted atom sum when the frozen measure is small; Monte Carlo
/// over (atom, mark-pair) triples beyond max_compensator_atoms. Target-free
/// Theta collapses to one shared value per step.
class CompensatorEstimator {
public:
    CompensatorEstimator(const ModelSpec& spec, const EmpiricalMeasure& m, CounterRng rng,
                         const EngineOptions& opts)
        : spec_(spec), m_(m) {
        if (!spec.has_collective_jump()) return;
        active_ = true;
        const bool atom_exact = m.size() <= opts.max_compensator_atoms;
        if (!spec.collective_mark_free) {
            mark_pairs_.reserve(opts.n_mark_samples);
            for (std::size_t s = 0; s < opts.n_mark_samples; ++s)
                mark_pairs_.emplace_back(spec.mark_law.sample(rng), spec.mark_law.sample(rng));
        }
        if (atom_exact) {
            atom_idx_.resize(m.size());
            for (std::size_t a = 0; a < m.size(); ++a) atom_idx_[a] = a;
            atom_w_ = m.weights();
        } else {
            // weighted subsample of atoms, one per mark draw
            const std::size_t s_atoms = std::max<std::size_t>(opts.n_mark_samples, 1);
            std::vector<double> cum(m.size());
            double c = 0.0;
            for (std::size_t a = 0; a < m.size(); ++a) cum[a] = (c += m.weight(a));
            atom_idx_.resize(s_atoms);
            atom_w_.assign(s_atoms, 1.0 / static_cast<double>(s_atoms));
            for (std::size_t s = 0; s < s_atoms; ++s) {
                const double u = rng.u01();
                atom_idx_[s] = static_cast<std::size_t>(
                    std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
                if (atom_idx_[s] >= m.size()) atom_idx_[s] = m.size() - 1;
            }
        }
        if (spec_.collective_target_free) {
            shared_ = evaluate(0.0);
            has_shared_ = true;
        }
    }

    double operator()(double x_tgt) const {
        if (!active_) return 0.0;
        if (has_shared_) return shared_;
        return evaluate(x_tgt);
    }

private:
    double evaluate(double x_tgt) const {
        double d = 0.0;
        for (std::size_t s = 0; s < atom_idx_.size(); ++s)
            d += atom_w_[s] * rated_theta(spec_, m_.position(atom_idx_[s]), x_tgt, m_, mark_pairs_);
        return d;
    }

    const ModelSpec& spec_;
    const EmpiricalMeasure& m_;
    bool active_ = false;
    bool has_shared_ = false;
    double shared_ = 0.0;
    std::vector<std::pair<double, double>> mark_pairs_;
    std::vector<std::size_t> atom_idx_;
    std::vector<double> atom_w_;
};

} // namespace

PathEnsemble simulate_limit_copies(const ModelSpec& spec, const MeasureFlow& flow,
                                   std::size_t n_copies, const NoiseView& noise,
                                   const EngineOptions& opts) {
    const NoiseBundle& bundle = *noise;
    const TimeGrid& grid = bundle.grid();
    if (!(flow.grid() == grid))
        throw std::domain_error("simulate_limit_copies: flow grid differs from bundle grid");
    if (n_copies == 0) throw std::invalid_argument("engine: need at least one copy");
    if (bundle.n_streams() < n_copies)
        throw std::invalid_argument("engine: bundle has fewer streams than copies");
    if (spec.bounds.rate_sup > bundle.lambda() + 1e-12)
        throw std::invalid_argument("engine: bundle lambda below the model's ||f||_inf");
    const auto [first, last] = step_range(grid, opts);

    std::vector<double> x = draw_initial_states(spec, n_copies, bundle, opts);

    PathEnsemble out;
    out.times.reserve(last - first + 1);
    out.states.reserve(last - first + 1);
    out.times.push_back(grid.node(first));
    out.states.push_back(x);

    std::vector<EventCursor> cursors(n_copies);
    const double t_first = grid.node(first);
    for (std::size_t i = 0; i < n_copies; ++i) {
        const auto& ev = bundle.events(i);
        while (cursors[i].next < ev.size() && ev[cursors[i].next].time <= t_first)
            ++cursors[i].next;
    }

    for (std::size_t k = first; k < last; ++k) {
        const double t0 = grid.node(k);
        const double t1 = grid.node(k + 1);
        const double dt = grid.dt(k);
        const EmpiricalMeasure& mu = flow.at(k);

        CompensatorEstimator comp(spec, mu, bundle.compensator_rng(k), opts);

        for (std::size_t i = 0; i < n_copies; ++i) {
            double b = spec.drift(x[i], mu);
            const double s = spec.diffusion(x[i], mu);
            if (opts.enforce_declared_bounds) check_declared(spec, t0, i, b, s, 0.0);
            if (spec.has_collective_jump()) b += comp(x[i]);
            x[i] = x[i] + b * dt + s * bundle.brownian(i)[k];
            if (!std::isfinite(x[i])) abort_non_finite(t0, i, b, s, 0.0);

            // own jumps by thinning of this copy's stream
            const auto& ev = bundle.events(i);
            auto& c = cursors[i];
            while (c.next < ev.size() && ev[c.next].time <= t1) {
                const PoissonEvent& e = ev[c.next];
                ++c.next;
                const double f = spec.rate(x[i], mu);
                JumpLogEntry entry;
                entry.time = e.time;
                entry.owner = i;
                entry.accepted = e.z <= f;
                if (entry.accepted && spec.has_self_jump()) {
                    const double psi = spec.self_jump(x[i], mu, e.owner_mark);
                    x[i] += psi;
                    entry.psi = psi;
                    if (!std::isfinite(x[i])) abort_non_finite(e.time, i, 0.0, 0.0, f);
                }
                out.jump_log.push_back(std::move(entry));
            }
        }
        out.times.push_back(t1);
        out.states.push_back(x);
    }

    // keep the global-time order of the merged log
    std::stable_sort(out.jump_log.begin(), out.jump_log.end(),
                     [](const JumpLogEntry& a, const JumpLogEntry& b) { return a.time < b.time; });
    return out;
}

} // namespace mvj
