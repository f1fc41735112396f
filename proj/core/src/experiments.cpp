#include "mvjump/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvjump/engine.hpp"
#include "mvjump/noise.hpp"
#include "mvjump/parallel.hpp"
#include "mvjump/rng.hpp"

namespace mvj {

namespace {

constexpr std::uint64_t kTagChaosFlow = 0xc4a0501;
constexpr std::uint64_t kTagChaosReplica = 0xc4a0502;
constexpr std::uint64_t kTagFournierRef = 0xf0a1701;
constexpr std::uint64_t kTagFournierDraw = 0xf0a1702;
constexpr std::uint64_t kTagGnReplica = 0x6e0a7e01;
constexpr std::uint64_t kTagAuditReplica = 0xa0d17001;

void check_ns(const std::vector<std::size_t>& ns, std::size_t replicas) {
    if (ns.empty()) throw std::invalid_argument("experiment: need at least one particle count");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] == 0) throw std::invalid_argument("experiment: particle counts must be >= 1");
        if (i > 0 && ns[i] <= ns[i - 1])
            throw std::invalid_argument("experiment: particle counts must be increasing");
    }
    if (replicas == 0) throw std::invalid_argument("experiment: need at least one replica");
}

SummaryPoint summarize(double x, const std::vector<double>& values) {
    SummaryPoint s;
    s.x = x;
    s.count = values.size();
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                static_cast<double>(values.size()));
    }
    return s;
}

/// Window end nodes for contraction windows of length min(1/(16 L^2), T).
std::vector<std::size_t> contraction_windows(const TimeGrid& grid, double lipschitz) {
    const double lip = std::max(lipschitz, 1e-12);
    const double t_window = std::min(1.0 / (16.0 * lip * lip), grid.t_end());
    std::vector<std::size_t> ends;
    double start = grid.node(0);
    for (std::size_t k = 1; k <= grid.n_steps(); ++k) {
        if (grid.node(k) - start >= t_window - 1e-12 || k == grid.n_steps()) {
            ends.push_back(k);
            start = grid.node(k);
        }
    }
    return ends;
}

bool fit_slope_if_positive(const std::vector<SummaryPoint>& per_n, PowerLawFit& fit,
                           std::string& note) {
    std::vector<double> xs, ys;
    for (const auto& p : per_n) {
        if (!(p.mean > 0.0)) {
            note = "degenerate: some mean values are zero, no slope fitted";
            return false;
        }
        xs.push_back(p.x);
        ys.push_back(p.mean);
    }
    if (xs.size() < 3) {
        note = "fewer than 3 particle counts, no slope fitted";
        return false;
    }
    fit = fit_power_law(xs, ys);
    return true;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    CounterRng rng = make_rng(seed, index, Substream::Experiment, tag);
    return rng.next_u64();
}

ChaosResult run_chaos(const ModelSpec& spec, const ChaosConfig& cfg) {
    check_ns(cfg.ns, cfg.replicas);
    const TimeGrid grid = TimeGrid::uniform(cfg.t_end, cfg.dt);

    PicardOptions popts = cfg.picard;
    popts.seed = derive_seed(cfg.seed, kTagChaosFlow, 0);
    auto [flow, flow_diag] = solve_flow(spec, grid, popts);
    if (!flow_diag.converged)
        throw std::runtime_error("run_chaos: limit flow did not converge, refusing to run");

    const std::vector<std::size_t> window_ends = contraction_windows(grid, spec.lipschitz_const);
    const std::size_t n_windows = window_ends.size();
    const std::size_t n_counts = cfg.ns.size();
    const std::size_t n_rep = cfg.replicas;

    // [replica][count] sup distance, [replica][count][window] windowed sup
    std::vector<std::vector<double>> sup(n_rep, std::vector<double>(n_counts, 0.0));
    std::vector<std::vector<std::vector<double>>> wsup(
        n_rep, std::vector<std::vector<double>>(n_counts, std::vector<double>(n_windows, 0.0)));

    parallel_for(
        n_rep,
        [&](std::size_t r) {
            const std::uint64_t seed_r = derive_seed(cfg.seed, kTagChaosReplica, r);

            // the limit copy of particle 1 only touches stream 0, so it is
            // simulated once per replica and shared by every N
            NoiseBundle limit_bundle(seed_r, 1, grid, dominating_rate(spec), spec.mark_law);
            EngineOptions lopts;
            lopts.init_salt = cfg.shared_initial ? 0 : 1;
            PathEnsemble limit = simulate_limit_copies(spec, flow, 1, limit_bundle, lopts);

            for (std::size_t c = 0; c < n_counts; ++c) {
                const std::size_t n = cfg.ns[c];
                NoiseBundle bundle(seed_r, n, grid, dominating_rate(spec), spec.mark_law);
                PathEnsemble part = simulate_particle_system(spec, n, bundle);

                std::size_t w = 0;
                for (std::size_t k = 0; k < part.n_nodes(); ++k) {
                    const double d = std::abs(part.state(k, 0) - limit.state(k, 0));
                    sup[r][c] = std::max(sup[r][c], d);
                    if (w < n_windows && k > 0) {
                        wsup[r][c][w] = std::max(wsup[r][c][w], d);
                        if (k == window_ends[w]) ++w;
                    }
                }
            }
        },
        cfg.n_threads);

    ChaosResult res;
    res.model_id = spec.id;
    res.seed = cfg.seed;
    res.dt = cfg.dt;
    res.t_end = cfg.t_end;
    res.replicas = n_rep;
    res.flow_diagnostics = std::move(flow_diag);
    for (std::size_t w = 0; w < n_windows; ++w)
        res.window_end_times.push_back(grid.node(window_ends[w]));

    for (std::size_t c = 0; c < n_counts; ++c) {
        std::vector<double> vals(n_rep);
        for (std::size_t r = 0; r < n_rep; ++r) {
            vals[r] = sup[r][c];
            res.rows.push_back(ChaosRow{cfg.ns[c], r, sup[r][c]});
        }
        res.per_n.push_back(summarize(static_cast<double>(cfg.ns[c]), vals));

        std::vector<double> we(n_windows, 0.0);
        for (std::size_t w = 0; w < n_windows; ++w) {
            for (std::size_t r = 0; r < n_rep; ++r) we[w] += wsup[r][c][w];
            we[w] /= static_cast<double>(n_rep);
        }
        res.window_errors.push_back(std::move(we));
    }

    std::string note;
    fit_slope_if_positive(res.per_n, res.fit, note);

    // fit the recursion S_k = c1 (S_{k-1} + N^{-1/2})^{c2} on windows 1-2 of
    // the largest N (S_0 = 0 under shared initial draws), predict window 3
    if (n_windows < 3) {
        res.recursion_note = "fewer than 3 contraction windows, recursion not checked";
    } else {
        const std::vector<double>& we = res.window_errors.back();
        const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(cfg.ns.back()));
        const double s1 = we[0], s2 = we[1], s3 = we[2];
        if (!(s1 > 0.0) || !(s2 > 0.0) || !(s3 > 0.0)) {
            res.recursion_note = "degenerate: zero window errors, recursion not checked";
        } else {
            res.c2 = std::log(s2 / s1) / std::log((s1 + inv_sqrt_n) / inv_sqrt_n);
            res.c1 = s1 / std::pow(inv_sqrt_n, res.c2);
            res.window3_predicted = res.c1 * std::pow(s2 + inv_sqrt_n, res.c2);
            res.window3_observed = s3;
            const double ratio = res.window3_predicted / res.window3_observed;
            res.recursion_within_factor3 =
                std::isfinite(ratio) && ratio >= 1.0 / 3.0 && ratio <= 3.0;
        }
    }
    return res;
}

RateResult run_fournier_check(const InitialLaw& law, const RateConfig& cfg) {
    check_ns(cfg.ns, cfg.replicas);
    if (!law.sample) throw std::invalid_argument("run_fournier_check: law has no sampler");
    if (cfg.reference_samples < 10 * cfg.ns.back())
        throw std::invalid_argument("run_fournier_check: reference must dwarf the largest N");

    CounterRng ref_rng = make_rng(cfg.seed, 0, Substream::Experiment, kTagFournierRef);
    std::vector<double> ref(cfg.reference_samples);
    for (double& x : ref) x = law.sample(ref_rng);
    const EmpiricalMeasure reference = EmpiricalMeasure::from_samples(std::move(ref));

    RateResult res;
    res.id = "fournier-w2:" + law.id;
    res.seed = cfg.seed;

    // tail probe: q > 4 moments must exist; flag disproportionate 5th moment
    const double m2 = reference.abs_moment(2.0);
    const double m5 = reference.abs_moment(5.0);
    if (!std::isfinite(m5) || m5 > 200.0 * std::pow(m2, 2.5) + 200.0) {
        res.warning = true;
        res.note = "heavy-tail warning: 5th absolute moment disproportionate to the variance";
    }

    const std::size_t n_counts = cfg.ns.size();
    const std::size_t n_rep = cfg.replicas;
    std::vector<double> values(n_counts * n_rep, 0.0);

    parallel_for(
        n_counts * n_rep,
        [&](std::size_t t) {
            const std::size_t c = t / n_rep;
            const std::size_t r = t % n_rep;
            CounterRng rng = make_rng(derive_seed(cfg.seed, kTagFournierDraw, t), 0,
                                      Substream::Experiment);
            std::vector<double> draw(cfg.ns[c]);
            for (double& x : draw) x = law.sample(rng);
            values[t] = w2(EmpiricalMeasure::from_samples(std::move(draw)), reference);
        },
        cfg.n_threads);

    for (std::size_t c = 0; c < n_counts; ++c) {
        std::vector<double> vals(values.begin() + static_cast<std::ptrdiff_t>(c * n_rep),
                                 values.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_rep));
        for (std::size_t r = 0; r < n_rep; ++r)
            res.rows.push_back(RateRow{cfg.ns[c], r, vals[r]});
        res.per_n.push_back(summarize(static_cast<double>(cfg.ns[c]), vals));
    }
    std::string note;
    if (!fit_slope_if_positive(res.per_n, res.fit, note) && res.note.empty()) res.note = note;
    return res;
}

RateResult run_gn_rate(const ModelSpec& spec, const RateConfig& cfg) {
    check_ns(cfg.ns, cfg.replicas);
    const TimeGrid grid = TimeGrid::uniform(cfg.t_end, cfg.dt);

    const std::size_t n_counts = cfg.ns.size();
    const std::size_t n_rep = cfg.replicas;
    std::vector<double> values(n_counts * n_rep, 0.0);

    parallel_for(
        n_counts * n_rep,
        [&](std::size_t t) {
            const std::size_t c = t / n_rep;
            const std::size_t r = t % n_rep;
            const std::uint64_t seed_r = derive_seed(cfg.seed, kTagGnReplica, r);
            NoiseBundle bundle(seed_r, cfg.ns[c], grid, dominating_rate(spec), spec.mark_law);
            const GnPath g = estimate_gn(spec, cfg.ns[c], bundle);
            values[t] = g.sup_abs * g.sup_abs;
        },
        cfg.n_threads);

    RateResult res;
    res.id = "gn-sup-square:" + spec.id;
    res.seed = cfg.seed;
    for (std::size_t c = 0; c < n_counts; ++c) {
        std::vector<double> vals(values.begin() + static_cast<std::ptrdiff_t>(c * n_rep),
                                 values.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_rep));
        for (std::size_t r = 0; r < n_rep; ++r)
            res.rows.push_back(RateRow{cfg.ns[c], r, vals[r]});
        res.per_n.push_back(summarize(static_cast<double>(cfg.ns[c]), vals));
    }
    std::string note;
    if (!fit_slope_if_positive(res.per_n, res.fit, note)) res.note = note;
    return res;
}

MomentAuditResult run_moment_audit(const ModelSpec& spec, const MomentAuditConfig& cfg) {
    if (cfg.n == 0 || cfg.replicas == 0)
        throw std::invalid_argument("run_moment_audit: counts must be >= 1");
    if (!spec.initial_law.exp_moment)
        throw std::invalid_argument("run_moment_audit: initial law lacks a closed-form moment");
    const TimeGrid grid = TimeGrid::uniform(cfg.t_end, cfg.dt);
    const double a = spec.exp_exponent;

    MomentAuditResult res;
    res.model_id = spec.id;
    res.k_constant = gronwall_rate_constant(spec);
    res.e_exp_x0 = spec.initial_law.exp_moment(a);

    const std::size_t n_nodes = grid.n_nodes();
    std::vector<std::vector<double>> obs(cfg.replicas, std::vector<double>(n_nodes, 0.0));

    parallel_for(
        cfg.replicas,
        [&](std::size_t r) {
            const std::uint64_t seed_r = derive_seed(cfg.seed, kTagAuditReplica, r);
            NoiseBundle bundle(seed_r, cfg.n, grid, dominating_rate(spec), spec.mark_law);
            PathEnsemble ens = simulate_particle_system(spec, cfg.n, bundle);
            for (std::size_t k = 0; k < n_nodes; ++k)
                obs[r][k] = ens.measure_at(k).exp_moment(a);
        },
        cfg.n_threads);

    res.pass = true;
    std::vector<double> vals(cfg.replicas);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        for (std::size_t r = 0; r < cfg.replicas; ++r) vals[r] = obs[r][k];
        SummaryPoint s = summarize(grid.node(k), vals);
        const double bound = gronwall_exp_moment_bound(spec, res.e_exp_x0, grid.node(k));
        res.times.push_back(grid.node(k));
        res.observed.push_back(s);
        res.bound.push_back(bound);

        if (s.mean >= kExpMomentSaturation) {
            res.saturated = true;
            res.pass = false;
            res.witness_time = grid.node(k);
            break;
        }
        const double ratio = s.mean / bound;
        if (ratio > res.max_ratio) {
            res.max_ratio = ratio;
            res.witness_time = grid.node(k);
        }
        const double slack = s.std_error > 0.0 ? 3.0 * s.std_error : 1e-12 * bound;
        if (s.mean > bound + slack) res.pass = false;
        if (s.std_error > 0.0)
            res.max_excess_sigmas =
                std::max(res.max_excess_sigmas, (s.mean - bound) / s.std_error);
    }
    return res;
}

} // namespace mvj
