#include "mvjump/picard.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mvjump/noise.hpp"

namespace mvj {

namespace {

std::vector<std::size_t> window_boundaries(const TimeGrid& grid, double t_window) {
    // window ends are grid nodes; each window is at least one step long and
    // is cut as soon as it reaches t_window
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

void check_saturation(const EmpiricalMeasure& m, double a, double t) {
    if (m.exp_moment(a) >= kExpMomentSaturation)
        throw std::runtime_error("solve_flow: exponential moment saturated at t=" +
                                 std::to_string(t) + " (iterate blowing up)");
}

} // namespace

std::pair<MeasureFlow, PicardDiagnostics> solve_flow(const ModelSpec& spec, const TimeGrid& grid,
                                                     const PicardOptions& opts) {
    if (opts.n_samples < 100) throw std::invalid_argument("solve_flow: need at least 100 samples");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_flow: tol must be positive");
    if (opts.max_iter < 1) throw std::invalid_argument("solve_flow: max_iter must be >= 1");

    const double lip = opts.lipschitz_override > 0.0 ? opts.lipschitz_override
                                                     : std::max(spec.lipschitz_const, 1e-12);
    const double t_window = std::min(1.0 / (16.0 * lip * lip), grid.t_end());

    NoiseBundle bundle(opts.seed, opts.n_samples, grid, dominating_rate(spec), spec.mark_law);
    NoiseView noise = split_for_limit(bundle);

    // initial draws, shared by every iteration and both uniqueness runs
    const InitialLaw& law = opts.initial_law_override ? *opts.initial_law_override
                                                      : spec.initial_law;
    if (!law.sample) throw std::invalid_argument("solve_flow: model has no initial law");
    std::vector<double> samples(opts.n_samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CounterRng rng = bundle.initial_rng(i, opts.engine.init_salt);
        samples[i] = law.sample(rng);
    }

    std::vector<EmpiricalMeasure> nodes;
    nodes.reserve(grid.n_steps() + 1);
    nodes.push_back(EmpiricalMeasure::from_samples(samples));

    PicardDiagnostics diag;
    diag.converged = true;

    std::size_t first = 0;
    for (std::size_t end : window_boundaries(grid, t_window)) {
        const std::size_t n_steps = end - first;

        // iteration-0 flow: constant on the window
        const EmpiricalMeasure start_measure =
            (first == 0 && opts.start == Mu0Start::DiracZero) ? EmpiricalMeasure::dirac(0.0)
                                                              : nodes.back();
        std::vector<EmpiricalMeasure> window_old(n_steps + 1, start_measure);

        WindowDiagnostics wd;
        wd.first_step = first;
        wd.n_steps = n_steps;

        EngineOptions eopts = opts.engine;
        eopts.first_step = first;
        eopts.n_steps = n_steps;
        eopts.initial_states = &samples;

        std::vector<EmpiricalMeasure> window_new;
        std::vector<double> terminal;
        for (std::size_t it = 0; it < opts.max_iter; ++it) {
            // freeze the current window flow over the full grid clock
            std::vector<EmpiricalMeasure> frozen;
            frozen.reserve(grid.n_steps() + 1);
            for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
                const std::size_t j = k < first ? 0 : std::min(k - first, n_steps);
                frozen.push_back(window_old[j]);
            }
            MeasureFlow flow(grid, std::move(frozen));

            PathEnsemble ens = simulate_limit_copies(spec, flow, opts.n_samples, noise, eopts);

            window_new.clear();
            window_new.reserve(n_steps + 1);
            double d = 0.0;
            for (std::size_t j = 0; j <= n_steps; ++j) {
                window_new.push_back(ens.measure_at(j));
                check_saturation(window_new.back(), spec.exp_exponent, ens.times[j]);
                d = std::max(d, w1(window_new[j], window_old[j]));
            }
            wd.distances.push_back(d);
            ++diag.total_iterations;
            terminal = ens.states.back();
            window_old = window_new;
            if (d < opts.tol) {
                wd.converged = true;
                break;
            }
        }
        diag.final_distance = wd.distances.back();
        if (!wd.converged) diag.converged = false;
        diag.windows.push_back(std::move(wd));

        // commit the window and restart from the last iterate's terminal
        // samples (their empirical law is the committed terminal measure)
        for (std::size_t j = 1; j <= n_steps; ++j) nodes.push_back(std::move(window_new[j]));
        samples = std::move(terminal);
        first = end;
    }

    return {MeasureFlow(grid, std::move(nodes)), std::move(diag)};
}

UniquenessReport uniqueness_probe(const ModelSpec& spec, const TimeGrid& grid,
                                  const PicardOptions& opts) {
    PicardOptions a = opts;
    a.start = Mu0Start::InitialLaw;
    PicardOptions b = opts;
    b.start = Mu0Start::DiracZero;

    auto [flow_a, diag_a] = solve_flow(spec, grid, a);
    auto [flow_b, diag_b] = solve_flow(spec, grid, b);

    UniquenessReport report;
    report.tol = opts.tol;
    report.distance = flow_sup_w1(flow_a, flow_b);
    report.conclusive = diag_a.converged && diag_b.converged;
    report.pass = report.conclusive && report.distance < 2.0 * opts.tol;
    report.diag_a = std::move(diag_a);
    report.diag_b = std::move(diag_b);
    return report;
}

} // namespace mvj
