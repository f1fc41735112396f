#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mvjump/catalog.hpp"
#include "mvjump/engine.hpp"

using mvj::EmpiricalMeasure;
using mvj::EngineOptions;
using mvj::ModelSpec;
using mvj::NoiseBundle;
using mvj::TimeGrid;

namespace {

ModelSpec blank_spec() {
    ModelSpec s;
    s.id = "blank";
    s.drift = [](double, const EmpiricalMeasure&) { return 0.0; };
    s.diffusion = s.drift;
    s.rate = s.drift;
    s.mark_law = mvj::MarkLaw::uniform_symmetric();
    s.initial_law = mvj::initial_dirac(0.0);
    s.lipschitz_const = 1.0;
    s.exp_exponent = 1.0;
    return s;
}

NoiseBundle bundle_for(const ModelSpec& spec, std::uint64_t seed, std::size_t n,
                       const TimeGrid& grid) {
    return mvj::build_bundle(seed, n, grid, mvj::dominating_rate(spec), spec.mark_law);
}

} // namespace

TEST_CASE("constant drift integrates exactly") {
    ModelSpec s = blank_spec();
    s.drift = [](double, const EmpiricalMeasure&) { return 0.25; };
    s.bounds.drift_sup = 0.25;
    TimeGrid grid = TimeGrid::uniform(2.0, 0.125);
    NoiseBundle b = bundle_for(s, 1, 3, grid);
    auto ens = mvj::simulate_particle_system(s, 3, mvj::split_for_limit(b));
    REQUIRE(ens.n_nodes() == grid.n_nodes());
    for (std::size_t k = 0; k < ens.n_nodes(); ++k)
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(ens.state(k, i) == doctest::Approx(0.25 * ens.times[k]).epsilon(1e-14));
    CHECK(ens.jump_log.empty());
}

TEST_CASE("unit own jumps count the accepted candidates exactly") {
    ModelSpec s = blank_spec();
    s.rate = [](double, const EmpiricalMeasure&) { return 0.6; };
    s.self_jump = [](double, const EmpiricalMeasure&, double) { return 1.0; };
    s.bounds.rate_sup = 1.2;  // dominating rate above f: thinning accepts about half
    TimeGrid grid = TimeGrid::uniform(5.0, 0.05);
    NoiseBundle b = bundle_for(s, 3, 2, grid);
    auto ens = mvj::simulate_particle_system(s, 2, mvj::split_for_limit(b));

    std::size_t accepted[2] = {0, 0}, total = 0;
    for (const auto& e : ens.jump_log) {
        if (e.accepted) {
            ++accepted[e.owner];
            CHECK(e.psi == 1.0);
        }
        ++total;
    }
    CHECK(total == b.events(0).size() + b.events(1).size());
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(ens.state(ens.n_nodes() - 1, i) == static_cast<double>(accepted[i]));
}

TEST_CASE("thinned acceptance rate matches f over many seeds") {
    ModelSpec s = blank_spec();
    s.rate = [](double, const EmpiricalMeasure&) { return 0.5; };
    s.collective_jump = [](double, double, const EmpiricalMeasure&, double, double) {
        return 1.0;
    };
    s.collective_mark_free = true;
    s.collective_target_free = true;
    s.bounds.rate_sup = 1.0;
    const std::size_t n = 5;
    const double t_end = 2.0;
    TimeGrid grid = TimeGrid::uniform(t_end, 0.1);

    // accepted collective events per bundle ~ Poisson(n * f * T) = Poisson(5)
    double total = 0.0;
    const int seeds = 200;
    for (int seed = 0; seed < seeds; ++seed) {
        NoiseBundle b = bundle_for(s, 1000 + static_cast<std::uint64_t>(seed), n, grid);
        auto ens = mvj::simulate_particle_system(s, n, mvj::split_for_limit(b));
        for (const auto& e : ens.jump_log)
            if (e.accepted) {
                total += 1.0;
                CHECK(e.theta_mean == doctest::Approx(1.0 / static_cast<double>(n)));
                CHECK(e.n_targets == n);
            }
    }
    const double expected = static_cast<double>(seeds) * n * 0.5 * t_end;
    CHECK(std::abs(total - expected) < 3.0 * std::sqrt(expected));
}

TEST_CASE("collective jumps displace every particle by theta over n") {
    ModelSpec s = blank_spec();
    s.rate = [](double, const EmpiricalMeasure&) { return 1.0; };
    s.collective_jump = [](double x_src, double, const EmpiricalMeasure&, double, double) {
        return std::tanh(x_src) + 0.5;
    };
    s.collective_mark_free = true;
    s.collective_target_free = true;
    s.bounds.rate_sup = 1.0;
    TimeGrid grid = TimeGrid::uniform(3.0, 0.25);
    NoiseBundle b = bundle_for(s, 9, 3, grid);
    EngineOptions opts;
    opts.record_theta = true;
    auto ens = mvj::simulate_particle_system(s, 3, mvj::split_for_limit(b), opts);

    // replay the jump log: terminal state = sum of all per-target displacements
    double displaced[3] = {0.0, 0.0, 0.0};
    for (const auto& e : ens.jump_log) {
        if (!e.accepted) continue;
        REQUIRE(e.theta.size() == 3);
        // all three displacements share the pre-event source state
        CHECK(e.theta[0] == e.theta[1]);
        CHECK(e.theta[1] == e.theta[2]);
        for (std::size_t i = 0; i < 3; ++i) displaced[i] += e.theta[i];
    }
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(ens.state(ens.n_nodes() - 1, i) == doctest::Approx(displaced[i]).epsilon(1e-12));
}

TEST_CASE("limit compensator drift is exact for constant coefficients") {
    // Theta = theta0, f = lambda: D = theta0 * lambda at every state
    ModelSpec s = blank_spec();
    const double theta0 = 0.7, lambda = 0.4;
    s.rate = [lambda](double, const EmpiricalMeasure&) { return lambda; };
    s.collective_jump = [theta0](double, double, const EmpiricalMeasure&, double, double) {
        return theta0;
    };
    s.collective_mark_free = true;
    s.collective_target_free = true;
    s.bounds.rate_sup = lambda;

    TimeGrid grid = TimeGrid::uniform(1.0, 0.01);
    NoiseBundle b = bundle_for(s, 4, 1, grid);
    // suppress the finite-N jump noise of the copy itself: the limit copy has
    // no collective jumps of its own, only the compensator drift
    mvj::MeasureFlow flow = mvj::MeasureFlow::constant(grid, EmpiricalMeasure::dirac(0.0));
    auto ens = mvj::simulate_limit_copies(s, flow, 1, mvj::split_for_limit(b));
    CHECK(ens.state(ens.n_nodes() - 1, 0) ==
          doctest::Approx(theta0 * lambda * 1.0).epsilon(1e-12));

    // state-dependent source: Theta = x_src, frozen flow (d0 + d2)/2 gives
    // D = lambda * mean = lambda * 1
    ModelSpec s2 = s;
    s2.collective_jump = [](double x_src, double, const EmpiricalMeasure&, double, double) {
        return x_src;
    };
    mvj::MeasureFlow flow2 =
        mvj::MeasureFlow::constant(grid, EmpiricalMeasure::from_samples({0.0, 2.0}));
    auto ens2 = mvj::simulate_limit_copies(s2, flow2, 1, mvj::split_for_limit(b));
    CHECK(ens2.state(ens2.n_nodes() - 1, 0) == doctest::Approx(lambda * 1.0).epsilon(1e-12));
}

TEST_CASE("exchangeability: permuting initial states permutes the ensemble exactly") {
    // noise-free dynamics interact only through the (sorted, hence
    // permutation-invariant) empirical measure, so the permuted run is the
    // permuted run, bitwise
    ModelSpec s = blank_spec();
    s.drift = [](double x, const EmpiricalMeasure& m) { return std::tanh(m.mean() - x); };
    s.bounds.drift_sup = 1.0;
    TimeGrid grid = TimeGrid::uniform(1.0, 0.1);
    NoiseBundle b = bundle_for(s, 21, 3, grid);

    const std::vector<double> init = {-0.3, 0.8, 1.7};
    const std::vector<double> permuted = {0.8, 1.7, -0.3};  // perm(i) = (i + 1) mod 3
    const std::size_t perm[3] = {1, 2, 0};

    EngineOptions oa, ob;
    oa.initial_states = &init;
    ob.initial_states = &permuted;
    auto ea = mvj::simulate_particle_system(s, 3, mvj::split_for_limit(b), oa);
    auto eb = mvj::simulate_particle_system(s, 3, mvj::split_for_limit(b), ob);
    for (std::size_t k = 0; k < ea.n_nodes(); ++k)
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(eb.state(k, i) == ea.state(k, perm[i]));  // exact
}

TEST_CASE("bitwise coupling of particle system and limit copies") {
    // measure-independent coefficients and no collective jumps: both engines
    // walk the identical arithmetic path on one bundle
    ModelSpec s = blank_spec();
    s.drift = [](double x, const EmpiricalMeasure&) { return -0.5 * std::tanh(x); };
    s.diffusion = [](double x, const EmpiricalMeasure&) { return 0.3 + 0.1 * std::cos(x); };
    s.rate = [](double x, const EmpiricalMeasure&) { return 0.4 / (1.0 + x * x); };
    s.self_jump = [](double x, const EmpiricalMeasure&, double u) { return 0.2 * u - 0.05 * x; };
    s.bounds.drift_sup = 0.5;
    s.bounds.diffusion_sup = 0.4;
    s.bounds.rate_sup = 0.4;
    s.initial_law = mvj::initial_uniform(-1.0, 1.0);

    TimeGrid grid = TimeGrid::uniform(1.0, 0.02);
    const std::size_t n = 8;
    NoiseBundle b = bundle_for(s, 33, n, grid);
    auto particles = mvj::simulate_particle_system(s, n, mvj::split_for_limit(b));
    mvj::MeasureFlow flow = mvj::MeasureFlow::constant(grid, EmpiricalMeasure::dirac(0.0));
    auto copies = mvj::simulate_limit_copies(s, flow, n, mvj::split_for_limit(b));

    REQUIRE(particles.n_nodes() == copies.n_nodes());
    for (std::size_t k = 0; k < particles.n_nodes(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            CHECK(particles.state(k, i) == copies.state(k, i));  // bitwise
}

TEST_CASE("windowed runs compose exactly") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    TimeGrid grid = TimeGrid::uniform(1.0, 0.05);
    const std::size_t n = 6;
    NoiseBundle b = bundle_for(s, 77, n, grid);

    auto full = mvj::simulate_particle_system(s, n, mvj::split_for_limit(b));

    EngineOptions first_half;
    first_half.n_steps = 10;
    auto head = mvj::simulate_particle_system(s, n, mvj::split_for_limit(b), first_half);
    EngineOptions second_half;
    second_half.first_step = 10;
    const std::vector<double> mid = head.states.back();
    second_half.initial_states = &mid;
    auto tail = mvj::simulate_particle_system(s, n, mvj::split_for_limit(b), second_half);

    REQUIRE(head.n_nodes() + tail.n_nodes() - 1 == full.n_nodes());
    for (std::size_t k = 0; k < tail.n_nodes(); ++k) {
        CHECK(tail.times[k] == full.times[10 + k]);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(tail.state(k, i) == full.state(10 + k, i));  // bitwise
    }
}

TEST_CASE("per-step increments respect the declared bounds") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    TimeGrid grid = TimeGrid::uniform(1.0, 0.05);
    const std::size_t n = 10;
    NoiseBundle b = bundle_for(s, 5, n, grid);
    EngineOptions opts;
    opts.record_theta = true;
    opts.enforce_declared_bounds = true;  // also exercises the runtime check
    auto ens = mvj::simulate_particle_system(s, n, mvj::split_for_limit(b), opts);

    std::size_t log_cursor = 0;
    for (std::size_t k = 0; k + 1 < ens.n_nodes(); ++k) {
        const double t1 = ens.times[k + 1];
        std::vector<double> jump_budget(n, 0.0);
        while (log_cursor < ens.jump_log.size() && ens.jump_log[log_cursor].time <= t1) {
            const auto& e = ens.jump_log[log_cursor];
            if (e.accepted) {
                jump_budget[e.owner] += std::abs(e.psi);
                for (std::size_t i = 0; i < n; ++i) jump_budget[i] += std::abs(e.theta[i]);
            }
            ++log_cursor;
        }
        const double dt = ens.times[k + 1] - ens.times[k];
        for (std::size_t i = 0; i < n; ++i) {
            const double allowed = s.bounds.drift_sup * dt +
                                   s.bounds.diffusion_sup * std::abs(b.brownian(i)[k]) +
                                   jump_budget[i] + 1e-12;
            CHECK(std::abs(ens.state(k + 1, i) - ens.state(k, i)) <= allowed);
        }
    }
}

TEST_CASE("sample exponential moments stay in a factor-2 band across N") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    TimeGrid grid = TimeGrid::uniform(1.0, 0.01);
    std::vector<double> moments;
    for (std::size_t n : {10ul, 100ul, 1000ul}) {
        NoiseBundle b = bundle_for(s, 13, n, grid);
        auto ens = mvj::simulate_particle_system(s, n, mvj::split_for_limit(b));
        moments.push_back(ens.measure_at(ens.n_nodes() - 1).exp_moment(s.exp_exponent));
    }
    const double lo = *std::min_element(moments.begin(), moments.end());
    const double hi = *std::max_element(moments.begin(), moments.end());
    CHECK(hi <= 2.0 * lo);
}

TEST_CASE("martingale defect accumulator") {
    // no collective jumps: identically zero
    ModelSpec s = blank_spec();
    s.rate = [](double, const EmpiricalMeasure&) { return 0.5; };
    s.self_jump = [](double, const EmpiricalMeasure&, double u) { return 0.1 * u; };
    s.bounds.rate_sup = 0.5;
    TimeGrid grid = TimeGrid::uniform(1.0, 0.05);
    NoiseBundle b = bundle_for(s, 2, 4, grid);
    auto gn0 = mvj::estimate_gn(s, 4, mvj::split_for_limit(b));
    CHECK(gn0.sup_abs == 0.0);

    // zero rate: also identically zero even with Theta present
    ModelSpec s2 = blank_spec();
    s2.collective_jump = [](double, double, const EmpiricalMeasure&, double, double) {
        return 1.0;
    };
    s2.collective_mark_free = true;
    NoiseBundle b2 = bundle_for(s2, 2, 4, grid);
    auto gnf = mvj::estimate_gn(s2, 4, mvj::split_for_limit(b2));
    CHECK(gnf.sup_abs == 0.0);

    // constant Theta and f: jumps and compensator are both explicit
    ModelSpec s3 = blank_spec();
    const double lambda = 0.8, theta0 = 0.5;
    s3.rate = [lambda](double, const EmpiricalMeasure&) { return lambda; };
    s3.collective_jump = [theta0](double, double, const EmpiricalMeasure&, double, double) {
        return theta0;
    };
    s3.collective_mark_free = true;
    s3.collective_target_free = true;
    s3.bounds.rate_sup = lambda;
    const std::size_t n = 4;
    NoiseBundle b3 = bundle_for(s3, 8, n, grid);
    auto ens = mvj::simulate_particle_system(s3, n, mvj::split_for_limit(b3));
    auto gn = mvj::estimate_gn(s3, n, mvj::split_for_limit(b3));
    std::size_t accepted_by_node = 0, cursor = 0;
    for (std::size_t k = 0; k < gn.times.size(); ++k) {
        while (cursor < ens.jump_log.size() && ens.jump_log[cursor].time <= gn.times[k]) {
            if (ens.jump_log[cursor].accepted) ++accepted_by_node;
            ++cursor;
        }
        const double expected = static_cast<double>(accepted_by_node) * theta0 / n -
                                lambda * theta0 * gn.times[k];
        CHECK(gn.values[k] == doctest::Approx(expected).epsilon(1e-10));
    }
    CHECK(gn.sup_abs > 0.0);
}

TEST_CASE("failure modes") {
    ModelSpec s = blank_spec();
    TimeGrid grid = TimeGrid::uniform(1.0, 0.25);
    NoiseBundle b = bundle_for(s, 1, 2, grid);

    CHECK_THROWS_AS(mvj::simulate_particle_system(s, 5, mvj::split_for_limit(b)),
                    std::invalid_argument);  // more particles than streams
    CHECK_THROWS_AS(mvj::simulate_particle_system(s, 0, mvj::split_for_limit(b)),
                    std::invalid_argument);

    // non-finite states abort with a diagnostic
    ModelSpec burst = blank_spec();
    burst.drift = [](double, const EmpiricalMeasure&) {
        return std::numeric_limits<double>::infinity();
    };
    CHECK_THROWS_AS(mvj::simulate_particle_system(burst, 2, mvj::split_for_limit(b)),
                    std::runtime_error);

    // declared-bound enforcement trips on an undeclared drift
    ModelSpec sly = blank_spec();
    sly.drift = [](double, const EmpiricalMeasure&) { return 2.0; };
    sly.bounds.drift_sup = 1.0;
    EngineOptions strict;
    strict.enforce_declared_bounds = true;
    CHECK_THROWS_AS(mvj::simulate_particle_system(sly, 2, mvj::split_for_limit(b), strict),
                    std::runtime_error);

    // flow grid mismatch for the limit engine
    TimeGrid other = TimeGrid::uniform(1.0, 0.5);
    mvj::MeasureFlow flow = mvj::MeasureFlow::constant(other, EmpiricalMeasure::dirac(0.0));
    CHECK_THROWS_AS(mvj::simulate_limit_copies(s, flow, 1, mvj::split_for_limit(b)),
                    std::domain_error);
}
