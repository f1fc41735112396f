#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvjump/catalog.hpp"
#include "mvjump/experiments.hpp"

using mvj::EmpiricalMeasure;
using mvj::ModelSpec;

namespace {

ModelSpec decoupled_model() {
    // no interaction through the measure, no jumps: the N-particle system and
    // the limit copy follow bitwise identical paths on a shared bundle
    ModelSpec s;
    s.id = "decoupled";
    s.drift = [](double x, const EmpiricalMeasure&) { return -0.5 * x; };
    s.diffusion = [](double, const EmpiricalMeasure&) { return 0.3; };
    s.rate = [](double, const EmpiricalMeasure&) { return 0.0; };
    s.mark_law = mvj::MarkLaw::uniform_symmetric();
    s.initial_law = mvj::initial_uniform(-1.0, 1.0);
    s.lipschitz_const = 1.0;
    s.exp_exponent = 1.0;
    s.bounds.drift_sup = 5.0;
    s.bounds.diffusion_sup = 0.3;
    return s;
}

} // namespace

TEST_CASE("seed derivation is deterministic and tag-separated") {
    CHECK(mvj::derive_seed(1, 2, 3) == mvj::derive_seed(1, 2, 3));
    CHECK(mvj::derive_seed(1, 2, 3) != mvj::derive_seed(1, 2, 4));
    CHECK(mvj::derive_seed(1, 2, 3) != mvj::derive_seed(1, 3, 3));
    CHECK(mvj::derive_seed(2, 2, 3) != mvj::derive_seed(1, 2, 3));
}

TEST_CASE("chaos experiment: decoupled dynamics have zero coupling error") {
    mvj::ChaosConfig cfg;
    cfg.ns = {5, 10};
    cfg.t_end = 0.25;
    cfg.dt = 0.05;
    cfg.replicas = 3;
    cfg.picard.n_samples = 200;
    cfg.picard.tol = 0.5;  // dynamics ignore the flow; any flow will do
    auto res = mvj::run_chaos(decoupled_model(), cfg);

    REQUIRE(res.rows.size() == cfg.ns.size() * cfg.replicas);
    for (const auto& row : res.rows) CHECK(row.sup_distance == 0.0);  // bitwise coupling
    for (const auto& p : res.per_n) {
        CHECK(p.mean == 0.0);
        CHECK(p.count == cfg.replicas);
    }
    // rows sorted by (n, replica)
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        const auto& a = res.rows[i - 1];
        const auto& b = res.rows[i];
        CHECK((a.n < b.n || (a.n == b.n && a.replica < b.replica)));
    }
}

TEST_CASE("chaos experiment: errors shrink with N on the interacting model") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    mvj::ChaosConfig cfg;
    cfg.ns = {8, 64};
    cfg.t_end = 0.5;
    cfg.dt = 0.01;
    cfg.replicas = 8;
    cfg.seed = 2;
    cfg.picard.n_samples = 800;
    cfg.picard.tol = 0.05;
    auto res = mvj::run_chaos(s, cfg);

    REQUIRE(res.per_n.size() == 2);
    CHECK(res.per_n[0].mean > res.per_n[1].mean);
    CHECK(res.per_n[1].mean > 0.0);
    CHECK(res.flow_diagnostics.converged);
    CHECK(!res.window_end_times.empty());
    REQUIRE(res.window_errors.size() == 2);
    for (const auto& we : res.window_errors) CHECK(we.size() == res.window_end_times.size());

    // determinism: identical config reproduces the result table exactly
    auto res2 = mvj::run_chaos(s, cfg);
    REQUIRE(res2.rows.size() == res.rows.size());
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        CHECK(res2.rows[i].sup_distance == res.rows[i].sup_distance);
    CHECK(res2.fit.slope == res.fit.slope);

    // thread-schedule independence
    mvj::ChaosConfig serial = cfg;
    serial.n_threads = 1;
    auto res1 = mvj::run_chaos(s, serial);
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        CHECK(res1.rows[i].sup_distance == res.rows[i].sup_distance);
}

TEST_CASE("chaos experiment refuses an unconverged limit flow") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    mvj::ChaosConfig cfg;
    cfg.ns = {5};
    cfg.t_end = 0.25;
    cfg.dt = 0.05;
    cfg.replicas = 2;
    cfg.picard.n_samples = 100;
    cfg.picard.tol = 1e-9;  // unreachable
    cfg.picard.max_iter = 2;
    CHECK_THROWS_AS(mvj::run_chaos(s, cfg), std::runtime_error);
}

TEST_CASE("empirical-measure rate: a point mass has zero distance") {
    mvj::RateConfig cfg;
    cfg.ns = {10, 50, 100};
    cfg.replicas = 4;
    cfg.reference_samples = 10000;
    auto res = mvj::run_fournier_check(mvj::initial_dirac(1.5), cfg);
    for (const auto& row : res.rows) CHECK(row.value == 0.0);
    CHECK(!res.warning);
}

TEST_CASE("empirical-measure rate: gaussian slope near -1/2") {
    mvj::RateConfig cfg;
    cfg.ns = {10, 100, 1000};
    cfg.replicas = 30;
    cfg.seed = 4;
    cfg.reference_samples = 200000;
    auto res = mvj::run_fournier_check(mvj::initial_gaussian(0.0, 1.0), cfg);
    CHECK(res.fit.slope < -0.3);
    CHECK(res.fit.slope > -0.7);
    CHECK(res.per_n.front().mean > res.per_n.back().mean);

    // determinism
    auto res2 = mvj::run_fournier_check(mvj::initial_gaussian(0.0, 1.0), cfg);
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        CHECK(res2.rows[i].value == res.rows[i].value);
}

TEST_CASE("martingale-defect rate: zero without collective jumps") {
    mvj::RateConfig cfg;
    cfg.ns = {5, 10};
    cfg.replicas = 3;
    cfg.t_end = 0.25;
    cfg.dt = 0.05;
    auto res = mvj::run_gn_rate(decoupled_model(), cfg);
    for (const auto& row : res.rows) CHECK(row.value == 0.0);
}

TEST_CASE("martingale-defect rate shrinks with N") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    mvj::RateConfig cfg;
    cfg.ns = {10, 40, 160};  // three counts so a slope can be fitted
    cfg.replicas = 20;
    cfg.t_end = 0.5;
    cfg.dt = 0.01;
    cfg.seed = 6;
    auto res = mvj::run_gn_rate(s, cfg);
    REQUIRE(res.per_n.size() == 3);
    CHECK(res.per_n[0].mean > res.per_n[2].mean);
    CHECK(res.fit.slope < 0.0);
}

TEST_CASE("moment audit: flat dynamics sit exactly on the bound") {
    ModelSpec s = decoupled_model();
    s.drift = [](double, const EmpiricalMeasure&) { return 0.0; };
    s.diffusion = s.drift;
    s.bounds.drift_sup = 0.0;
    s.bounds.diffusion_sup = 0.0;
    mvj::MomentAuditConfig cfg;
    cfg.n = 50;
    cfg.t_end = 0.5;
    cfg.dt = 0.05;
    cfg.replicas = 4;
    auto res = mvj::run_moment_audit(s, cfg);
    CHECK(res.pass);
    CHECK(!res.saturated);
    CHECK(res.k_constant == 0.0);
    // states never move: the ratio to the constant bound hovers at
    // (sample mean) / (exact initial moment), i.e. near 1
    CHECK(res.max_ratio == doctest::Approx(1.0).epsilon(0.05));
    CHECK(res.times.size() == res.observed.size());
    CHECK(res.times.size() == res.bound.size());
}

TEST_CASE("moment audit: interacting model stays below its bound") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    mvj::MomentAuditConfig cfg;
    cfg.n = 100;
    cfg.t_end = 0.5;
    cfg.dt = 0.01;
    cfg.replicas = 8;
    cfg.seed = 9;
    auto res = mvj::run_moment_audit(s, cfg);
    CHECK(res.pass);
    // the closed-form bound dominates up to Monte Carlo noise in the mean
    CHECK(res.max_ratio < 1.05);
    CHECK(res.e_exp_x0 == doctest::Approx(s.initial_law.exp_moment(s.exp_exponent)));
    CHECK(res.k_constant == doctest::Approx(mvj::gronwall_rate_constant(s)));

    // determinism
    auto res2 = mvj::run_moment_audit(s, cfg);
    CHECK(res2.max_ratio == res.max_ratio);
    CHECK(res2.max_excess_sigmas == res.max_excess_sigmas);
}
