#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvjump/catalog.hpp"
#include "mvjump/picard.hpp"
#include "oracles.hpp"

using mvj::EmpiricalMeasure;
using mvj::ModelSpec;
using mvj::PicardOptions;
using mvj::TimeGrid;

TEST_CASE("measure-free dynamics converge in one correction") {
    // coefficients that never read the flow: iteration 1 already produces the
    // fixed point, so iteration 2 reproduces it and d_2 = 0
    ModelSpec s;
    s.id = "frozen";
    s.drift = [](double x, const EmpiricalMeasure&) { return -x; };
    s.diffusion = [](double, const EmpiricalMeasure&) { return 0.2; };
    s.rate = [](double, const EmpiricalMeasure&) { return 0.0; };
    s.mark_law = mvj::MarkLaw::uniform_symmetric();
    s.initial_law = mvj::initial_uniform(-1.0, 1.0);
    s.lipschitz_const = 1.0;
    s.exp_exponent = 1.0;
    s.bounds.drift_sup = 10.0;
    s.bounds.diffusion_sup = 0.2;

    PicardOptions opts;
    opts.n_samples = 500;
    opts.tol = 1e-12;  // only exact reproduction passes this
    opts.max_iter = 4;
    TimeGrid grid = TimeGrid::uniform(0.25, 0.05);
    auto [flow, diag] = mvj::solve_flow(s, grid, opts);
    CHECK(diag.converged);
    for (const auto& w : diag.windows) {
        REQUIRE(!w.distances.empty());
        CHECK(w.distances.back() == 0.0);  // common random numbers: exact repeat
    }
    CHECK(flow.at(0).size() == 500);
}

TEST_CASE("pure-drift model matches the ODE oracle") {
    const ModelSpec& s = mvj::catalog_model("pure-drift");
    const double dt = 1e-3, t_end = 1.0;
    TimeGrid grid = TimeGrid::uniform(t_end, dt);
    PicardOptions opts;
    opts.n_samples = 100;  // deterministic dynamics: every sample is the same path
    opts.tol = 1e-10;
    auto [flow, diag] = mvj::solve_flow(s, grid, opts);
    CHECK(diag.converged);

    // x' = -tanh(x), x(0) = 2, solved independently by RK4 at a finer step
    for (double t : {0.25, 0.5, 1.0}) {
        const double ode =
            oracle::rk4([](double, double x) { return -std::tanh(x); }, 2.0, 0.0, t, 1e-5);
        std::size_t node = 0;
        while (grid.node(node) < t - 1e-12) ++node;
        // Euler at dt=1e-3 carries O(dt) bias; the solver must sit on it
        CHECK(std::abs(flow.at(node).mean() - ode) < 5e-3);
        CHECK(flow.at(node).size() >= 1);
    }
}

TEST_CASE("iterate distances fall below tolerance and mass is conserved") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    TimeGrid grid = TimeGrid::uniform(0.5, 0.01);
    PicardOptions opts;
    opts.n_samples = 800;
    opts.tol = 0.03;
    opts.seed = 3;
    auto [flow, diag] = mvj::solve_flow(s, grid, opts);
    CHECK(diag.converged);
    CHECK(diag.total_iterations >= 2);
    CHECK(diag.final_distance < opts.tol);
    for (const auto& w : diag.windows) {
        CHECK(w.converged);
        CHECK(w.distances.size() <= opts.max_iter);
        CHECK(w.distances.back() < opts.tol);
    }

    // each node law carries exactly M unit-weight atoms
    for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
        double mass = 0.0;
        for (std::size_t a = 0; a < flow.at(k).size(); ++a) mass += flow.at(k).weight(a);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(flow.at(k).size() == opts.n_samples);
    }

    // centered dynamics: the mean stays near the initial mean 0
    CHECK(std::abs(flow.at(grid.n_nodes() - 1).mean()) < 0.2);
}

TEST_CASE("flow regularity in time") {
    // consecutive node laws move at most at the speed the coefficients allow:
    // W1(mu_k, mu_{k+1}) <= C (dt + sqrt(dt)) with C from the declared bounds
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    const double dt = 0.01;
    TimeGrid grid = TimeGrid::uniform(0.5, dt);
    PicardOptions opts;
    opts.n_samples = 1000;
    opts.tol = 0.03;
    auto [flow, diag] = mvj::solve_flow(s, grid, opts);
    REQUIRE(diag.converged);

    const double drift_speed = s.bounds.drift_sup +
                               s.bounds.rate_sup * 0.4 +  // |Psi| <= 0.4 for lin-lip
                               s.bounds.rate_sup * 0.3;   // |Theta| <= 0.3
    const double diffusion_speed = s.bounds.diffusion_sup;  // E|dW| <= sqrt(dt)
    const double allowed = 2.0 * (drift_speed * dt + diffusion_speed * std::sqrt(dt));
    for (std::size_t k = 0; k + 1 < grid.n_nodes(); ++k)
        CHECK(mvj::w1(flow.at(k), flow.at(k + 1)) <= allowed);
}

TEST_CASE("solver reports non-convergence instead of looping") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    TimeGrid grid = TimeGrid::uniform(0.5, 0.01);
    PicardOptions opts;
    opts.n_samples = 400;
    opts.tol = 1e-9;  // unreachable with Monte Carlo resampling
    opts.max_iter = 3;
    auto [flow, diag] = mvj::solve_flow(s, grid, opts);
    CHECK(!diag.converged);
    CHECK(!diag.windows.empty());
    CHECK(!diag.windows.front().converged);
    CHECK(diag.windows.front().distances.size() == 3);
    CHECK(flow.grid() == grid);  // still returns the last iterate
}

TEST_CASE("uniqueness probe on a short horizon") {
    const ModelSpec& s = mvj::catalog_model("lin-lip");
    TimeGrid grid = TimeGrid::uniform(0.25, 0.01);
    PicardOptions opts;
    opts.n_samples = 800;
    opts.tol = 0.05;
    opts.seed = 5;
    auto rep = mvj::uniqueness_probe(s, grid, opts);
    CHECK(rep.conclusive);
    CHECK(rep.pass);
    CHECK(rep.distance < 2.0 * opts.tol);
    CHECK(rep.tol == opts.tol);
    CHECK(rep.diag_a.converged);
    CHECK(rep.diag_b.converged);
}
