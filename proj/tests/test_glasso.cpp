#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ggsel/glasso.hpp"
#include "test_helpers.hpp"

using namespace ggsel;

namespace {

SymMatrix scalar(double v) {
    SymMatrix m(1);
    m.set(0, 0, v);
    return m;
}

SymMatrix cov2(double diag, double off) {
    SymMatrix m(2);
    m.set(0, 0, diag);
    m.set(1, 1, diag);
    m.set(0, 1, off);
    return m;
}

}  // namespace

TEST_CASE("scalar closed form") {
    const GlassoProblem prob{scalar(1.0), 0.5, std::nullopt};
    const GlassoSolution sol = solve(prob);
    REQUIRE(sol.converged);
    CHECK(sol.omega_star(0, 0) == Catch::Approx(2.0 / 3.0).margin(1e-10));
    const double expected_obj = -std::log(2.0 / 3.0) + 2.0 / 3.0 + 1.0 / 3.0;
    CHECK(sol.objective == Catch::Approx(expected_obj).margin(1e-10));
    CHECK(kkt_residual(sol.omega_star, prob) <= 1e-9);
}

TEST_CASE("p=2 subthreshold correlation gives the diagonal solution") {
    const GlassoProblem prob{cov2(1.0, 0.3), 0.5, std::nullopt};
    const GlassoSolution sol = solve(prob);
    REQUIRE(sol.converged);
    CHECK(sol.omega_star(0, 1) == 0.0);
    CHECK(sol.omega_star(0, 0) == Catch::Approx(1.0 / 1.5).margin(1e-9));
    CHECK(sol.omega_star(1, 1) == Catch::Approx(1.0 / 1.5).margin(1e-9));
}

TEST_CASE("kkt residual vanishes on exact closed forms") {
    SymMatrix exact1 = scalar(2.0 / 3.0);
    CHECK(kkt_residual(exact1, GlassoProblem{scalar(1.0), 0.5, std::nullopt}) <= 1e-12);

    SymMatrix exact2(2);
    exact2.set(0, 0, 1.0 / 1.5);
    exact2.set(1, 1, 1.0 / 1.5);
    CHECK(kkt_residual(exact2, GlassoProblem{cov2(1.0, 0.3), 0.5, std::nullopt}) <= 1e-12);
}

TEST_CASE("kkt residual grows with perturbation") {
    const SymMatrix cov = test_helpers::ar1_data_cov(3, 200, 42);
    const GlassoProblem prob{cov, 0.5, std::nullopt};
    const GlassoSolution sol = solve(prob);
    REQUIRE(sol.converged);
    CHECK(sol.kkt_residual <= 1e-6);

    SymMatrix pert1 = sol.omega_star;
    pert1.add(0, 1, 0.01);
    SymMatrix pert2 = sol.omega_star;
    pert2.add(0, 1, 0.02);
    const double r0 = kkt_residual(sol.omega_star, prob);
    const double r1 = kkt_residual(pert1, prob);
    const double r2 = kkt_residual(pert2, prob);
    CHECK(r1 > r0);
    CHECK(r2 > r1);
}

TEST_CASE("objective decreases monotonically across sweeps") {
    Rng rng(17);
    for (int rep = 0; rep < 5; ++rep) {
        const SymMatrix cov = test_helpers::random_pd(6, rng);
        const GlassoSolution sol = solve(GlassoProblem{cov, 0.2, std::nullopt});
        REQUIRE(sol.converged);
        for (std::size_t k = 1; k < sol.objective_trace.size(); ++k)
            CHECK(sol.objective_trace[k] <=
                  sol.objective_trace[k - 1] + 1e-12 * (1.0 + std::fabs(sol.objective_trace[k - 1])));
    }
}

TEST_CASE("solution is invariant to deleting zeroed support edges") {
    // p=2: the (0,1) entry zeroes out, so the empty support gives the same solution.
    const SymMatrix cov = cov2(1.0, 0.3);
    const GlassoConfig cfg{1e-8, 500};
    const GlassoSolution with_edge =
        solve(GlassoProblem{cov, 0.5, GraphStructure(2, {{0, 1}})}, cfg);
    const GlassoSolution without_edge = solve(GlassoProblem{cov, 0.5, GraphStructure(2)}, cfg);
    REQUIRE(with_edge.converged);
    const auto zs = zero_set(with_edge, GraphStructure(2, {{0, 1}}), default_zero_threshold(with_edge));
    REQUIRE(zs.size() == 1);
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j)
            CHECK(std::fabs(with_edge.omega_star(i, j) - without_edge.omega_star(i, j)) <= 1e-7);

    // p=3 AR(1) data: force a zero on the weak (0,2) pair under the full support.
    const SymMatrix cov3 = test_helpers::ar1_data_cov(3, 200, 42);
    const GraphStructure full(3, {{0, 1}, {0, 2}, {1, 2}});
    const GlassoSolution dense = solve(GlassoProblem{cov3, 0.5, full}, cfg);
    REQUIRE(dense.converged);
    const auto zs3 = zero_set(dense, full, default_zero_threshold(dense));
    if (!zs3.empty()) {
        const GraphStructure reduced = full.without_edges(zs3);
        const GlassoSolution sparse = solve(GlassoProblem{cov3, 0.5, reduced}, cfg);
        REQUIRE(sparse.converged);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j)
                CHECK(std::fabs(dense.omega_star(i, j) - sparse.omega_star(i, j)) <= 1e-7);
    }
}

TEST_CASE("large penalty gives the diagonal solution") {
    Rng rng(23);
    for (int rep = 0; rep < 5; ++rep) {
        const SymMatrix cov = test_helpers::random_pd(5, rng);
        double max_off = 0.0;
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) max_off = std::max(max_off, std::fabs(cov(i, j)));
        const double rho = max_off * 1.01 + 0.01;
        const GlassoSolution sol = solve(GlassoProblem{cov, rho, std::nullopt});
        REQUIRE(sol.converged);
        for (int i = 0; i < 5; ++i) {
            CHECK(std::fabs(sol.omega_star(i, i) - 1.0 / (cov(i, i) + rho)) <= 1e-7);
            for (int j = i + 1; j < 5; ++j) CHECK(sol.omega_star(i, j) == 0.0);
        }
    }
}

TEST_CASE("zero_set") {
    const GraphStructure support(2, {{0, 1}});
    GlassoSolution big;
    big.omega_star = SymMatrix::identity(2);
    big.omega_star.set(0, 1, 0.4);
    CHECK(zero_set(big, support, 1e-8).empty());

    const GlassoSolution diag = solve(GlassoProblem{cov2(1.0, 0.3), 0.5, support});
    CHECK(zero_set(diag, support, default_zero_threshold(diag)) == std::vector<Edge>{{0, 1}});

    // dense support, heavy penalty: at least one edge collapses
    const SymMatrix cov3 = test_helpers::ar1_data_cov(3, 200, 7);
    const GraphStructure full(3, {{0, 1}, {0, 2}, {1, 2}});
    const GlassoSolution heavy = solve(GlassoProblem{cov3, 0.9, full});
    REQUIRE(heavy.converged);
    CHECK_FALSE(zero_set(heavy, full, default_zero_threshold(heavy)).empty());
}

TEST_CASE("error paths") {
    CHECK_THROWS_AS(solve(GlassoProblem{scalar(1.0), -0.1, std::nullopt}), InvalidPenalty);
    CHECK_THROWS_AS(solve(GlassoProblem{scalar(0.0), 0.0, std::nullopt}), NotPositiveDefinite);
}

TEST_CASE("hitting max_iter reports non-convergence without throwing") {
    const SymMatrix cov = test_helpers::ar1_data_cov(6, 100, 99);
    const GlassoSolution sol = solve(GlassoProblem{cov, 0.1, std::nullopt}, GlassoConfig{1e-13, 1});
    CHECK_FALSE(sol.converged);
    CHECK(sol.iterations == 1);
}

TEST_CASE("converged solutions satisfy the kkt contract") {
    Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        const int p = 3 + static_cast<int>(rng.uniform_below(5));
        const SymMatrix cov = test_helpers::random_pd(p, rng);
        const double rho = 0.1 + 0.6 * rng.uniform();
        const GlassoSolution sol = solve(GlassoProblem{cov, rho, std::nullopt});
        REQUIRE(sol.converged);
        CHECK(kkt_residual(sol.omega_star, GlassoProblem{cov, rho, std::nullopt}) <= 1e-6);
        CHECK(is_positive_definite(sol.omega_star));
    }
}
