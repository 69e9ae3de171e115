#include "rmplan/baselines.hpp"

#include <doctest.h>

using namespace rmplan;
using doctest::Approx;

namespace {

ProblemInstance random_multi(Rng& rng, Index T, Index N, double load) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix g(T, N), eps(T, N);
    Vector p_cap(T);
    for (Index t = 0; t < T; ++t) {
        p_cap(t) = std::pow(10.0, 1.0 + 2.0 * u(rng));
        for (Index n = 0; n < N; ++n) {
            g(t, n) = std::pow(10.0, -9.0 + 6.0 * u(rng));
            eps(t, n) = capacity_gap(1.0 + 29.0 * u(rng));
        }
    }
    auto inst = make_instance(g, eps, p_cap, Vector::Zero(N), 50.0 * u(rng));
    // Demands sized against an equal time split so the instance stays jointly feasible.
    for (Index n = 0; n < N; ++n)
        inst.demand(n) = load * inst.c_cap.col(n).cwiseMax(0.0).sum() / double(N);
    return inst;
}

} // namespace

TEST_CASE("one receiver reduces to the single-receiver solver") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = random_multi(rng, 2 + trial, 1, 0.6);
        auto multi = solve_multi(inst);
        auto single = solve_single(inst);
        CHECK(multi.duals.v.isZero());
        CHECK(multi.duals.mu(0) == Approx(single.mu).epsilon(1e-9));
        Plan a = to_plan(multi.plan, inst);
        Plan b = to_plan({single.phi, single.share}, inst);
        CHECK(cost_relaxed(a, inst) == Approx(cost_relaxed(b, inst)).epsilon(1e-9));
    }
}

TEST_CASE("symmetric receivers receive symmetric allocations") {
    Matrix g(4, 2);
    g.col(0) << 2.0, 1.0, 0.5, 3.0;
    g.col(1) = g.col(0);
    auto inst = make_instance(g, Matrix::Constant(4, 2, 0.2), Vector::Constant(4, 8.0),
                              Vector::Constant(2, 3.0), 2.0);
    auto sol = solve_multi(inst);
    Plan plan = to_plan(sol.plan, inst);
    double f0 = 0.0, f1 = 0.0;
    for (Index t = 0; t < 4; ++t) {
        f0 += (plan.power(t, 0) + inst.lambda) * plan.share(t, 0);
        f1 += (plan.power(t, 1) + inst.lambda) * plan.share(t, 1);
    }
    CHECK(std::abs(f0 - f1) < 1e-6);
    CHECK(sol.duals.mu(0) == Approx(sol.duals.mu(1)).epsilon(1e-9));
}

TEST_CASE("small instance matches the reference solver") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = random_multi(rng, 3, 2, 0.8);
        Plan fast = to_plan(solve_multi(inst).plan, inst);
        auto ref = reference_solver(inst);
        CHECK(cost_relaxed(fast, inst) == Approx(ref.objective).epsilon(1e-4));
    }
}

TEST_CASE("outputs are feasible and certified") {
    Rng rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const Index T = 2 + trial % 19, N = 1 + trial % 4;
        auto inst = random_multi(rng, T, N, 0.3 + 0.6 * double(trial % 5) / 4.0);
        auto sol = solve_multi(inst);
        auto kkt = kkt_residuals(sol.plan, inst, sol.duals);
        CHECK(kkt.stationarity < 1e-6);
        CHECK(kkt.complementarity < 1e-6);
        CHECK((sol.plan.share.rowwise().sum().array() <= 1.0 + 1e-6).all());
        for (Index n = 0; n < N; ++n)
            CHECK(sol.plan.phi.col(n).sum() >= inst.demand(n) * (1.0 - 1e-6));
        CHECK((sol.duals.v.array() >= 0.0).all());
    }
}

TEST_CASE("contended slot prices are positive") {
    // Two receivers both want slot 0; slot 1 is poor for both. Alone, each would take
    // 1.8 / c_hat ~ 0.59 of slot 0, so together they overfill it.
    Matrix g(2, 2);
    g << 10.0, 10.0, 0.1, 0.1;
    auto inst = make_instance(g, Matrix::Zero(2, 2), Vector::Constant(2, 10.0), Vector::Constant(2, 1.8), 1.0);
    REQUIRE(2.0 * 1.8 / solve_theta_root(10.0, 0.0, 1.0) > 1.0);
    auto sol = solve_multi(inst);
    CHECK(sol.duals.v(0) > 0.0);
    CHECK(sol.plan.share.row(0).sum() == Approx(1.0).epsilon(1e-9));
    CHECK(kkt_residuals(sol.plan, inst, sol.duals).max() < 1e-6);
}

TEST_CASE("receiver demand above its own capacity is infeasible") {
    auto inst = make_instance(Matrix::Ones(2, 2), Matrix::Zero(2, 2), Vector::Constant(2, 3.0),
                              Vector::Constant(2, 1.0), 1.0);
    inst.demand(1) = 4.5;
    try {
        solve_multi(inst);
        FAIL("expected an infeasibility error");
    } catch (const InfeasibleError& e) {
        CHECK(e.receiver == 1);
        CHECK(e.max_throughput == Approx(4.0));
    }
}

TEST_CASE("jointly infeasible demands do not converge") {
    // Each receiver alone fits, but both need the whole horizon.
    auto inst = make_instance(Matrix::Ones(2, 2), Matrix::Zero(2, 2), Vector::Constant(2, 3.0),
                              Vector::Constant(2, 3.5), 1.0);
    MultiSolverOptions opt;
    opt.max_outer_iters = 200;
    CHECK_THROWS_AS(solve_multi(inst, opt), ConvergenceError);
}

TEST_CASE("trace records one row per iteration") {
    Rng rng(9);
    auto inst = random_multi(rng, 8, 3, 0.9);
    MultiSolverOptions opt;
    opt.record_trace = true;
    auto sol = solve_multi(inst, opt);
    REQUIRE(Index(sol.trace.size()) == sol.iterations);
    for (size_t k = 0; k < sol.trace.size(); ++k) {
        CHECK(sol.trace[k].iteration == Index(k + 1));
        CHECK(sol.trace[k].primal_residual >= 0.0);
        CHECK(sol.trace[k].step > 0.0);
    }
}
