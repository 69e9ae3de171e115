#include "rmplan/baselines.hpp"

#include <doctest.h>

using namespace rmplan;
using doctest::Approx;

namespace {

ProblemInstance two_slot_instance() {
    return make_instance(Matrix::Ones(2, 1), Matrix::Zero(2, 1), Vector::Constant(2, 3.0),
                         Vector::Constant(1, 2.0), 1.0);
}

ProblemInstance random_single(Rng& rng, Index T) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix g(T, 1), eps(T, 1);
    Vector p_cap(T);
    for (Index t = 0; t < T; ++t) {
        g(t, 0) = std::pow(10.0, -3.0 + 3.0 * u(rng));
        eps(t, 0) = capacity_gap(1.0 + 29.0 * u(rng));
        p_cap(t) = std::pow(10.0, 1.0 + 3.0 * u(rng));
    }
    auto inst = make_instance(g, eps, p_cap, Vector::Zero(1), 100.0 * u(rng));
    inst.demand(0) = (0.05 + 0.9 * u(rng)) * inst.c_cap.col(0).cwiseMax(0.0).sum();
    return inst;
}

PhiPlan as_plan(const SingleSolution& s) {
    return {s.phi, s.share};
}

DualState as_duals(const SingleSolution& s, Index T) {
    return {Vector::Zero(T), Vector::Constant(1, s.mu), s.l_tilde};
}

} // namespace

TEST_CASE("two-slot instance splits evenly at the efficient rate") {
    auto inst = two_slot_instance();
    auto sol = solve_single(inst);
    CHECK(sol.mu == Approx(1.884169385363720).epsilon(1e-10));
    CHECK(sol.tie_slots == 2);
    CHECK(sol.share(0) == Approx(0.6931471805599453).epsilon(1e-10));
    CHECK(sol.share(1) == Approx(0.6931471805599453).epsilon(1e-10));
    Plan plan = to_plan(as_plan(sol), inst);
    CHECK(cost_relaxed(plan, inst) == Approx(3.768338770727440).epsilon(1e-9));
    CHECK(throughput_lb(plan, inst, 0) == Approx(2.0).epsilon(1e-10));
}

TEST_CASE("two-slot relaxed cost agrees with a grid search") {
    // Symmetric split is optimal by convexity; scan share l with the rate fixed by S = 2 l c.
    auto inst = two_slot_instance();
    double best = kInf;
    for (double l = 0.5; l <= 1.0; l += 1e-4) {
        double c = 1.0 / l;
        if (c > inst.c_cap(0, 0)) continue;
        best = std::min(best, 2.0 * l * (std::exp2(c) - 1.0 + inst.lambda));
    }
    Plan plan = to_plan(as_plan(solve_single(inst)), inst);
    CHECK(cost_relaxed(plan, inst) <= best + 1e-12);
    CHECK(cost_relaxed(plan, inst) == Approx(best).epsilon(1e-6));
}

TEST_CASE("zero demand gives the zero plan") {
    auto inst = two_slot_instance();
    inst.demand(0) = 0.0;
    auto sol = solve_single(inst);
    CHECK(sol.phi.isZero());
    CHECK(sol.share.isZero());
    CHECK(sol.mu == 0.0);
    auto kkt = kkt_residuals(as_plan(sol), inst, as_duals(sol, 2));
    CHECK(kkt.max() == 0.0);
}

TEST_CASE("full demand saturates every slot") {
    auto inst = two_slot_instance();
    inst.demand(0) = inst.c_cap.sum();
    auto sol = solve_single(inst);
    for (Index t = 0; t < 2; ++t) {
        CHECK(sol.share(t) == Approx(1.0));
        CHECK(sol.phi(t) == Approx(inst.c_cap(t, 0)).epsilon(1e-9));
    }
}

TEST_CASE("infeasible demand reports the deliverable throughput") {
    auto inst = two_slot_instance();
    inst.demand(0) = 5.0;
    try {
        solve_single(inst);
        FAIL("expected an infeasibility error");
    } catch (const InfeasibleError& e) {
        CHECK(e.max_throughput == Approx(4.0));
        CHECK(e.receiver == 0);
    }
}

TEST_CASE("optimality residuals are small on random instances") {
    Rng rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        auto inst = random_single(rng, 1 + trial % 30);
        auto sol = solve_single(inst);
        auto kkt = kkt_residuals(as_plan(sol), inst, as_duals(sol, inst.slots()));
        CHECK(kkt.stationarity < 1e-6);
        CHECK(kkt.complementarity < 1e-6);
        CHECK(sol.phi.sum() >= inst.demand(0) * (1.0 - 1e-9));
        CHECK(((sol.share.array() >= 0.0) && (sol.share.array() <= 1.0)).all());
    }
}

TEST_CASE("a perturbed interior share is reported") {
    auto inst = two_slot_instance();
    auto sol = solve_single(inst);
    PhiPlan plan = as_plan(sol);
    plan.share(0) += 0.1;
    plan.phi(0) = plan.share(0) * sol.phi(0) / sol.share(0);
    CHECK(kkt_residuals(plan, inst, as_duals(sol, 2)).max() > 1e-3);
}

TEST_CASE("single receiver matches the reference solver") {
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = random_single(rng, 2 + trial % 10);
        Plan fast = to_plan(as_plan(solve_single(inst)), inst);
        auto ref = reference_solver(inst);
        CHECK(cost_relaxed(fast, inst) == Approx(ref.objective).epsilon(1e-6));
        CHECK(cost_relaxed(fast, inst) <= ref.objective * (1.0 + 1e-9));
    }
}

TEST_CASE("slot-varying penalty shifts usage to cheap slots") {
    auto inst = two_slot_instance();
    Vector lam(2);
    lam << 1.0, 5.0;
    auto sol = solve_single(inst, 0, lam);
    CHECK(sol.share(0) > sol.share(1));
    CHECK(sol.phi.sum() == Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(solve_single(inst, 0, Vector::Ones(3)), DomainError);
}
