#include "rmplan/instance_builder.hpp"
#include "rmplan/problem.hpp"

#include <doctest.h>

using namespace rmplan;
using doctest::Approx;

namespace {

ProblemInstance unit_instance(Index T, Index N, double lambda, double p_cap = 10.0, double demand = 0.0) {
    return make_instance(Matrix::Ones(T, N), Matrix::Zero(T, N), Vector::Constant(T, p_cap),
                         Vector::Constant(N, demand), lambda);
}

// Lower tail of log2(1 + p g xi) under Gamma(kappa, 1/kappa) fading, by Monte Carlo.
double expected_capacity(double snr, double kappa, int draws, Rng& rng) {
    std::gamma_distribution<double> gamma(kappa, 1.0 / kappa);
    double s = 0.0;
    for (int k = 0; k < draws; ++k) s += std::log2(1.0 + snr * gamma(rng));
    return s / draws;
}

} // namespace

TEST_CASE("capacity gap reference values") {
    CHECK(capacity_gap(1.0) == Approx(0.8577325401678072).epsilon(1e-12));
    CHECK(capacity_gap(2.0) == Approx(0.3994194255571194).epsilon(1e-12));
    CHECK(capacity_gap(1e6) < 1e-5);
    CHECK(capacity_gap(1e6) >= 0.0);
    CHECK(capacity_gap(kInf) == 0.0);
    CHECK_THROWS_AS(capacity_gap(0.5), DomainError);
}

TEST_CASE("capacity gap bounds the expected fading capacity from below") {
    Rng rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        double snr = std::pow(10.0, -1.0 + 4.0 * u(rng));
        double kappa = 1.0 + std::floor(29.0 * u(rng));
        double mc = expected_capacity(snr, kappa, 200000, rng);
        CHECK(mc >= std::log2(1.0 + snr) - capacity_gap(kappa) - 5e-3);
    }
}

TEST_CASE("power cap from the strongest neighbor") {
    Matrix g(1, 2);
    g << db_to_linear(-60.0), db_to_linear(-80.0);
    Vector cap = power_cap(db_to_linear(-70.0), g, 200.0);
    CHECK(cap(0) == Approx(0.1).epsilon(1e-12));

    Matrix none(3, 0);
    Vector fallback = power_cap(1.0, none, 200.0);
    CHECK((fallback.array() == 200.0).all());
    CHECK_THROWS_AS(power_cap(0.0, g, 200.0), DomainError);
}

TEST_CASE("original cost") {
    auto inst = unit_instance(1, 1, 1.0);
    Plan zero = zero_plan(inst);
    CHECK(cost_original(zero, inst) == 0.0);

    Plan one{Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0)};
    CHECK(cost_original(one, inst) == Approx(3.0));

    auto two = unit_instance(1, 2, 1.0);
    Plan split{Matrix(1, 2), Matrix(1, 2)};
    split.power << 2.0, 4.0;
    split.share << 0.5, 0.5;
    CHECK(cost_original(split, two) == Approx(4.0));
}

TEST_CASE("relaxed cost") {
    auto inst = unit_instance(1, 1, 1.0);
    Plan half{Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 0.5)};
    CHECK(cost_relaxed(half, inst) == Approx(1.5));
    CHECK(cost_original(half, inst) == Approx(2.0));
    CHECK(cost_relaxed(zero_plan(inst), inst) == 0.0);

    Plan full{Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0)};
    CHECK(cost_relaxed(full, inst) == cost_original(full, inst));
}

TEST_CASE("relaxed cost never exceeds original cost") {
    Rng rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const Index T = 1 + Index(u(rng) * 6), N = 1 + Index(u(rng) * 3);
        auto inst = unit_instance(T, N, 5.0 * u(rng));
        Plan plan{Matrix::Zero(T, N), Matrix::Zero(T, N)};
        bool integral = u(rng) < 0.3;
        for (Index t = 0; t < T; ++t) {
            double left = 1.0;
            for (Index n = 0; n < N; ++n) {
                double l = integral ? (n == 0 && u(rng) < 0.5 ? 1.0 : 0.0) : left * u(rng);
                left -= l;
                plan.share(t, n) = l;
                plan.power(t, n) = 10.0 * u(rng);
            }
        }
        const double rel = cost_relaxed(plan, inst), orig = cost_original(plan, inst);
        CHECK(rel <= orig + 1e-12);
        bool all_integral = true;
        for (Index t = 0; t < T; ++t) {
            double s = plan.share.row(t).sum();
            all_integral = all_integral && (s < kActiveTol || s > 1.0 - kActiveTol);
        }
        if (all_integral || inst.lambda == 0.0)
            CHECK(rel == Approx(orig).epsilon(1e-12));
        else
            CHECK(rel < orig);
    }
}

TEST_CASE("throughput lower bound") {
    auto inst = unit_instance(1, 1, 0.0);
    CHECK(throughput_lb(zero_plan(inst), inst, 0) == 0.0);

    Plan p{Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, 0.5)};
    CHECK(throughput_lb(p, inst, 0) == Approx(1.0).epsilon(1e-14));

    auto gap = make_instance(Matrix::Ones(1, 1), Matrix::Constant(1, 1, 0.5), Vector::Constant(1, 10.0),
                             Vector::Zero(1), 0.0);
    Plan cancel{Matrix::Constant(1, 1, std::exp2(0.5) - 1.0), Matrix::Constant(1, 1, 1.0)};
    CHECK(throughput_lb(cancel, gap, 0) == Approx(0.0).scale(1.0).epsilon(1e-14));
}

TEST_CASE("phi and power conversion") {
    CHECK(phi_to_power(0.7, 0.0, 1.0, 0.0) == 0.0);
    CHECK(phi_to_power(1.0, 1.0, 1.0, 0.0) == Approx(1.0));
    CHECK(phi_to_power(2.0, 0.5, 2.0, 0.0) == Approx(7.5));
    CHECK_THROWS_AS(phi_to_power(-1.0, 0.5, 1.0, 0.1), DomainError);
    CHECK_THROWS_AS(phi_to_power(1.0, 1.5, 1.0, 0.0), DomainError);
}

TEST_CASE("phi and power round trip") {
    Rng rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        double g = std::pow(10.0, -3.0 + 6.0 * u(rng));
        double eps = capacity_gap(1.0 + 29.0 * u(rng));
        double l = 0.01 + 0.99 * u(rng);
        double p = std::pow(10.0, -2.0 + 4.0 * u(rng));
        if (capacity(p, g, eps) < 0.0) continue;
        double back = phi_to_power(power_to_phi(p, l, g, eps), l, g, eps);
        CHECK(back == Approx(p).epsilon(1e-9));
    }
}

TEST_CASE("feasibility report") {
    auto free = unit_instance(2, 1, 0.0, 10.0, 0.0);
    CHECK(feasibility_check(zero_plan(free), free).empty());

    auto demanding = unit_instance(2, 1, 0.0, 10.0, 1.0);
    auto v = feasibility_check(zero_plan(demanding), demanding);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Kind::throughput);
    CHECK(v[0].amount == Approx(1.0));

    auto two = unit_instance(1, 2, 0.0);
    Plan over{Matrix::Zero(1, 2), Matrix(1, 2)};
    over.share << 0.6, 0.6;
    auto s = feasibility_check(over, two);
    REQUIRE(s.size() == 1);
    CHECK(s[0].kind == Violation::Kind::simplex);
    CHECK(s[0].amount == Approx(0.2));

    Plan hot{Matrix::Constant(1, 2, 11.0), Matrix::Constant(1, 2, 0.5)};
    int caps = 0;
    for (auto& x : feasibility_check(hot, two)) caps += x.kind == Violation::Kind::power_cap;
    CHECK(caps == 2);
}

TEST_CASE("instance validation") {
    CHECK_THROWS_AS(make_instance(Matrix::Ones(2, 1), Matrix::Zero(2, 1), Vector::Ones(3), Vector::Ones(1), 0.0),
                    DomainError);
    CHECK_THROWS_AS(make_instance(Matrix::Zero(2, 1), Matrix::Zero(2, 1), Vector::Ones(2), Vector::Ones(1), 0.0),
                    DomainError);
    CHECK_THROWS_AS(make_instance(Matrix::Ones(2, 1), Matrix::Zero(2, 1), Vector::Ones(2), Vector::Ones(1), -1.0),
                    DomainError);
    auto inst = unit_instance(2, 1, 0.0, 3.0);
    CHECK(inst.c_cap(0, 0) == Approx(2.0));
}

TEST_CASE("instance from map normalizes gains by noise") {
    ScenarioConfig cfg;
    cfg.num_users = 0;
    auto tracks = generate_tracks(cfg, 1.0, 5);
    Rng rng(1);
    RadioMap map = build_radio_map(cfg, tracks, rng);
    LinkBudget budget;
    auto inst = instance_from_map(map, budget, 100.0, 1.0);
    CHECK(inst.receivers() == cfg.num_receivers);
    CHECK(budget.noise_mw() == Approx(db_to_linear(-174.0 + 70.0 + 7.0)).epsilon(1e-12));
    auto rx = map.links_with_role(NodeRole::receiver);
    CHECK(inst.g(2, 1) == Approx(map.gain(2, rx[1]) / budget.noise_mw()).epsilon(1e-14));
    CHECK(inst.demand(0) == Approx(50.0));
    CHECK((inst.p_cap.array() <= budget.p_max_mw()).all());

    auto half = instance_from_map(map, budget, 100.0, 1.0, 0.5);
    CHECK(half.g(2, 1) == Approx(0.5 * inst.g(2, 1)).epsilon(1e-14));
    CHECK_THROWS_AS(instance_from_map(map, budget, 100.0, 1.0, 0.0), DomainError);
}
