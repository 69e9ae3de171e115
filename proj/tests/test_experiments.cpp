#include "rmplan/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rmplan;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

ExperimentConfig quick_config() {
    ExperimentConfig cfg;
    cfg.scenario.num_users = 20;
    cfg.num_fading_draws = 50;
    cfg.horizon_s = 40.0;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("rmplan_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("interfered ratio of a silent plan is zero") {
    Plan plan{Matrix::Zero(4, 2), Matrix::Zero(4, 2)};
    Rng rng(1);
    Matrix r = interfered_ratio(plan, Matrix::Ones(4, 3), Vector::Ones(3), {1e-9}, 10, rng);
    CHECK(r.isZero());
}

TEST_CASE("interfered ratio counts users above the threshold") {
    const Index T = 5;
    Plan plan{Matrix::Zero(T, 1), Matrix::Zero(T, 1)};
    plan.power(2, 0) = 1.0;
    plan.share(2, 0) = 1.0;
    Matrix gain(T, 2);
    gain.col(0).setConstant(1.0);
    gain.col(1).setConstant(1e-12);
    Rng rng(2);
    Matrix r = interfered_ratio(plan, gain, Vector::Constant(2, kInf), {1e-6}, 7, rng);
    CHECK(r(2, 0) == Approx(1.0 / (2.0 * double(T))));
    CHECK(r.sum() == Approx(r(2, 0)));

    // A threshold of minus infinity is exceeded whenever anything is sent.
    Matrix all = interfered_ratio(plan, gain, Vector::Constant(2, 3.0), {-kInf}, 7, rng);
    CHECK(all.sum() == Approx(1.0 / double(T)));
}

TEST_CASE("ratio readings differ on shared slots") {
    Plan plan{Matrix(1, 2), Matrix(1, 2)};
    plan.power << 4.0, 1.0;
    plan.share << 0.5, 0.5;
    CHECK(transmit_level(plan, RatioReading::max_power)(0) == 4.0);
    CHECK(transmit_level(plan, RatioReading::inner_product)(0) == Approx(2.5));
}

TEST_CASE("expected neighbor interference is gain times the strongest power") {
    const Index T = 3;
    Plan plan{Matrix(T, 2), Matrix::Constant(T, 2, 0.5)};
    plan.power << 1.0, 2.0, 3.0, 0.5, 0.2, 0.1;
    Matrix nb(T, 2);
    nb << 1e-3, 2e-3, 5e-4, 1e-4, 3e-3, 1e-3;
    Rng rng(9);
    auto est = interference_monte_carlo(plan, nb, Vector::Constant(2, 4.0), 20000, rng);
    for (Index t = 0; t < T; ++t)
        for (Index m = 0; m < 2; ++m) {
            double expect = nb(t, m) * plan.power.row(t).maxCoeff();
            CHECK(est.mean(t, m) == Approx(expect).epsilon(0.01));
            CHECK(est.std_err(t, m) > 0.0);
        }
}

TEST_CASE("pipeline is deterministic per seed") {
    auto cfg = quick_config();
    for (Scheme s : {Scheme::proposed, Scheme::best_effort, Scheme::womap}) {
        auto a = run_pipeline(cfg, s, 4, 100.0), b = run_pipeline(cfg, s, 4, 100.0);
        CHECK(a.ratio == b.ratio);
        CHECK(a.bs_interference_dbm == b.bs_interference_dbm);
        CHECK(a.energy == b.energy);
        CHECK(((a.ratio.array() >= 0.0) && (a.ratio.array() <= 1.0)).all());
        CHECK(a.bs_interference_dbm.allFinite());
    }
}

TEST_CASE("proposed scheme respects the neighbor limit and serves demand") {
    auto cfg = quick_config();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto rec = run_pipeline(cfg, Scheme::proposed, seed, 100.0);
        CHECK(rec.violation_slots == 0);
        CHECK((rec.bs_interference_dbm.array() <= cfg.budget.i_bs_dbm + 1e-6).all());
        double demand = cfg.budget.demand_bits / (cfg.budget.bandwidth_hz * cfg.delta);
        CHECK(rec.delivered.minCoeff() >= demand * (1.0 - 1e-6));
        CHECK(rec.rounded_cost <= rec.bound + 1e-6 * rec.bound);
        CHECK(rec.relaxed_cost <= rec.rounded_cost + 1e-9 * rec.rounded_cost);
    }
}

TEST_CASE("a larger penalty uses no more slots") {
    auto cfg = quick_config();
    for (std::uint64_t seed : {1u, 5u, 9u}) {
        auto lo = run_pipeline(cfg, Scheme::proposed, seed, 0.0);
        auto hi = run_pipeline(cfg, Scheme::proposed, seed, 100.0);
        CHECK(hi.active_slots <= lo.active_slots);
    }
}

TEST_CASE("no users means no interfered users") {
    auto cfg = quick_config();
    cfg.scenario.num_users = 0;
    auto rec = run_pipeline(cfg, Scheme::proposed, 2, 100.0);
    CHECK(rec.ratio.isZero());
}

TEST_CASE("parallel seeds match sequential runs") {
    auto cfg = quick_config();
    std::vector<std::uint64_t> seeds{1, 2, 3};
    auto par = run_seeds(cfg, Scheme::best_effort, 100.0, seeds, 3);
    for (size_t k = 0; k < seeds.size(); ++k) {
        auto one = run_pipeline(cfg, Scheme::best_effort, seeds[k], 100.0);
        CHECK(par[k].seed == seeds[k]);
        CHECK(par[k].ratio == one.ratio);
    }
}

TEST_CASE("delta sweep stays inside the certificate") {
    auto cfg = quick_config();
    cfg.deltas = {4.0, 2.0, 1.0, 0.5};
    auto rows = cost_vs_delta_sweep(cfg, 1, 100.0);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r.relaxed_cost <= r.rounded_cost * (1.0 + 1e-9));
        CHECK(r.rounded_cost <= r.bound * (1.0 + 1e-9));
        CHECK(r.unrounded_cost >= r.rounded_cost * (1.0 - 1e-9));
        CHECK(r.slots == Index(std::llround(cfg.horizon_s / r.delta)));
    }
    CHECK(rows.front().delta == 4.0);
}

TEST_CASE("config validation") {
    auto cfg = quick_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.delta = 3.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = quick_config();
    cfg.deltas = {0.3};
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    CHECK(quick_config().slots(0.125) == 320);
}

TEST_CASE("config round trips through json and rejects unknown keys") {
    auto cfg = quick_config();
    cfg.lambdas = {0.0, 10.0, 100.0};
    cfg.scenario.num_bs = 3;
    cfg.budget.i_bs_dbm = -75.0;
    cfg.ratio_reading = RatioReading::inner_product;
    cfg.solver.recovery_interval = 7;
    auto j = to_json(cfg);
    auto back = config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.scenario.num_bs == 3);
    CHECK(back.ratio_reading == RatioReading::inner_product);

    auto partial = config_from_json(nlohmann::json::parse(R"({"lambda": 5, "budget": {"demand_bits": 1e8}})"));
    CHECK(partial.lambda == 5.0);
    CHECK(partial.budget.demand_bits == 1e8);
    CHECK(partial.budget.i_bs_dbm == -70.0);

    CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"lamda": 5})")));
    CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"scenario": {"num_bss": 5}})")));
}

TEST_CASE("plan and instance files round trip") {
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix g(5, 2), eps(5, 2);
    for (Index t = 0; t < 5; ++t)
        for (Index n = 0; n < 2; ++n) {
            g(t, n) = std::pow(10.0, -9.0 + 6.0 * u(rng));
            eps(t, n) = u(rng);
        }
    auto inst = make_instance(g, eps, Vector::Constant(5, 200.0), Vector::Constant(2, 3.3), 12.5, 0.5);
    auto dir = scratch("io");
    fs::create_directories(dir);
    write_instance((dir / "inst").string(), inst);
    auto back = read_instance((dir / "inst").string());
    CHECK(back.g == inst.g);
    CHECK(back.eps == inst.eps);
    CHECK(back.p_cap == inst.p_cap);
    CHECK(back.demand == inst.demand);
    CHECK(back.lambda == inst.lambda);
    CHECK(back.delta == inst.delta);

    Plan plan{Matrix::Random(5, 2).cwiseAbs(), Matrix::Random(5, 2).cwiseAbs() * 0.5};
    write_plan_csv((dir / "plan.csv").string(), plan);
    Plan read = read_plan_csv((dir / "plan.csv").string());
    CHECK(read.power == plan.power);
    CHECK(read.share == plan.share);
    fs::remove_all(dir);
}

TEST_CASE("format_double is shortest round trip") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5})
        CHECK(std::stod(format_double(x)) == x);
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("reports are reproducible and complete") {
    auto cfg = quick_config();
    cfg.i_ue_dbm = {-90.0, -80.0};
    auto recs = run_seeds(cfg, Scheme::proposed, 100.0, {1, 2}, 1);
    auto a = scratch("reports_a"), b = scratch("reports_b");
    emit_reports(cfg, recs, a.string());
    emit_reports(cfg, run_seeds(cfg, Scheme::proposed, 100.0, {1, 2}, 2), b.string());
    for (const char* f : {"metrics_slots.csv", "metrics_summary.csv", "ratio_totals.csv"})
        CHECK(slurp(a / f) == slurp(b / f));

    std::ifstream slots(a / "metrics_slots.csv");
    std::string line;
    std::getline(slots, line);
    CHECK(line == "scheme,seed,lambda,delta,slot,bs_interference_dbm,i_ue_dbm,ratio,cumulative_ratio");
    int rows = 0;
    while (std::getline(slots, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 9);
        double ratio = std::stod(cells[7]);
        CHECK(ratio >= 0.0);
        CHECK(ratio <= 1.0);
    }
    CHECK(rows == 2 * 40 * 2);

    auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["config"] == to_json(cfg));
    CHECK(manifest["config"]["scenario"].size() == 18);
    CHECK(manifest["config"]["budget"].size() == 5);
    CHECK(manifest["seeds"].size() == 2);
    CHECK(manifest["versions"].contains("eigen"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("log-log slope of an exact power law") {
    std::vector<double> x{10, 100, 1000}, y{3e-3, 3e-1, 30.0};
    CHECK(fit_loglog_slope(x, y) == Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(fit_loglog_slope({1.0}, {1.0}), DomainError);
}

TEST_CASE("benchmark instance keeps the per-slot demand") {
    auto small = benchmark_instance(40, 4, 1);
    auto large = benchmark_instance(400, 4, 1);
    CHECK(large.demand(0) == Approx(10.0 * small.demand(0)));
    CHECK(large.slots() == 400);
    CHECK(large.receivers() == 4);
}
