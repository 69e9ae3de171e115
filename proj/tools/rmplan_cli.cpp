#include "rmplan/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

using namespace rmplan;
namespace fs = std::filesystem;

namespace {

// Flags that mirror ExperimentConfig keys. Anything given on the command line wins over
// the config file.
struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda, delta, horizon_s, womap_beta;
    std::optional<int> num_fading_draws, num_seeds, num_receivers, num_users, num_bs;
    std::optional<double> demand_bits, bandwidth_hz, i_bs_dbm, p_max_dbm;
    std::optional<std::vector<double>> i_ue_dbm, lambdas, deltas;
    std::optional<std::string> output_dir, ratio_reading;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "scenario seed (first seed for multi-seed runs)");
        app->add_option("--lambda", lambda, "duration penalty per slot");
        app->add_option("--delta", delta, "slot duration (s)");
        app->add_option("--horizon-s", horizon_s, "planning horizon (s)");
        app->add_option("--womap-beta", womap_beta, "gain backoff of the map-free baseline");
        app->add_option("--num-fading-draws", num_fading_draws);
        app->add_option("--num-seeds", num_seeds);
        app->add_option("--num-receivers", num_receivers);
        app->add_option("--num-users", num_users);
        app->add_option("--num-bs", num_bs);
        app->add_option("--demand-bits", demand_bits, "demand per receiver (bits)");
        app->add_option("--bandwidth-hz", bandwidth_hz);
        app->add_option("--i-bs-dbm", i_bs_dbm);
        app->add_option("--p-max-dbm", p_max_dbm);
        app->add_option("--i-ue-dbm", i_ue_dbm, "user interference thresholds")->delimiter(',');
        app->add_option("--lambdas", lambdas)->delimiter(',');
        app->add_option("--deltas", deltas)->delimiter(',');
        app->add_option("-o,--output-dir", output_dir);
        app->add_option("--ratio-reading", ratio_reading, "max_power or inner_product");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (seed) cfg.scenario.rng_seed = *seed;
        if (lambda) cfg.lambda = *lambda;
        if (delta) cfg.delta = *delta;
        if (horizon_s) cfg.horizon_s = *horizon_s;
        if (womap_beta) cfg.womap_beta = *womap_beta;
        if (num_fading_draws) cfg.num_fading_draws = *num_fading_draws;
        if (num_seeds) cfg.num_seeds = *num_seeds;
        if (num_receivers) cfg.scenario.num_receivers = *num_receivers;
        if (num_users) cfg.scenario.num_users = *num_users;
        if (num_bs) cfg.scenario.num_bs = *num_bs;
        if (demand_bits) cfg.budget.demand_bits = *demand_bits;
        if (bandwidth_hz) cfg.budget.bandwidth_hz = *bandwidth_hz;
        if (i_bs_dbm) cfg.budget.i_bs_dbm = *i_bs_dbm;
        if (p_max_dbm) cfg.budget.p_max_dbm = *p_max_dbm;
        if (i_ue_dbm) cfg.i_ue_dbm = *i_ue_dbm;
        if (lambdas) cfg.lambdas = *lambdas;
        if (deltas) cfg.deltas = *deltas;
        if (output_dir) cfg.output_dir = *output_dir;
        if (ratio_reading) cfg.ratio_reading = parse_ratio_reading(*ratio_reading);
        cfg.validate();
        return cfg;
    }
};

fs::path out_dir(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    return fs::path(cfg.output_dir);
}

int scenario_gen(const ExperimentConfig& cfg) {
    const fs::path dir = out_dir(cfg);
    const Index T = cfg.slots(cfg.delta);
    const auto [tracks, map] = make_scenario(cfg, cfg.scenario.rng_seed, cfg.delta);
    write_tracks_csv((dir / "tracks.csv").string(), tracks);
    write_radio_map_csv((dir / "radio_map.csv").string(), map);
    write_radio_map_csv((dir / "average_radio_map.csv").string(), average_radio_map(cfg.scenario, tracks));
    write_instance((dir / "instance").string(), instance_from_map(map, cfg.budget, cfg.lambda, cfg.delta));
    std::cout << "wrote tracks, radio maps and instance for " << T << " slots to " << dir.string() << '\n';
    return 0;
}

int plan(const ExperimentConfig& cfg, const std::string& scheme_name, const std::string& instance_stem,
         bool trace) {
    const fs::path dir = out_dir(cfg);
    MultiSolverOptions opts = cfg.solver;
    opts.record_trace = opts.record_trace || trace;
    PlannedScheme ps;
    if (!instance_stem.empty()) {
        ps = plan_instance(read_instance(instance_stem), opts);
    } else {
        const Scheme scheme = parse_scheme(scheme_name);
        if (scheme == Scheme::best_effort)
            throw DomainError("plan: best_effort reacts to realized channels; use evaluate");
        const auto [tracks, map] = make_scenario(cfg, cfg.scenario.rng_seed, cfg.delta);
        ps = scheme == Scheme::proposed
                 ? predictive_womap(map, cfg.budget, cfg.lambda, cfg.delta, 1.0, opts)
                 : predictive_womap(average_radio_map(cfg.scenario, tracks), cfg.budget, cfg.lambda,
                                    cfg.delta, cfg.womap_beta, opts);
    }
    write_instance((dir / "instance").string(), ps.instance);
    write_plan_csv((dir / "plan_relaxed.csv").string(), ps.relaxed);
    write_plan_csv((dir / "plan_rounded.csv").string(), ps.rounded);
    if (opts.record_trace) write_trace_csv((dir / "trace.csv").string(), ps.solution.trace);
    nlohmann::json cert = to_json(gap_certificate(ps.relaxed, ps.rounded, ps.instance));
    cert["iterations"] = ps.solution.iterations;
    cert["kkt_max"] = kkt_residuals(ps.solution.plan, ps.instance, ps.solution.duals).max();
    std::ofstream(dir / "certificate.json") << cert.dump(2) << '\n';
    std::cout << cert.dump(2) << '\n';
    return 0;
}

int evaluate(const ExperimentConfig& cfg, const std::vector<std::string>& schemes, unsigned threads) {
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < cfg.num_seeds; ++k) seeds.push_back(cfg.scenario.rng_seed + std::uint64_t(k));
    std::vector<MetricsRecord> records;
    for (const auto& name : schemes) {
        const Scheme s = parse_scheme(name);
        // Only the proposed scheme's plan depends on lambda in a way worth sweeping.
        std::vector<double> lambdas = s == Scheme::proposed ? cfg.lambdas : std::vector<double>{cfg.lambda};
        for (double lambda : lambdas) {
            auto part = run_seeds(cfg, s, lambda, seeds, threads);
            records.insert(records.end(), part.begin(), part.end());
        }
    }
    emit_reports(cfg, records, cfg.output_dir);
    std::cout << "scheme,lambda,i_ue_dbm,mean_total_ratio,violating_seeds\n";
    for (size_t i = 0; i < records.size();) {
        size_t j = i;
        Vector total = Vector::Zero(records[i].mean_ratio.size());
        int violating = 0;
        while (j < records.size() && records[j].scheme == records[i].scheme &&
               records[j].lambda == records[i].lambda) {
            total += records[j].mean_ratio;
            violating += records[j].violation_slots > 0;
            ++j;
        }
        total /= double(j - i);
        for (Index k = 0; k < total.size(); ++k)
            std::cout << to_string(records[i].scheme) << ',' << format_double(records[i].lambda) << ','
                      << format_double(cfg.i_ue_dbm[size_t(k)]) << ',' << format_double(total(k)) << ','
                      << violating << '\n';
        i = j;
    }
    return 0;
}

int sweep(const ExperimentConfig& cfg) {
    const fs::path dir = out_dir(cfg);
    auto rows = cost_vs_delta_sweep(cfg, cfg.scenario.rng_seed, cfg.lambda);
    write_sweep_csv((dir / "sweep.csv").string(), rows);
    std::cout << "delta,slots,relaxed_cost,rounded_cost,unrounded_cost,bound,partial_slots\n";
    for (const auto& r : rows)
        std::cout << format_double(r.delta) << ',' << r.slots << ',' << format_double(r.relaxed_cost)
                  << ',' << format_double(r.rounded_cost) << ',' << format_double(r.unrounded_cost)
                  << ',' << format_double(r.bound) << ',' << r.partial_slots << '\n';
    return 0;
}

int bench(const ExperimentConfig& cfg, const std::vector<Index>& Ts, const std::vector<Index>& Ns,
          int reps, Index reference_max) {
    const fs::path dir = out_dir(cfg);
    BenchReport report = runtime_benchmark(Ts, Ns, reps, reference_max, cfg.scenario.rng_seed);
    write_bench_csv((dir / "bench.csv").string(), report);
    std::cout << "slots,receivers,solve_s,round_s,reference_s,iterations\n";
    for (const auto& r : report.rows)
        std::cout << r.slots << ',' << r.receivers << ',' << format_double(r.solve_s) << ','
                  << format_double(r.round_s) << ',' << format_double(r.reference_s) << ','
                  << r.iterations << '\n';
    for (size_t k = 0; k < report.solve_exponent.size(); ++k)
        std::cout << "N=" << report.solve_exponent[k].first
                  << " solve exponent in T: " << report.solve_exponent[k].second
                  << ", round exponent in T log T: " << report.round_exponent[k].second << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radio-map based transmission planning under interference limits"};
    app.require_subcommand(1);

    Overrides o_gen, o_plan, o_eval, o_sweep, o_bench;

    auto* scenario = app.add_subcommand("scenario", "scenario utilities");
    scenario->require_subcommand(1);
    auto* gen = scenario->add_subcommand("gen", "write tracks, radio maps and the planning instance");
    o_gen.attach(gen);

    auto* plan_cmd = app.add_subcommand("plan", "solve, round and certify one instance");
    o_plan.attach(plan_cmd);
    std::string scheme = "proposed", instance_stem;
    bool trace = false;
    plan_cmd->add_option("--scheme", scheme, "proposed or womap");
    plan_cmd->add_option("--instance", instance_stem, "plan a saved instance (<stem>.json + <stem>.csv)");
    plan_cmd->add_flag("--trace", trace, "write the dual iteration trace");

    auto* eval_cmd = app.add_subcommand("evaluate", "run schemes over seeds and write metrics");
    o_eval.attach(eval_cmd);
    std::vector<std::string> schemes{"proposed", "best_effort", "womap"};
    unsigned threads = 0;
    eval_cmd->add_option("--schemes", schemes)->delimiter(',');
    eval_cmd->add_option("--threads", threads, "worker threads (0: one per core)");

    auto* sweep_cmd = app.add_subcommand("sweep-delta", "cost versus slot duration");
    o_sweep.attach(sweep_cmd);

    auto* bench_cmd = app.add_subcommand("bench", "runtime scaling of the planner");
    o_bench.attach(bench_cmd);
    std::vector<Index> Ts{100, 1000, 10000}, Ns{4};
    int reps = 3;
    Index reference_max = 0;
    bench_cmd->add_option("--T", Ts)->delimiter(',');
    bench_cmd->add_option("--N", Ns)->delimiter(',');
    bench_cmd->add_option("--reps", reps);
    bench_cmd->add_option("--reference-max-slots", reference_max, "also time the reference solver up to this T");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return scenario_gen(o_gen.resolve());
        if (*plan_cmd) return plan(o_plan.resolve(), scheme, instance_stem, trace);
        if (*eval_cmd) return evaluate(o_eval.resolve(), schemes, threads);
        if (*sweep_cmd) return sweep(o_sweep.resolve());
        if (*bench_cmd) return bench(o_bench.resolve(), Ts, Ns, reps, reference_max);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what();
        if (e.receiver >= 0) std::cerr << " (receiver " << e.receiver << ", max throughput " << e.max_throughput << ")";
        std::cerr << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << " (primal residual " << e.primal_residual << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
