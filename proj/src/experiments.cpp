#include "rmplan/experiments.hpp"
#include "rmplan/io.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

namespace rmplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent streams per seed: the radio map, best-effort fading and evaluation fading.
Rng stream(std::uint64_t seed, std::uint64_t which) { return Rng(splitmix(seed * 4 + which)); }

Vector role_kappa(const RadioMap& map, NodeRole role) {
    auto links = map.links_with_role(role);
    Vector k(Index(links.size()));
    for (size_t i = 0; i < links.size(); ++i) k(Index(i)) = map.kappa(links[i]);
    return k;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

} // namespace

const char* to_string(Scheme s) {
    switch (s) {
    case Scheme::proposed: return "proposed";
    case Scheme::best_effort: return "best_effort";
    case Scheme::womap: return "womap";
    }
    return "?";
}

Scheme parse_scheme(const std::string& s) {
    if (s == "proposed") return Scheme::proposed;
    if (s == "best_effort") return Scheme::best_effort;
    if (s == "womap") return Scheme::womap;
    throw DomainError("unknown scheme: " + s);
}

const char* to_string(RatioReading r) {
    return r == RatioReading::max_power ? "max_power" : "inner_product";
}

RatioReading parse_ratio_reading(const std::string& s) {
    if (s == "max_power") return RatioReading::max_power;
    if (s == "inner_product") return RatioReading::inner_product;
    throw DomainError("unknown ratio reading: " + s);
}

Index ExperimentConfig::slots(double slot_duration) const {
    if (!(slot_duration > 0.0)) throw DomainError("slot duration must be positive");
    double ratio = horizon_s / slot_duration;
    double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw DomainError("slot duration " + format_double(slot_duration) +
                          " does not divide the horizon " + format_double(horizon_s));
    return Index(rounded);
}

void ExperimentConfig::validate() const {
    scenario.validate();
    if (!(budget.bandwidth_hz > 0.0) || !(budget.demand_bits >= 0.0) ||
        !std::isfinite(budget.i_bs_dbm) || !std::isfinite(budget.p_max_dbm) ||
        !std::isfinite(budget.noise_figure_db))
        throw DomainError("link budget: bandwidth must be positive and levels finite");
    if (!(horizon_s > 0.0)) throw DomainError("horizon_s must be positive");
    if (num_fading_draws < 1) throw DomainError("num_fading_draws must be >= 1");
    if (num_seeds < 1) throw DomainError("num_seeds must be >= 1");
    if (!(womap_beta > 0.0)) throw DomainError("womap_beta must be positive");
    if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
    for (double l : lambdas)
        if (!(l >= 0.0)) throw DomainError("lambdas must be >= 0");
    for (double t : i_ue_dbm)
        if (std::isnan(t)) throw DomainError("i_ue_dbm entries must be numbers");
    slots(delta);
    for (double d : deltas) slots(d);
}

Vector transmit_level(const Plan& plan, RatioReading reading) {
    const Index T = plan.power.rows();
    Vector level = Vector::Zero(T);
    for (Index t = 0; t < T; ++t)
        for (Index n = 0; n < plan.power.cols(); ++n) {
            if (!(plan.share(t, n) > 0.0)) continue;
            if (reading == RatioReading::max_power)
                level(t) = std::max(level(t), plan.power(t, n));
            else
                level(t) += plan.power(t, n) * plan.share(t, n);
        }
    return level;
}

Matrix interfered_ratio(const Plan& plan, const Matrix& user_gain, const Vector& user_kappa,
                        const std::vector<double>& i_ue_mw, int draws, Rng& rng,
                        RatioReading reading) {
    const Index T = plan.power.rows(), Q = user_gain.cols(), K = Index(i_ue_mw.size());
    if (user_gain.rows() != T || user_kappa.size() != Q)
        throw DomainError("interfered_ratio: user channel shape mismatch");
    if (draws < 1) throw DomainError("interfered_ratio: draws must be >= 1");
    Matrix r = Matrix::Zero(T, K);
    if (Q == 0) return r;
    const Vector level = transmit_level(plan, reading);
    const double weight = 1.0 / (double(draws) * double(Q) * double(T));
    for (Index t = 0; t < T; ++t) {
        if (!(level(t) > 0.0)) continue;
        for (Index q = 0; q < Q; ++q) {
            const double mean_rx = level(t) * user_gain(t, q);
            for (int d = 0; d < draws; ++d) {
                const double rx = mean_rx * sample_fading(user_kappa(q), rng);
                for (Index k = 0; k < K; ++k)
                    if (rx > i_ue_mw[size_t(k)]) r(t, k) += weight;
            }
        }
    }
    return r;
}

InterferenceEstimate interference_monte_carlo(const Plan& plan, const Matrix& neighbor_gain,
                                              const Vector& neighbor_kappa, int draws, Rng& rng) {
    const Index T = plan.power.rows(), M = neighbor_gain.cols();
    if (neighbor_gain.rows() != T || neighbor_kappa.size() != M)
        throw DomainError("interference_monte_carlo: neighbor channel shape mismatch");
    if (draws < 2) throw DomainError("interference_monte_carlo: draws must be >= 2");
    const Vector level = transmit_level(plan, RatioReading::max_power);
    InterferenceEstimate e{Matrix::Zero(T, M), Matrix::Zero(T, M)};
    for (Index t = 0; t < T; ++t)
        for (Index m = 0; m < M; ++m) {
            double sum = 0.0, sq = 0.0;
            for (int d = 0; d < draws; ++d) {
                double x = level(t) * neighbor_gain(t, m) * sample_fading(neighbor_kappa(m), rng);
                sum += x;
                sq += x * x;
            }
            double mean = sum / draws;
            double var = std::max(0.0, (sq - draws * mean * mean) / (draws - 1));
            e.mean(t, m) = mean;
            e.std_err(t, m) = std::sqrt(var / draws);
        }
    return e;
}

Scenario make_scenario(const ExperimentConfig& cfg, std::uint64_t seed, double delta) {
    ScenarioConfig sc = cfg.scenario;
    sc.rng_seed = seed;
    Scenario s;
    s.tracks = generate_tracks(sc, delta, cfg.slots(delta));
    Rng map_rng = stream(seed, 1);
    s.map = build_radio_map(sc, s.tracks, map_rng);
    return s;
}

MetricsRecord run_pipeline(const ExperimentConfig& cfg, Scheme scheme, std::uint64_t seed,
                           double lambda) {
    cfg.validate();
    ScenarioConfig sc = cfg.scenario;
    sc.rng_seed = seed;
    const double delta = cfg.delta;
    const Index T = cfg.slots(delta);
    const Scenario scen = make_scenario(cfg, seed, delta);
    const auto& tracks = scen.tracks;
    const RadioMap& map = scen.map;
    const ProblemInstance truth = instance_from_map(map, cfg.budget, lambda, delta);

    MetricsRecord rec;
    rec.scheme = scheme;
    rec.seed = seed;
    rec.lambda = lambda;
    rec.delta = delta;
    rec.i_ue_dbm = cfg.i_ue_dbm;

    Plan plan;
    auto start = Clock::now();
    if (scheme == Scheme::best_effort) {
        Rng fade_rng = stream(seed, 2);
        RealizedChannels ch =
            realize_channels(map, sample_fading_matrix(map, fade_rng), cfg.budget.noise_mw());
        plan = best_effort(ch, truth.demand, cfg.budget.i_bs_mw(), cfg.budget.p_max_mw()).plan;
        rec.time_solve_s = seconds_since(start);
    } else {
        PlannedScheme ps;
        if (scheme == Scheme::proposed) {
            ps.instance = truth;
            ps.solution = solve_multi(truth, cfg.solver);
        } else {
            ps.instance = instance_from_map(average_radio_map(sc, tracks), cfg.budget, lambda, delta,
                                            cfg.womap_beta);
            ps.solution = solve_multi(ps.instance, cfg.solver);
        }
        ps.relaxed = to_plan(ps.solution.plan, ps.instance);
        rec.time_solve_s = seconds_since(start);
        start = Clock::now();
        ps.rounded = round_plan(ps.relaxed, ps.instance);
        rec.time_round_s = seconds_since(start);
        GapCertificate cert = gap_certificate(ps.relaxed, ps.rounded, ps.instance);
        rec.relaxed_cost = delta * cert.relaxed_cost;
        rec.bound = delta * cert.bound;
        rec.partial_slots = cert.partial_slot_count;
        plan = ps.rounded;
    }

    start = Clock::now();
    const Matrix nb = neighbor_gains(map);
    const Vector level = transmit_level(plan, RatioReading::max_power);
    const double i_bs = cfg.budget.i_bs_mw();
    rec.bs_interference_dbm = Vector::Constant(T, -200.0);
    for (Index t = 0; t < T; ++t) {
        if (!(level(t) > 0.0) || nb.cols() == 0) continue;
        double worst = level(t) * nb.row(t).maxCoeff();
        rec.bs_interference_dbm(t) = std::max(-200.0, linear_to_db(worst));
        if (worst > i_bs * (1.0 + 1e-9)) ++rec.violation_slots;
    }

    std::vector<double> thresholds;
    for (double d : cfg.i_ue_dbm) thresholds.push_back(std::isinf(d) && d < 0 ? -kInf : db_to_linear(d));
    Rng eval_rng = stream(seed, 3);
    rec.ratio = interfered_ratio(plan, user_gains(map), role_kappa(map, NodeRole::user), thresholds,
                                 cfg.num_fading_draws, eval_rng, cfg.ratio_reading);
    rec.cumulative_ratio = rec.ratio;
    for (Index t = 1; t < T; ++t) rec.cumulative_ratio.row(t) += rec.cumulative_ratio.row(t - 1);
    rec.mean_ratio = rec.ratio.colwise().sum().transpose();
    rec.energy = delta * energy(plan);
    rec.active_slots = active_slots(plan);
    rec.rounded_cost = delta * cost_original(plan, truth);
    rec.delivered = throughputs(plan, truth);
    rec.time_eval_s = seconds_since(start);
    return rec;
}

std::vector<MetricsRecord> run_seeds(const ExperimentConfig& cfg, Scheme scheme, double lambda,
                                     const std::vector<std::uint64_t>& seeds, unsigned threads) {
    std::vector<MetricsRecord> out(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < seeds.size(); i = next++) {
            try {
                out[i] = run_pipeline(cfg, scheme, seeds[i], lambda);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = unsigned(std::min<size_t>(threads, std::max<size_t>(1, seeds.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::vector<SweepRow> cost_vs_delta_sweep(const ExperimentConfig& cfg, std::uint64_t seed,
                                          double lambda) {
    cfg.validate();
    if (cfg.deltas.empty()) throw DomainError("cost_vs_delta_sweep: empty delta list");
    std::vector<double> deltas = cfg.deltas;
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    const double finest = deltas.back();
    const RadioMap fine = make_scenario(cfg, seed, finest).map;

    std::vector<SweepRow> rows;
    for (double d : deltas) {
        const double ratio = d / finest;
        const Index stride = Index(std::llround(ratio));
        if (std::abs(ratio - double(stride)) > 1e-9 * ratio)
            throw DomainError("cost_vs_delta_sweep: every delta must be a multiple of the finest");
        const RadioMap map = fine.subsample(stride);
        const ProblemInstance inst = instance_from_map(map, cfg.budget, lambda, d);
        const PlannedScheme ps = plan_instance(inst, cfg.solver);
        SweepRow row;
        row.delta = d;
        row.slots = inst.slots();
        row.relaxed_cost = d * cost_relaxed(ps.relaxed, inst);
        row.rounded_cost = d * cost_original(ps.rounded, inst);
        row.unrounded_cost = d * cost_original(ps.relaxed, inst);
        row.bound = row.relaxed_cost + double(inst.receivers()) * d * lambda;
        row.partial_slots = Index(slot_sets(ps.relaxed).partial.size());
        rows.push_back(row);
    }
    return rows;
}

ProblemInstance benchmark_instance(Index slots, Index receivers, std::uint64_t seed, double lambda) {
    ScenarioConfig sc;
    sc.num_receivers = int(receivers);
    sc.num_users = 0;
    sc.rng_seed = seed;
    Rng map_rng = stream(seed, 1);
    const RadioMap map = build_radio_map(sc, generate_tracks(sc, 1.0, slots), map_rng);
    // Same demand per slot as the 40-slot desk scenario.
    LinkBudget budget;
    budget.demand_bits *= double(slots) / 40.0;
    return instance_from_map(map, budget, lambda, 1.0);
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_loglog_slope: need >= 2 points");
    Eigen::MatrixXd A(Index(x.size()), 2);
    Eigen::VectorXd b(Index(x.size()));
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_loglog_slope: values must be positive");
        A(Index(i), 0) = std::log(x[i]);
        A(Index(i), 1) = 1.0;
        b(Index(i)) = std::log(y[i]);
    }
    return A.colPivHouseholderQr().solve(b)(0);
}

BenchReport runtime_benchmark(const std::vector<Index>& slot_counts,
                              const std::vector<Index>& receiver_counts, int repetitions,
                              Index reference_max_slots, std::uint64_t seed) {
    if (repetitions < 1) throw DomainError("runtime_benchmark: repetitions must be >= 1");
    BenchReport report;
    for (Index N : receiver_counts) {
        std::vector<double> Ts, TlogTs, solve, round;
        for (Index T : slot_counts) {
            const ProblemInstance inst = benchmark_instance(T, N, seed);
            std::vector<double> s_times, r_times, ref_times;
            BenchRow row;
            row.slots = T;
            row.receivers = N;
            for (int k = 0; k < repetitions; ++k) {
                auto start = Clock::now();
                MultiSolution sol = solve_multi(inst);
                s_times.push_back(seconds_since(start));
                row.iterations = sol.iterations;
                Plan relaxed = to_plan(sol.plan, inst);
                start = Clock::now();
                Plan rounded = round_plan(relaxed, inst);
                r_times.push_back(seconds_since(start));
                if (T <= reference_max_slots) {
                    start = Clock::now();
                    reference_solver(inst);
                    ref_times.push_back(seconds_since(start));
                }
            }
            row.solve_s = median(s_times);
            row.round_s = median(r_times);
            if (!ref_times.empty()) row.reference_s = median(ref_times);
            report.rows.push_back(row);
            Ts.push_back(double(T));
            TlogTs.push_back(double(T) * std::log(double(T)));
            solve.push_back(row.solve_s);
            round.push_back(std::max(row.round_s, 1e-9));
        }
        if (Ts.size() >= 2) {
            report.solve_exponent.emplace_back(N, fit_loglog_slope(Ts, solve));
            report.round_exponent.emplace_back(N, fit_loglog_slope(TlogTs, round));
        }
    }
    return report;
}

void emit_reports(const ExperimentConfig& cfg, const std::vector<MetricsRecord>& records,
                  const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path root(dir);

    auto slots = open_out(root / "metrics_slots.csv");
    slots << "scheme,seed,lambda,delta,slot,bs_interference_dbm,i_ue_dbm,ratio,cumulative_ratio\n";
    auto summary = open_out(root / "metrics_summary.csv");
    summary << "scheme,seed,lambda,delta,energy,active_slots,relaxed_cost,rounded_cost,bound,"
               "partial_slots,violation_slots,min_delivered\n";
    auto totals = open_out(root / "ratio_totals.csv");
    totals << "scheme,seed,lambda,i_ue_dbm,total_ratio\n";
    auto timings = open_out(root / "timings.csv");
    timings << "scheme,seed,lambda,solve_s,round_s,eval_s\n";

    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& r : records) {
        const std::string key = std::string(to_string(r.scheme)) + "," + std::to_string(r.seed) +
                                "," + format_double(r.lambda);
        seeds.push_back(r.seed);
        for (Index t = 0; t < r.ratio.rows(); ++t)
            for (Index k = 0; k < r.ratio.cols(); ++k)
                slots << key << ',' << format_double(r.delta) << ',' << t << ','
                      << format_double(r.bs_interference_dbm(t)) << ','
                      << format_double(r.i_ue_dbm[size_t(k)]) << ',' << format_double(r.ratio(t, k))
                      << ',' << format_double(r.cumulative_ratio(t, k)) << '\n';
        summary << key << ',' << format_double(r.delta) << ',' << format_double(r.energy) << ','
                << r.active_slots << ',' << format_double(r.relaxed_cost) << ','
                << format_double(r.rounded_cost) << ',' << format_double(r.bound) << ','
                << r.partial_slots << ',' << r.violation_slots << ','
                << format_double(r.delivered.size() ? r.delivered.minCoeff() : 0.0) << '\n';
        for (Index k = 0; k < r.mean_ratio.size(); ++k)
            totals << key << ',' << format_double(r.i_ue_dbm[size_t(k)]) << ','
                   << format_double(r.mean_ratio(k)) << '\n';
        timings << key << ',' << format_double(r.time_solve_s) << ',' << format_double(r.time_round_s)
                << ',' << format_double(r.time_eval_s) << '\n';
    }

    nlohmann::json manifest;
    manifest["config"] = to_json(cfg);
    manifest["seeds"] = seeds;
    manifest["versions"] = {
        {"rmplan", "0.1.0"},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
        {"cplusplus", __cplusplus}};
    manifest["files"] = {"metrics_slots.csv", "metrics_summary.csv", "ratio_totals.csv", "timings.csv"};
    open_out(root / "manifest.json") << manifest.dump(2) << '\n';
}

} // namespace rmplan
