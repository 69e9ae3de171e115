#pragma once

#include "rmplan/baselines.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rmplan {

enum class Scheme { proposed, best_effort, womap };
const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

/// How a user's received power is formed from a slot's plan: the strongest active
/// receiver's power, or the share-weighted sum of powers.
enum class RatioReading { max_power, inner_product };
const char* to_string(RatioReading r);
RatioReading parse_ratio_reading(const std::string& s);

struct ExperimentConfig {
    ScenarioConfig scenario;
    LinkBudget budget;
    std::vector<double> i_ue_dbm{-100.0, -90.0, -80.0};
    std::vector<double> lambdas{0.0, 100.0};
    std::vector<double> deltas{4.0, 2.0, 1.0, 0.5, 0.25, 0.125};
    double lambda = 100.0;
    double delta = 1.0;
    double horizon_s = 40.0;
    int num_fading_draws = 1000;
    int num_seeds = 20;
    double womap_beta = 0.5;
    RatioReading ratio_reading = RatioReading::max_power;
    MultiSolverOptions solver;
    std::string output_dir = "out";

    void validate() const;
    Index slots(double slot_duration) const;
};

struct MetricsRecord {
    Scheme scheme = Scheme::proposed;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double delta = 1.0;
    std::vector<double> i_ue_dbm;
    /// Strongest expected interference over neighbors per slot, dBm (floor -200 when idle).
    Vector bs_interference_dbm;
    Index violation_slots = 0;
    Matrix ratio;            ///< T x thresholds, r(t)
    Matrix cumulative_ratio; ///< running sum of r over t
    Vector mean_ratio;       ///< sum over t of r(t), per threshold
    double energy = 0.0;     ///< delta * sum p l
    Index active_slots = 0;
    double relaxed_cost = 0.0; ///< time units; zero for best effort
    double rounded_cost = 0.0; ///< original cost of the executed plan, time units
    double bound = 0.0;
    Index partial_slots = 0;
    Vector delivered; ///< expected-capacity throughput per receiver, normalized units
    double time_solve_s = 0.0;
    double time_round_s = 0.0;
    double time_eval_s = 0.0;
};

struct Scenario {
    std::vector<NodeTrack> tracks;
    RadioMap map;
};

/// Tracks and radio map for `seed` at slot duration `delta`; every entry point that
/// takes a seed builds its map through this.
Scenario make_scenario(const ExperimentConfig& cfg, std::uint64_t seed, double delta);

/// Scenario, map and fading realizations all derive from `seed`.
MetricsRecord run_pipeline(const ExperimentConfig& cfg, Scheme scheme, std::uint64_t seed,
                           double lambda);

/// run_pipeline over several seeds on a worker pool (0 threads: one per core). Output order
/// follows `seeds`.
std::vector<MetricsRecord> run_seeds(const ExperimentConfig& cfg, Scheme scheme, double lambda,
                                     const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

/// r(t) per threshold (columns). user_gain is T x Q raw linear gain, kappa per user.
Matrix interfered_ratio(const Plan& plan, const Matrix& user_gain, const Vector& user_kappa,
                        const std::vector<double>& i_ue_mw, int draws, Rng& rng,
                        RatioReading reading = RatioReading::max_power);

/// Per-slot transmit level seen by bystanders.
Vector transmit_level(const Plan& plan, RatioReading reading = RatioReading::max_power);

struct InterferenceEstimate {
    Matrix mean;     ///< T x M Monte Carlo mean of received interference (mW)
    Matrix std_err;  ///< T x M standard error of the mean
};

InterferenceEstimate interference_monte_carlo(const Plan& plan, const Matrix& neighbor_gain,
                                              const Vector& neighbor_kappa, int draws, Rng& rng);

struct SweepRow {
    double delta = 0.0;
    Index slots = 0;
    double relaxed_cost = 0.0;
    double rounded_cost = 0.0;
    double unrounded_cost = 0.0;
    double bound = 0.0;
    Index partial_slots = 0;
};

/// One scenario sampled at the finest delta; coarser deltas keep every k-th slot, so all
/// rows see the same channel. Costs are in time units (slot costs times delta).
std::vector<SweepRow> cost_vs_delta_sweep(const ExperimentConfig& cfg, std::uint64_t seed,
                                          double lambda);

struct BenchRow {
    Index slots = 0;
    Index receivers = 0;
    double solve_s = 0.0;
    double round_s = 0.0;
    double reference_s = -1.0; ///< negative when not measured
    Index iterations = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    /// Least-squares slope of log(solve time) against log(T), per receiver count.
    std::vector<std::pair<Index, double>> solve_exponent;
    /// Slope of log(round time) against log(T log T); near 1 for T log T growth.
    std::vector<std::pair<Index, double>> round_exponent;
};

/// Scenario-derived instance with T one-second slots.
ProblemInstance benchmark_instance(Index slots, Index receivers, std::uint64_t seed, double lambda = 100.0);

BenchReport runtime_benchmark(const std::vector<Index>& slot_counts,
                              const std::vector<Index>& receiver_counts, int repetitions,
                              Index reference_max_slots = 0, std::uint64_t seed = 1);

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Writes metrics_slots.csv, metrics_summary.csv, ratio_totals.csv, timings.csv and
/// manifest.json into `dir`.
void emit_reports(const ExperimentConfig& cfg, const std::vector<MetricsRecord>& records,
                  const std::string& dir);

} // namespace rmplan
