#pragma once

#include "rmplan/experiments.hpp"

#include <json.hpp>

#include <string>

namespace rmplan {

/// Columns: slot,link_id,g_linear,kappa,los
void write_radio_map_csv(const std::string& path, const RadioMap& map);
/// Columns: node_id,role,slot,x,y,z
void write_tracks_csv(const std::string& path, const std::vector<NodeTrack>& tracks);

/// Columns: t,n,p_linear,l
void write_plan_csv(const std::string& path, const Plan& plan);
Plan read_plan_csv(const std::string& path);

/// `<stem>.json` holds T, N, delta, lambda and demands; `<stem>.csv` holds one row per
/// (slot, receiver) with columns t,n,g,eps,p_cap,c_cap.
void write_instance(const std::string& stem, const ProblemInstance& inst);
ProblemInstance read_instance(const std::string& stem);

/// Columns: iteration,v_norm,dual_objective,primal_residual,step
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

nlohmann::json to_json(const GapCertificate& c);
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_bench_csv(const std::string& path, const BenchReport& report);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

} // namespace rmplan
