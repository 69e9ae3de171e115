#include "rmplan/io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rmplan {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return in;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

// Reads a CSV with a header; returns rows of numbers after checking the header.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path, const std::string& header) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw std::runtime_error(path + ": expected header '" + header + "'");
    const size_t cols = split(header).size();
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != cols) throw std::runtime_error(path + ": malformed row '" + line + "'");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Binds JSON keys to struct fields so that reading and writing share one table.
template <typename T>
struct Fields {
    std::vector<std::pair<std::string, std::function<void(json&, const T&)>>> write;
    std::map<std::string, std::function<void(const json&, T&)>> read;

    template <typename V>
    Fields& add(const std::string& key, V T::*member) {
        write.emplace_back(key, [member](json& j, const T& s) { j = s.*member; });
        read[key] = [member](const json& j, T& s) { s.*member = j.get<V>(); };
        return *this;
    }

    json dump(const T& s) const {
        json j = json::object();
        for (const auto& [key, fn] : write) fn(j[key], s);
        return j;
    }

    void load(const json& j, T& s, const std::string& where) const {
        if (!j.is_object()) throw DomainError(where + ": expected an object");
        for (const auto& [key, value] : j.items()) {
            auto it = read.find(key);
            if (it == read.end()) throw DomainError(where + ": unknown key '" + key + "'");
            try {
                it->second(value, s);
            } catch (const json::exception& e) {
                throw DomainError(where + "." + key + ": " + e.what());
            }
        }
    }
};

const Fields<ScenarioConfig>& scenario_fields() {
    static const Fields<ScenarioConfig> f = [] {
        Fields<ScenarioConfig> f;
        f.add("area_m", &ScenarioConfig::area_m)
            .add("num_bs", &ScenarioConfig::num_bs)
            .add("num_users", &ScenarioConfig::num_users)
            .add("num_receivers", &ScenarioConfig::num_receivers)
            .add("tx_height_m", &ScenarioConfig::tx_height_m)
            .add("rx_height_horizontal_m", &ScenarioConfig::rx_height_horizontal_m)
            .add("rx_height_vertical_m", &ScenarioConfig::rx_height_vertical_m)
            .add("bs_height_m", &ScenarioConfig::bs_height_m)
            .add("user_height_m", &ScenarioConfig::user_height_m)
            .add("tx_speed_mps", &ScenarioConfig::tx_speed_mps)
            .add("rx_speed_mps", &ScenarioConfig::rx_speed_mps)
            .add("carrier_freq_ghz", &ScenarioConfig::carrier_freq_ghz)
            .add("shadowing_std_db", &ScenarioConfig::shadowing_std_db)
            .add("shadowing_corr_dist_m", &ScenarioConfig::shadowing_corr_dist_m)
            .add("los_a", &ScenarioConfig::los_a)
            .add("los_b", &ScenarioConfig::los_b)
            .add("los_threshold", &ScenarioConfig::los_threshold)
            .add("rng_seed", &ScenarioConfig::rng_seed);
        return f;
    }();
    return f;
}

const Fields<LinkBudget>& budget_fields() {
    static const Fields<LinkBudget> f = [] {
        Fields<LinkBudget> f;
        f.add("bandwidth_hz", &LinkBudget::bandwidth_hz)
            .add("noise_figure_db", &LinkBudget::noise_figure_db)
            .add("i_bs_dbm", &LinkBudget::i_bs_dbm)
            .add("p_max_dbm", &LinkBudget::p_max_dbm)
            .add("demand_bits", &LinkBudget::demand_bits);
        return f;
    }();
    return f;
}

const Fields<MultiSolverOptions>& solver_fields() {
    static const Fields<MultiSolverOptions> f = [] {
        Fields<MultiSolverOptions> f;
        f.add("step0", &MultiSolverOptions::step0)
            .add("max_outer_iters", &MultiSolverOptions::max_outer_iters)
            .add("v_tol", &MultiSolverOptions::v_tol)
            .add("recovery_interval", &MultiSolverOptions::recovery_interval)
            .add("record_trace", &MultiSolverOptions::record_trace);
        return f;
    }();
    return f;
}

const Fields<ExperimentConfig>& experiment_fields() {
    static const Fields<ExperimentConfig> f = [] {
        Fields<ExperimentConfig> f;
        f.add("i_ue_dbm", &ExperimentConfig::i_ue_dbm)
            .add("lambdas", &ExperimentConfig::lambdas)
            .add("deltas", &ExperimentConfig::deltas)
            .add("lambda", &ExperimentConfig::lambda)
            .add("delta", &ExperimentConfig::delta)
            .add("horizon_s", &ExperimentConfig::horizon_s)
            .add("num_fading_draws", &ExperimentConfig::num_fading_draws)
            .add("num_seeds", &ExperimentConfig::num_seeds)
            .add("womap_beta", &ExperimentConfig::womap_beta)
            .add("output_dir", &ExperimentConfig::output_dir);
        return f;
    }();
    return f;
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_radio_map_csv(const std::string& path, const RadioMap& map) {
    auto out = open_out(path);
    out << "slot,link_id,g_linear,kappa,los\n";
    for (Index t = 0; t < map.slots(); ++t)
        for (Index j = 0; j < map.links(); ++j)
            out << t << ',' << j << ',' << format_double(map.gain(t, j)) << ','
                << format_double(map.kappa(j)) << ',' << (map.los(t, j) ? 1 : 0) << '\n';
}

void write_tracks_csv(const std::string& path, const std::vector<NodeTrack>& tracks) {
    auto out = open_out(path);
    out << "node_id,role,slot,x,y,z\n";
    for (const auto& tr : tracks)
        for (size_t t = 0; t < tr.positions.size(); ++t)
            out << tr.node_id << ',' << to_string(tr.role) << ',' << t << ','
                << format_double(tr.positions[t].x) << ',' << format_double(tr.positions[t].y) << ','
                << format_double(tr.positions[t].z) << '\n';
}

void write_plan_csv(const std::string& path, const Plan& plan) {
    auto out = open_out(path);
    out << "t,n,p_linear,l\n";
    for (Index t = 0; t < plan.power.rows(); ++t)
        for (Index n = 0; n < plan.power.cols(); ++n)
            out << t << ',' << n << ',' << format_double(plan.power(t, n)) << ','
                << format_double(plan.share(t, n)) << '\n';
}

Plan read_plan_csv(const std::string& path) {
    auto rows = read_numeric_csv(path, "t,n,p_linear,l");
    Index T = 0, N = 0;
    for (const auto& r : rows) {
        T = std::max(T, Index(r[0]) + 1);
        N = std::max(N, Index(r[1]) + 1);
    }
    if (Index(rows.size()) != T * N) throw std::runtime_error(path + ": plan is not a full T x N grid");
    Plan plan{Matrix::Zero(T, N), Matrix::Zero(T, N)};
    for (const auto& r : rows) {
        plan.power(Index(r[0]), Index(r[1])) = r[2];
        plan.share(Index(r[0]), Index(r[1])) = r[3];
    }
    return plan;
}

void write_instance(const std::string& stem, const ProblemInstance& inst) {
    json header = {{"T", inst.slots()},
                   {"N", inst.receivers()},
                   {"delta", inst.delta},
                   {"lambda", inst.lambda},
                   {"demand", std::vector<double>(inst.demand.data(), inst.demand.data() + inst.demand.size())},
                   {"p_cap", std::vector<double>(inst.p_cap.data(), inst.p_cap.data() + inst.p_cap.size())}};
    open_out(stem + ".json") << header.dump(2) << '\n';
    auto out = open_out(stem + ".csv");
    out << "t,n,g,eps,p_cap,c_cap\n";
    for (Index t = 0; t < inst.slots(); ++t)
        for (Index n = 0; n < inst.receivers(); ++n)
            out << t << ',' << n << ',' << format_double(inst.g(t, n)) << ','
                << format_double(inst.eps(t, n)) << ',' << format_double(inst.p_cap(t)) << ','
                << format_double(inst.c_cap(t, n)) << '\n';
}

ProblemInstance read_instance(const std::string& stem) {
    json header = json::parse(open_in(stem + ".json"));
    const Index T = header.at("T").get<Index>(), N = header.at("N").get<Index>();
    auto demand = header.at("demand").get<std::vector<double>>();
    if (Index(demand.size()) != N) throw std::runtime_error(stem + ".json: demand size differs from N");
    auto rows = read_numeric_csv(stem + ".csv", "t,n,g,eps,p_cap,c_cap");
    if (Index(rows.size()) != T * N) throw std::runtime_error(stem + ".csv: expected T * N rows");
    Matrix g(T, N), eps(T, N);
    Vector p_cap(T);
    for (const auto& r : rows) {
        Index t = Index(r[0]), n = Index(r[1]);
        if (t < 0 || t >= T || n < 0 || n >= N) throw std::runtime_error(stem + ".csv: index out of range");
        g(t, n) = r[2];
        eps(t, n) = r[3];
        p_cap(t) = r[4];
    }
    return make_instance(g, eps, p_cap, Eigen::Map<Vector>(demand.data(), N),
                         header.at("lambda").get<double>(), header.at("delta").get<double>());
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    auto out = open_out(path);
    out << "iteration,v_norm,dual_objective,primal_residual,step\n";
    for (const auto& r : trace)
        out << r.iteration << ',' << format_double(r.v_norm) << ',' << format_double(r.dual_objective)
            << ',' << format_double(r.primal_residual) << ',' << format_double(r.step) << '\n';
}

json to_json(const GapCertificate& c) {
    return {{"relaxed_cost", c.relaxed_cost},         {"rounded_cost", c.rounded_cost},
            {"partial_slot_count", c.partial_slot_count}, {"receivers", c.receivers},
            {"bound", c.bound},                       {"receiver_bound", c.receiver_bound},
            {"delta", c.delta},                       {"holds", c.holds}};
}

json to_json(const ExperimentConfig& cfg) {
    json j = experiment_fields().dump(cfg);
    j["ratio_reading"] = to_string(cfg.ratio_reading);
    j["scenario"] = scenario_fields().dump(cfg.scenario);
    j["budget"] = budget_fields().dump(cfg.budget);
    j["solver"] = solver_fields().dump(cfg.solver);
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    json top = j;
    if (!top.is_object()) throw DomainError("config: expected an object");
    if (top.contains("scenario")) {
        scenario_fields().load(top["scenario"], cfg.scenario, "scenario");
        top.erase("scenario");
    }
    if (top.contains("budget")) {
        budget_fields().load(top["budget"], cfg.budget, "budget");
        top.erase("budget");
    }
    if (top.contains("solver")) {
        solver_fields().load(top["solver"], cfg.solver, "solver");
        top.erase("solver");
    }
    if (top.contains("ratio_reading")) {
        cfg.ratio_reading = parse_ratio_reading(top["ratio_reading"].get<std::string>());
        top.erase("ratio_reading");
    }
    experiment_fields().load(top, cfg, "config");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(open_in(path));
    } catch (const json::parse_error& e) {
        throw DomainError(path + ": " + e.what());
    }
    return config_from_json(j);
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << "delta,slots,relaxed_cost,rounded_cost,unrounded_cost,bound,partial_slots\n";
    for (const auto& r : rows)
        out << format_double(r.delta) << ',' << r.slots << ',' << format_double(r.relaxed_cost) << ','
            << format_double(r.rounded_cost) << ',' << format_double(r.unrounded_cost) << ','
            << format_double(r.bound) << ',' << r.partial_slots << '\n';
}

void write_bench_csv(const std::string& path, const BenchReport& report) {
    auto out = open_out(path);
    out << "slots,receivers,solve_s,round_s,reference_s,iterations\n";
    for (const auto& r : report.rows)
        out << r.slots << ',' << r.receivers << ',' << format_double(r.solve_s) << ','
            << format_double(r.round_s) << ',' << format_double(r.reference_s) << ',' << r.iterations
            << '\n';
}

} // namespace rmplan
