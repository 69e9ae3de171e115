#include "rmplan/baselines.hpp"

namespace rmplan {

RealizedChannels realize_channels(const RadioMap& map, const Matrix& fading, double noise_mw) {
    if (fading.rows() != map.slots() || fading.cols() != map.links())
        throw DomainError("realize_channels: fading shape mismatch");
    RealizedChannels out;
    auto rx = map.links_with_role(NodeRole::receiver);
    auto bs = map.links_with_role(NodeRole::neighbor);
    out.receiver_gain.resize(map.slots(), Index(rx.size()));
    out.neighbor_gain.resize(map.slots(), Index(bs.size()));
    for (size_t k = 0; k < rx.size(); ++k)
        out.receiver_gain.col(Index(k)) =
            map.gain.col(rx[k]).cwiseProduct(fading.col(rx[k])) / noise_mw;
    for (size_t k = 0; k < bs.size(); ++k)
        out.neighbor_gain.col(Index(k)) = map.gain.col(bs[k]).cwiseProduct(fading.col(bs[k]));
    return out;
}

BestEffortResult best_effort(const RealizedChannels& channels, const Vector& demand, double i_bs_mw,
                             double p_max_mw) {
    const Index T = channels.receiver_gain.rows(), N = channels.receiver_gain.cols();
    if (demand.size() != N) throw DomainError("best_effort: demand size mismatch");
    BestEffortResult r{{Matrix::Zero(T, N), Matrix::Zero(T, N)}, Vector::Zero(N)};
    for (Index t = 0; t < T; ++t) {
        std::vector<Index> unmet;
        for (Index n = 0; n < N; ++n)
            if (r.delivered(n) < demand(n)) unmet.push_back(n);
        if (unmet.empty()) break;
        double p = p_max_mw;
        if (channels.neighbor_gain.cols() > 0)
            p = std::min(p, i_bs_mw / channels.neighbor_gain.row(t).maxCoeff());
        const double l = 1.0 / double(unmet.size());
        for (Index n : unmet) {
            r.plan.share(t, n) = l;
            r.plan.power(t, n) = p;
            r.delivered(n) += l * std::log2(1.0 + p * channels.receiver_gain(t, n));
        }
    }
    return r;
}

PlannedScheme plan_instance(const ProblemInstance& inst, const MultiSolverOptions& options) {
    PlannedScheme s;
    s.instance = inst;
    s.solution = solve_multi(inst, options);
    s.relaxed = to_plan(s.solution.plan, inst);
    s.rounded = round_plan(s.relaxed, inst);
    return s;
}

PlannedScheme predictive_womap(const RadioMap& map, const LinkBudget& budget, double lambda,
                               double delta, double beta, const MultiSolverOptions& options) {
    return plan_instance(instance_from_map(map, budget, lambda, delta, beta), options);
}

} // namespace rmplan
