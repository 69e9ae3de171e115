#include "rmplan/instance_builder.hpp"

namespace rmplan {

namespace {

Matrix gather(const RadioMap& map, NodeRole role) {
    auto cols = map.links_with_role(role);
    Matrix out(map.slots(), Index(cols.size()));
    for (size_t k = 0; k < cols.size(); ++k) out.col(Index(k)) = map.gain.col(cols[k]);
    return out;
}

} // namespace

double LinkBudget::noise_mw() const {
    return db_to_linear(-174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

Matrix neighbor_gains(const RadioMap& map) { return gather(map, NodeRole::neighbor); }
Matrix user_gains(const RadioMap& map) { return gather(map, NodeRole::user); }

ProblemInstance instance_from_map(const RadioMap& map, const LinkBudget& budget, double lambda,
                                  double delta, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("instance_from_map: beta must lie in (0, 1]");
    if (!(budget.bandwidth_hz > 0.0)) throw DomainError("instance_from_map: bandwidth must be positive");
    auto rx = map.links_with_role(NodeRole::receiver);
    if (rx.empty()) throw DomainError("instance_from_map: radio map has no receivers");
    const Index T = map.slots(), N = Index(rx.size());

    Matrix g(T, N), eps(T, N);
    const double noise = budget.noise_mw();
    for (Index n = 0; n < N; ++n) {
        Index j = rx[size_t(n)];
        g.col(n) = beta * map.gain.col(j) / noise;
        eps.col(n).setConstant(capacity_gap(map.kappa(j)));
    }
    Vector p_cap = power_cap(budget.i_bs_mw(), neighbor_gains(map), budget.p_max_mw())
                       .cwiseMin(budget.p_max_mw());
    double demand = budget.demand_bits / (budget.bandwidth_hz * delta);
    return make_instance(std::move(g), std::move(eps), std::move(p_cap),
                         Vector::Constant(N, demand), lambda, delta);
}

} // namespace rmplan
