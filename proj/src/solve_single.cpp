#include "rmplan/dual_solver.hpp"

namespace rmplan {

namespace {

constexpr int kMaxBisection = 200;
constexpr double kBisectionTol = 1e-12;
constexpr double kTieTol = 1e-9;

} // namespace

SingleSolution solve_single(const Vector& c_bar, std::vector<SlotThresholds> thresholds,
                            double demand) {
    const Index T = c_bar.size();
    if (Index(thresholds.size()) != T) throw DomainError("solve_single: threshold count mismatch");
    if (!(demand >= 0.0)) throw DomainError("solve_single: negative demand");

    SingleSolution sol;
    sol.phi = Vector::Zero(T);
    sol.share = Vector::Zero(T);
    sol.l_tilde = Vector::Zero(T);
    sol.thresholds = std::move(thresholds);
    const auto& th = sol.thresholds;
    if (demand == 0.0) return sol;

    double max_throughput = 0.0, mu_max = 0.0;
    for (Index t = 0; t < T; ++t) {
        const SlotThresholds& s = th[size_t(t)];
        if (s.slot_class == SlotClass::unusable) continue;
        max_throughput += c_bar(t);
        mu_max = std::max(mu_max, s.slot_class == SlotClass::efficient ? s.mu_bar : s.mu_tilde);
    }
    if (demand > max_throughput * (1.0 + 1e-12))
        throw InfeasibleError("demand exceeds the deliverable throughput", max_throughput);

    const Vector no_ties = Vector::Zero(T);
    double mu_min = 0.0;
    for (int k = 0; k < kMaxBisection && mu_max - mu_min >= kBisectionTol * mu_max; ++k) {
        double mid = 0.5 * (mu_min + mu_max);
        if (throughput_curve(mid, no_ties, th, c_bar) > demand)
            mu_max = mid;
        else
            mu_min = mid;
    }
    const double mu = mu_min;
    sol.mu = mu;

    // Tie slots are evaluated at their own threshold so the equality branch is hit exactly.
    std::vector<Index> ties;
    std::vector<char> is_tie(size_t(T), 0);
    double base = 0.0, tie_capacity = 0.0;
    for (Index t = 0; t < T; ++t) {
        const SlotThresholds& s = th[size_t(t)];
        double thr = s.activation();
        if (std::isfinite(thr) && std::abs(mu - thr) < kTieTol * thr) {
            ties.push_back(t);
            is_tie[size_t(t)] = 1;
            tie_capacity += s.tie_rate(c_bar(t));
        } else {
            base += allocate_slot(mu, 0.0, s, c_bar(t)).phi;
        }
    }
    sol.tie_slots = Index(ties.size());

    double l_star = 0.0;
    if (!ties.empty() && tie_capacity > 0.0) {
        double l_min = 0.0, l_max = 1.0;
        for (int k = 0; k < kMaxBisection && l_max - l_min >= kBisectionTol; ++k) {
            double l = 0.5 * (l_min + l_max);
            double total = base;
            for (Index t : ties) total += allocate_slot(th[size_t(t)].activation(), l, th[size_t(t)], c_bar(t)).phi;
            if (total > demand)
                l_max = l;
            else
                l_min = l;
        }
        l_star = l_max;
    }

    for (Index t = 0; t < T; ++t) {
        const SlotThresholds& s = th[size_t(t)];
        SlotAllocation a;
        if (is_tie[size_t(t)]) {
            a = allocate_slot(s.activation(), l_star, s, c_bar(t));
            sol.l_tilde(t) = l_star;
        } else {
            a = allocate_slot(mu, 0.0, s, c_bar(t));
        }
        sol.phi(t) = a.phi;
        sol.share(t) = a.share;
    }
    return sol;
}

SingleSolution solve_single(const ProblemInstance& inst, Index n, const Vector& lambda_per_slot) {
    if (n < 0 || n >= inst.receivers()) throw DomainError("solve_single: receiver index out of range");
    try {
        return solve_single(inst.c_cap.col(n), slot_thresholds(inst, n, lambda_per_slot), inst.demand(n));
    } catch (InfeasibleError& e) {
        throw InfeasibleError(e.what(), e.max_throughput, n);
    }
}

SingleSolution solve_single(const ProblemInstance& inst, Index n) {
    return solve_single(inst, n, Vector::Constant(inst.slots(), inst.lambda));
}

} // namespace rmplan
