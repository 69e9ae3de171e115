#include "rmplan/rounding.hpp"

#include <algorithm>

namespace rmplan {

namespace {

bool is_partial(double used) { return used > kActiveTol && used < 1.0 - kActiveTol; }

bool same_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace

SlotSets slot_sets(const Matrix& share) {
    const Index T = share.rows(), N = share.cols();
    SlotSets s;
    s.used_by.resize(size_t(N));
    s.partial_by.resize(size_t(N));
    for (Index t = 0; t < T; ++t) {
        bool partial = is_partial(share.row(t).sum());
        if (partial) s.partial.push_back(t);
        for (Index n = 0; n < N; ++n) {
            if (share(t, n) <= kActiveTol) continue;
            s.used_by[size_t(n)].push_back(t);
            if (partial) s.partial_by[size_t(n)].push_back(t);
        }
    }
    return s;
}

RoundingBudget rounding_budget(const Plan& plan, const ProblemInstance& inst) {
    SlotSets sets = slot_sets(plan);
    RoundingBudget b{Vector::Zero(inst.receivers())};
    for (Index n = 0; n < inst.receivers(); ++n)
        for (Index t : sets.partial_by[size_t(n)])
            b.f_hat(n) += (plan.power(t, n) + inst.lambda) * plan.share(t, n);
    return b;
}

EquivalenceResult equivalence_check(const Plan& a, const Plan& b, const ProblemInstance& inst) {
    const Index T = inst.slots(), N = inst.receivers();
    EquivalenceResult r;
    auto fail = [&r](int cond, Index t, Index n, std::string why) {
        r.equivalent = false;
        r.failed_condition = cond;
        r.slot = t;
        r.receiver = n;
        r.detail = std::move(why);
        return r;
    };
    // Power is immaterial where a slot is not used, so condition (i) compares used entries.
    for (Index n = 0; n < N; ++n)
        for (Index t = 0; t < T; ++t)
            if (a.share(t, n) > 0.0 && b.share(t, n) > 0.0 &&
                !same_rel(a.power(t, n), b.power(t, n), 1e-9))
                return fail(1, t, n, "power differs on a used slot");

    SlotSets sets = slot_sets(a);
    for (Index n = 0; n < N; ++n) {
        std::vector<char> partial(size_t(T), 0);
        for (Index t : sets.partial_by[size_t(n)]) partial[size_t(t)] = 1;
        for (Index t = 0; t < T; ++t)
            if (!partial[size_t(t)] && std::abs(a.share(t, n) - b.share(t, n)) > 1e-12)
                return fail(2, t, n, "share differs outside the partial slots");
    }

    RoundingBudget budget = rounding_budget(a, inst);
    for (Index n = 0; n < N; ++n) {
        double spent = 0.0;
        for (Index t : sets.partial_by[size_t(n)])
            spent += (b.power(t, n) + inst.lambda) * b.share(t, n);
        if (!same_rel(spent, budget.f_hat(n), 1e-9))
            return fail(3, -1, n, "relaxed budget on partial slots differs");
    }
    return r;
}

Plan round_plan(const Plan& plan, const ProblemInstance& inst) {
    const Index T = inst.slots(), N = inst.receivers();
    if (plan.share.rows() != T || plan.share.cols() != N) throw DomainError("round_plan: shape mismatch");
    Plan out = plan;
    for (Index n = 0; n < N; ++n) {
        std::vector<Index> slots;
        for (Index t = 0; t < T; ++t)
            if (out.share(t, n) > kActiveTol && is_partial(out.share.row(t).sum())) slots.push_back(t);
        if (slots.empty()) continue;

        double f_hat = 0.0;
        std::vector<double> unit(slots.size()), cap(slots.size()), prefix(slots.size() + 1, 0.0);
        for (size_t i = 0; i < slots.size(); ++i) {
            Index t = slots[i];
            unit[i] = out.power(t, n) + inst.lambda;
            cap[i] = std::max(0.0, 1.0 - (out.share.row(t).sum() - out.share(t, n)));
            f_hat += unit[i] * out.share(t, n);
            prefix[i + 1] = prefix[i] + unit[i] * cap[i];
        }
        if (f_hat <= 0.0) continue;

        // Largest k whose first k slots, filled to capacity, fit within the budget.
        size_t k = size_t(std::upper_bound(prefix.begin(), prefix.end(), f_hat * (1.0 + 1e-12)) -
                          prefix.begin()) - 1;
        for (size_t i = 0; i < slots.size(); ++i) {
            Index t = slots[i];
            double l;
            if (i < k) {
                l = cap[i];
            } else if (i == k) {
                l = (f_hat - prefix[k]) / unit[i];
                if (l > cap[i] * (1.0 + 1e-9) + 1e-12)
                    throw std::logic_error("round_plan: budget equation has no solution within capacity");
                l = std::clamp(l, 0.0, cap[i]);
            } else {
                l = 0.0;
            }
            out.share(t, n) = l;
            if (l <= 0.0) out.power(t, n) = 0.0;
        }
    }
    return out;
}

GapCertificate gap_certificate(const Plan& relaxed, const Plan& rounded, const ProblemInstance& inst) {
    GapCertificate c;
    c.relaxed_cost = cost_relaxed(relaxed, inst);
    c.rounded_cost = cost_original(rounded, inst);
    c.partial_slot_count = Index(slot_sets(rounded).partial.size());
    c.receivers = inst.receivers();
    c.bound = c.relaxed_cost + double(c.partial_slot_count) * inst.lambda;
    c.receiver_bound = c.relaxed_cost + double(c.receivers) * inst.lambda;
    c.delta = inst.delta;
    const double slack = 1e-9 * std::max(1.0, std::abs(c.bound));
    c.holds = c.relaxed_cost <= c.rounded_cost + slack && c.rounded_cost <= c.bound + slack &&
              c.partial_slot_count <= c.receivers;
    return c;
}

} // namespace rmplan
