#pragma once

#include "rmplan/problem.hpp"

#include <string>
#include <vector>

namespace rmplan {

/// Slot index sets of a share matrix. `partial` holds slots whose total usage is
/// strictly between 0 and 1; `partial_by[n]` is its intersection with slots receiver n uses.
struct SlotSets {
    std::vector<Index> partial;
    std::vector<std::vector<Index>> used_by;
    std::vector<std::vector<Index>> partial_by;
};

SlotSets slot_sets(const Matrix& share);
inline SlotSets slot_sets(const Plan& plan) { return slot_sets(plan.share); }

struct RoundingBudget {
    Vector f_hat;
};

/// Relaxed cost each receiver spends on its partial slots.
RoundingBudget rounding_budget(const Plan& plan, const ProblemInstance& inst);

/// Capacity per unit of (power + lambda).
template <typename Scalar>
Scalar generalized_efficiency(Scalar p, Scalar g, Scalar eps, Scalar lambda) {
    if (p < Scalar(0)) throw DomainError("generalized_efficiency: negative power");
    Scalar denom = p + lambda;
    if (denom == Scalar(0)) return Scalar(0);
    return capacity(p, g, eps) / denom;
}

struct EquivalenceResult {
    bool equivalent = true;
    /// 0 when equivalent, otherwise the first violated condition (1 powers, 2 shares, 3 budgets).
    int failed_condition = 0;
    Index slot = -1;
    Index receiver = -1;
    std::string detail;
    explicit operator bool() const { return equivalent; }
};

/// Checks that `b` keeps a's powers, a's shares outside a's partial slots and a's
/// per-receiver relaxed budget on those partial slots.
EquivalenceResult equivalence_check(const Plan& a, const Plan& b, const ProblemInstance& inst);

/// Moves each receiver's fractional usage onto as few slots as its budget allows,
/// filling partial slots in ascending time order.
Plan round_plan(const Plan& plan, const ProblemInstance& inst);

struct GapCertificate {
    double relaxed_cost = 0.0;
    double rounded_cost = 0.0;
    Index partial_slot_count = 0;
    Index receivers = 0;
    /// relaxed_cost + partial_slot_count * lambda
    double bound = 0.0;
    /// relaxed_cost + receivers * lambda
    double receiver_bound = 0.0;
    double delta = 1.0;
    bool holds = false;
};

GapCertificate gap_certificate(const Plan& relaxed, const Plan& rounded, const ProblemInstance& inst);

} // namespace rmplan
