#pragma once

#include "rmplan/problem.hpp"

#include <vector>

namespace rmplan {

/// `efficient`: the most efficient rate fits under the cap. `capped`: it does not.
/// `unusable`: the capped capacity is not positive, so the slot can carry nothing.
enum class SlotClass { efficient, capped, unusable };

struct SlotThresholds {
    double c_hat = 0.0;
    double mu_hat = 0.0;
    double mu_bar = 0.0;
    double mu_tilde = kInf;
    SlotClass slot_class = SlotClass::unusable;

    /// Multiplier at which the slot switches on.
    double activation() const {
        switch (slot_class) {
        case SlotClass::efficient: return mu_hat;
        case SlotClass::capped: return mu_tilde;
        default: return kInf;
        }
    }
    /// Rate used by the fractional share when the multiplier sits at the activation point.
    double tie_rate(double c_bar) const { return slot_class == SlotClass::efficient ? c_hat : c_bar; }
};

/// Zero of theta maximizes capacity per unit of (power + lambda).
template <typename Scalar>
Scalar theta(Scalar x, Scalar g, Scalar eps, Scalar lambda_eff) {
    using std::exp2;
    Scalar e = exp2(x + eps);
    return (e - Scalar(1)) / g + lambda_eff - x * Scalar(kLn2) * e / g;
}

/// Upper end of the bracket that contains the root of theta.
double theta_root_bound(double g, double eps, double lambda_eff);
double solve_theta_root(double g, double eps, double lambda_eff);

SlotThresholds slot_thresholds(double g, double eps, double p_cap, double lambda_eff);
std::vector<SlotThresholds> slot_thresholds(const ProblemInstance& inst, Index n,
                                            const Vector& lambda_per_slot);

struct SlotAllocation {
    double phi = 0.0;
    double share = 0.0;
};

/// Closed-form maximizer of the per-slot Lagrangian for multiplier mu.
SlotAllocation allocate_slot(double mu, double l_tilde, const SlotThresholds& th, double c_bar);

/// Total throughput delivered at multiplier mu with tie fractions l_tilde.
double throughput_curve(double mu, const Vector& l_tilde, const std::vector<SlotThresholds>& th,
                        const Vector& c_bar);

struct SingleSolution {
    Vector phi;
    Vector share;
    Vector l_tilde;
    double mu = 0.0;
    Index tie_slots = 0;
    std::vector<SlotThresholds> thresholds;
};

/// Bisection on the throughput multiplier, then on the shared tie fraction.
SingleSolution solve_single(const Vector& c_bar, std::vector<SlotThresholds> thresholds,
                            double demand);
SingleSolution solve_single(const ProblemInstance& inst, Index n, const Vector& lambda_per_slot);
SingleSolution solve_single(const ProblemInstance& inst, Index n = 0);

struct DualState {
    Vector v;
    Vector mu;
    Matrix l_tilde;
};

struct TraceRow {
    Index iteration = 0;
    double v_norm = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;
    double step = 0.0;
};

struct MultiSolverOptions {
    /// Initial step as a multiple of the mean per-slot cost scale (p_cap + lambda).
    double step0 = 0.1;
    Index max_outer_iters = 5000;
    /// Stop when the multiplier update is below this, relative to the cost scale.
    double v_tol = 1e-8;
    /// Attempt primal recovery from the current multipliers every this many iterations.
    Index recovery_interval = 5;
    bool record_trace = false;
};

struct MultiSolution {
    PhiPlan plan;
    DualState duals;
    Index iterations = 0;
    /// True when the price iteration itself reached a fixed point.
    bool price_converged = false;
    std::vector<TraceRow> trace;
};

MultiSolution solve_multi(const ProblemInstance& inst, const MultiSolverOptions& options = {});

struct KktReport {
    double stationarity = 0.0;
    double complementarity = 0.0;
    double throughput = 0.0;
    double coupling = 0.0;
    double max() const;
};

/// Scaled residuals of the optimality conditions of the relaxed problem.
KktReport kkt_residuals(const PhiPlan& plan, const ProblemInstance& inst, const DualState& duals);

} // namespace rmplan
