#pragma once

#include "rmplan/types.hpp"

#include <string>
#include <vector>

namespace rmplan {

/// Deterministic planning input. Matrices are T x N (slot x receiver).
template <typename Scalar>
struct BasicProblemInstance {
    Scalar delta = Scalar(1);
    Scalar lambda = Scalar(0);
    MatrixX<Scalar> g;
    MatrixX<Scalar> eps;
    MatrixX<Scalar> c_cap;
    VectorX<Scalar> p_cap;
    VectorX<Scalar> demand;

    Index slots() const { return g.rows(); }
    Index receivers() const { return g.cols(); }
};

template <typename Scalar>
struct BasicPlan {
    MatrixX<Scalar> power;
    MatrixX<Scalar> share;
};

/// Throughput-share form: phi = (log2(1 + p g) - eps) * l.
template <typename Scalar>
struct BasicPhiPlan {
    MatrixX<Scalar> phi;
    MatrixX<Scalar> share;
};

using ProblemInstance = BasicProblemInstance<double>;
using Plan = BasicPlan<double>;
using PhiPlan = BasicPhiPlan<double>;

template <typename Scalar>
Scalar capacity_gap(Scalar kappa) {
    using std::log2;
    if (!(kappa >= Scalar(1))) throw DomainError("capacity_gap: kappa must be >= 1");
    if (std::isinf(double(kappa))) return Scalar(0);
    return Scalar(kLog2e) / kappa - log2(Scalar(1) + Scalar(1) / (Scalar(2) * kappa));
}

/// Lower bound on expected capacity at power p.
template <typename Scalar>
Scalar capacity(Scalar p, Scalar g, Scalar eps) {
    using std::log2;
    return log2(Scalar(1) + p * g) - eps;
}

template <typename Scalar>
Scalar phi_to_power(Scalar phi, Scalar l, Scalar g, Scalar eps) {
    using std::exp2;
    if (l < Scalar(0) || l > Scalar(1)) throw DomainError("phi_to_power: l outside [0, 1]");
    if (l == Scalar(0)) return Scalar(0);
    Scalar rate = phi / l + eps;
    if (rate < Scalar(0)) throw DomainError("phi_to_power: phi / l + eps is negative");
    return (exp2(rate) - Scalar(1)) / g;
}

template <typename Scalar>
Scalar power_to_phi(Scalar p, Scalar l, Scalar g, Scalar eps) {
    if (l == Scalar(0)) return Scalar(0);
    return capacity(p, g, eps) * l;
}

/// Validates shapes and invariants and fills c_cap.
ProblemInstance make_instance(Matrix g, Matrix eps, Vector p_cap, Vector demand, double lambda,
                              double delta = 1.0);

void validate(const ProblemInstance& inst);

/// Largest power keeping expected interference at every neighbor (columns) below i_bs.
/// With no neighbors, p_max applies.
Vector power_cap(double i_bs, const Matrix& neighbor_gains, double p_max);

Plan zero_plan(const ProblemInstance& inst);

double energy(const Plan& plan);
Index active_slots(const Plan& plan);
double cost_original(const Plan& plan, const ProblemInstance& inst);
double cost_relaxed(const Plan& plan, const ProblemInstance& inst);
double throughput_lb(const Plan& plan, const ProblemInstance& inst, Index n);
Vector throughputs(const Plan& plan, const ProblemInstance& inst);

Plan to_plan(const PhiPlan& plan, const ProblemInstance& inst);
PhiPlan to_phi_plan(const Plan& plan, const ProblemInstance& inst);

struct Violation {
    enum class Kind { throughput, negative_share, simplex, negative_power, power_cap, shape };
    Kind kind;
    Index slot = -1;
    Index receiver = -1;
    double amount = 0.0;
};

std::string to_string(Violation::Kind kind);

struct FeasibilityTolerance {
    double throughput_rel = 1e-6;
    double share = 1e-6;
    double power_rel = 1e-9;
};

std::vector<Violation> feasibility_check(const Plan& plan, const ProblemInstance& inst,
                                         const FeasibilityTolerance& tol = {});

} // namespace rmplan
