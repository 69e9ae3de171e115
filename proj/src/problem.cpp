#include "rmplan/problem.hpp"

namespace rmplan {

namespace {

void check_shape(const Plan& plan, const ProblemInstance& inst) {
    if (plan.power.rows() != inst.slots() || plan.power.cols() != inst.receivers() ||
        plan.share.rows() != inst.slots() || plan.share.cols() != inst.receivers())
        throw DomainError("plan shape does not match the instance");
}

// Costs are only meaningful on the resource simplex; throughput and caps are not required.
void check_resources(const Plan& plan, const ProblemInstance& inst) {
    check_shape(plan, inst);
    if ((plan.share.array() < -1e-12).any() || (plan.power.array() < -1e-12).any())
        throw DomainError("plan has negative entries");
    if ((plan.share.rowwise().sum().array() > 1.0 + 1e-6).any())
        throw DomainError("plan exceeds the per-slot frequency budget");
}

} // namespace

ProblemInstance make_instance(Matrix g, Matrix eps, Vector p_cap, Vector demand, double lambda,
                              double delta) {
    ProblemInstance inst;
    inst.g = std::move(g);
    inst.eps = std::move(eps);
    inst.p_cap = std::move(p_cap);
    inst.demand = std::move(demand);
    inst.lambda = lambda;
    inst.delta = delta;
    if (inst.eps.rows() != inst.g.rows() || inst.eps.cols() != inst.g.cols() ||
        inst.p_cap.size() != inst.g.rows() || inst.demand.size() != inst.g.cols())
        throw DomainError("make_instance: inconsistent dimensions");
    inst.c_cap.resize(inst.g.rows(), inst.g.cols());
    for (Index n = 0; n < inst.g.cols(); ++n)
        for (Index t = 0; t < inst.g.rows(); ++t)
            inst.c_cap(t, n) = capacity(inst.p_cap(t), inst.g(t, n), inst.eps(t, n));
    validate(inst);
    return inst;
}

void validate(const ProblemInstance& inst) {
    const Index T = inst.slots(), N = inst.receivers();
    if (T < 1 || N < 1) throw DomainError("instance needs at least one slot and one receiver");
    if (inst.eps.rows() != T || inst.eps.cols() != N || inst.c_cap.rows() != T ||
        inst.c_cap.cols() != N || inst.p_cap.size() != T || inst.demand.size() != N)
        throw DomainError("instance dimensions are inconsistent");
    if (!(inst.delta > 0.0)) throw DomainError("instance: delta must be positive");
    if (!(inst.lambda >= 0.0) || !std::isfinite(inst.lambda))
        throw DomainError("instance: lambda must be finite and non-negative");
    if (!(inst.g.array() > 0.0).all() || !inst.g.allFinite())
        throw DomainError("instance: gains must be positive and finite");
    if (!(inst.eps.array() >= 0.0).all()) throw DomainError("instance: eps must be non-negative");
    if (!(inst.p_cap.array() > 0.0).all() || !inst.p_cap.allFinite())
        throw DomainError("instance: power caps must be positive and finite");
    if (!(inst.demand.array() >= 0.0).all() || !inst.demand.allFinite())
        throw DomainError("instance: demands must be non-negative");
}

Vector power_cap(double i_bs, const Matrix& neighbor_gains, double p_max) {
    if (!(i_bs > 0.0)) throw DomainError("power_cap: I_bs must be positive");
    const Index T = neighbor_gains.rows();
    if (neighbor_gains.cols() == 0) {
        if (!(p_max > 0.0)) throw DomainError("power_cap: no neighbors and no positive p_max");
        return Vector::Constant(T, p_max);
    }
    if (!(neighbor_gains.array() > 0.0).all())
        throw DomainError("power_cap: neighbor gains must be positive");
    return (i_bs / neighbor_gains.rowwise().maxCoeff().array()).matrix();
}

Plan zero_plan(const ProblemInstance& inst) {
    return {Matrix::Zero(inst.slots(), inst.receivers()), Matrix::Zero(inst.slots(), inst.receivers())};
}

double energy(const Plan& plan) { return plan.power.cwiseProduct(plan.share).sum(); }

Index active_slots(const Plan& plan) {
    return (plan.share.rowwise().sum().array() > kActiveTol).count();
}

double cost_original(const Plan& plan, const ProblemInstance& inst) {
    check_resources(plan, inst);
    return energy(plan) + inst.lambda * double(active_slots(plan));
}

double cost_relaxed(const Plan& plan, const ProblemInstance& inst) {
    check_resources(plan, inst);
    return energy(plan) + inst.lambda * plan.share.sum();
}

double throughput_lb(const Plan& plan, const ProblemInstance& inst, Index n) {
    check_shape(plan, inst);
    double total = 0.0;
    for (Index t = 0; t < inst.slots(); ++t)
        total += power_to_phi(plan.power(t, n), plan.share(t, n), inst.g(t, n), inst.eps(t, n));
    return total;
}

Vector throughputs(const Plan& plan, const ProblemInstance& inst) {
    Vector out(inst.receivers());
    for (Index n = 0; n < inst.receivers(); ++n) out(n) = throughput_lb(plan, inst, n);
    return out;
}

Plan to_plan(const PhiPlan& plan, const ProblemInstance& inst) {
    const Index T = inst.slots(), N = inst.receivers();
    if (plan.phi.rows() != T || plan.phi.cols() != N || plan.share.rows() != T ||
        plan.share.cols() != N)
        throw DomainError("to_plan: shape mismatch");
    Plan out{Matrix::Zero(T, N), plan.share};
    for (Index n = 0; n < N; ++n)
        for (Index t = 0; t < T; ++t) {
            double l = plan.share(t, n);
            if (l <= 0.0) {
                out.share(t, n) = 0.0;
                continue;
            }
            double p = phi_to_power(plan.phi(t, n), std::min(l, 1.0), inst.g(t, n), inst.eps(t, n));
            // Rounding in exp2 may overshoot the cap by an ulp or two.
            out.power(t, n) = std::min(p, inst.p_cap(t) * (1.0 + 1e-12));
        }
    return out;
}

PhiPlan to_phi_plan(const Plan& plan, const ProblemInstance& inst) {
    check_shape(plan, inst);
    PhiPlan out{Matrix::Zero(inst.slots(), inst.receivers()), plan.share};
    for (Index n = 0; n < inst.receivers(); ++n)
        for (Index t = 0; t < inst.slots(); ++t)
            out.phi(t, n) = power_to_phi(plan.power(t, n), plan.share(t, n), inst.g(t, n), inst.eps(t, n));
    return out;
}

std::string to_string(Violation::Kind kind) {
    switch (kind) {
    case Violation::Kind::throughput: return "throughput";
    case Violation::Kind::negative_share: return "negative_share";
    case Violation::Kind::simplex: return "simplex";
    case Violation::Kind::negative_power: return "negative_power";
    case Violation::Kind::power_cap: return "power_cap";
    case Violation::Kind::shape: return "shape";
    }
    return "unknown";
}

std::vector<Violation> feasibility_check(const Plan& plan, const ProblemInstance& inst,
                                         const FeasibilityTolerance& tol) {
    std::vector<Violation> out;
    const Index T = inst.slots(), N = inst.receivers();
    if (plan.power.rows() != T || plan.power.cols() != N || plan.share.rows() != T ||
        plan.share.cols() != N) {
        out.push_back({Violation::Kind::shape, -1, -1, 0.0});
        return out;
    }
    for (Index t = 0; t < T; ++t) {
        for (Index n = 0; n < N; ++n) {
            double l = plan.share(t, n), p = plan.power(t, n);
            if (l < -tol.share) out.push_back({Violation::Kind::negative_share, t, n, -l});
            if (p < 0.0) out.push_back({Violation::Kind::negative_power, t, n, -p});
            if (p > inst.p_cap(t) * (1.0 + tol.power_rel))
                out.push_back({Violation::Kind::power_cap, t, n, p - inst.p_cap(t)});
        }
        double sum = plan.share.row(t).sum();
        if (sum > 1.0 + tol.share) out.push_back({Violation::Kind::simplex, t, -1, sum - 1.0});
    }
    for (Index n = 0; n < N; ++n) {
        double deficit = inst.demand(n) - throughput_lb(plan, inst, n);
        if (deficit > tol.throughput_rel * inst.demand(n))
            out.push_back({Violation::Kind::throughput, -1, n, deficit});
    }
    return out;
}

} // namespace rmplan
