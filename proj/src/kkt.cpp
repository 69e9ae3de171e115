#include "rmplan/dual_solver.hpp"

namespace rmplan {

double KktReport::max() const {
    return std::max({stationarity, complementarity, throughput, coupling});
}

KktReport kkt_residuals(const PhiPlan& plan, const ProblemInstance& inst, const DualState& duals) {
    const Index T = inst.slots(), N = inst.receivers();
    if (plan.phi.rows() != T || plan.phi.cols() != N || plan.share.rows() != T ||
        plan.share.cols() != N || duals.mu.size() != N)
        throw DomainError("kkt_residuals: shape mismatch");
    const Vector v = duals.v.size() == T ? duals.v : Vector::Zero(T);

    KktReport r;
    if ((v.array() < 0.0).any() || (duals.mu.array() < 0.0).any()) r.complementarity = kInf;

    for (Index t = 0; t < T; ++t) {
        const double lam = inst.lambda + v(t);
        double used = 0.0;
        for (Index n = 0; n < N; ++n) {
            const double g = inst.g(t, n), eps = inst.eps(t, n), c_bar = inst.c_cap(t, n);
            const double mu = duals.mu(n), l = plan.share(t, n);
            used += l;
            if (l < 0.0) {
                r.coupling = std::max(r.coupling, -l);
                continue;
            }
            double c;
            if (l > 0.0) {
                c = plan.phi(t, n) / l;
                double m = kLn2 * std::exp2(c + eps) / g;
                double ref = std::max(m, mu);
                if (c >= c_bar * (1.0 - 1e-9))
                    r.complementarity = std::max(r.complementarity, std::max(0.0, m - mu) / ref);
                else if (c <= 1e-12 * std::max(1.0, c_bar))
                    r.complementarity = std::max(r.complementarity, std::max(0.0, mu - m) / ref);
                else
                    r.stationarity = std::max(r.stationarity, std::abs(m - mu) / ref);
                if (c > c_bar * (1.0 + 1e-9) || c < -eps)
                    r.coupling = std::max(r.coupling, std::abs(c - std::clamp(c, -eps, c_bar)));
            } else {
                // Best rate against mu; only the sign of the reduced cost matters here.
                double ci = mu > 0.0 ? std::log2(mu * g / kLn2) - eps : 0.0;
                c = c_bar > 0.0 ? std::clamp(ci, 0.0, c_bar) : 0.0;
            }
            const double cost = (std::exp2(c + eps) - 1.0) / g;
            const double reduced = cost + lam - mu * c;
            const double ref = cost + lam + mu * c + 1e-300;
            if (l == 0.0)
                r.complementarity = std::max(r.complementarity, std::max(0.0, -reduced) / ref);
            else if (l < 1.0 - kActiveTol)
                r.stationarity = std::max(r.stationarity, std::abs(reduced) / ref);
            else
                r.complementarity = std::max(r.complementarity, std::max(0.0, reduced) / ref);
        }
        r.coupling = std::max(r.coupling, used - 1.0);
        const double slot_scale = inst.p_cap(t) + inst.lambda;
        r.complementarity = std::max(r.complementarity, v(t) * std::max(0.0, 1.0 - used) / slot_scale);
    }

    for (Index n = 0; n < N; ++n) {
        const double s = inst.demand(n), y = plan.phi.col(n).sum();
        if (s == 0.0) {
            r.throughput = std::max(r.throughput, duals.mu(n) > 0.0 ? std::abs(y) : 0.0);
            continue;
        }
        double res = duals.mu(n) > 0.0 ? std::abs(y - s) / s : std::max(0.0, s - y) / s;
        r.throughput = std::max(r.throughput, res);
    }
    return r;
}

} // namespace rmplan
