#include "rmplan/dual_solver.hpp"

namespace rmplan {

namespace {

constexpr int kRootIterations = 100;
constexpr double kBranchTol = 1e-12;

bool at_threshold(double mu, double thr) { return std::abs(mu - thr) <= kBranchTol * thr; }

} // namespace

double theta_root_bound(double g, double eps, double lambda_eff) {
    double bound = 2.0 / kLn2;
    double lg = lambda_eff * g;
    if (lg > 1.0) bound = std::max(bound, std::log2(lg - 1.0) - eps);
    return bound;
}

double solve_theta_root(double g, double eps, double lambda_eff) {
    if (!(g > 0.0) || !(eps >= 0.0) || !(lambda_eff >= 0.0))
        throw DomainError("solve_theta_root: need g > 0, eps >= 0, lambda >= 0");
    // theta(0) = (2^eps - 1)/g + lambda vanishes only when both are zero.
    if (theta(0.0, g, eps, lambda_eff) <= 0.0) return 0.0;
    double lo = 0.0, hi = theta_root_bound(g, eps, lambda_eff);
    if (theta(hi, g, eps, lambda_eff) > 0.0)
        throw ConvergenceError("solve_theta_root: bracket does not contain the root");
    for (int k = 0; k < kRootIterations; ++k) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (theta(mid, g, eps, lambda_eff) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double tlo = std::abs(theta(lo, g, eps, lambda_eff));
    double thi = std::abs(theta(hi, g, eps, lambda_eff));
    return (lo > 0.0 && tlo < thi) ? lo : hi;
}

SlotThresholds slot_thresholds(double g, double eps, double p_cap, double lambda_eff) {
    SlotThresholds th;
    double c_bar = capacity(p_cap, g, eps);
    th.c_hat = solve_theta_root(g, eps, lambda_eff);
    th.mu_hat = kLn2 * std::exp2(th.c_hat + eps) / g;
    th.mu_bar = kLn2 * (1.0 / g + p_cap);
    if (!(c_bar > 0.0)) {
        th.slot_class = SlotClass::unusable;
        th.mu_tilde = kInf;
        return th;
    }
    th.mu_tilde = (p_cap + lambda_eff) / c_bar;
    th.slot_class = th.c_hat <= c_bar ? SlotClass::efficient : SlotClass::capped;
    return th;
}

std::vector<SlotThresholds> slot_thresholds(const ProblemInstance& inst, Index n,
                                            const Vector& lambda_per_slot) {
    if (lambda_per_slot.size() != inst.slots())
        throw DomainError("slot_thresholds: lambda_per_slot has the wrong length");
    std::vector<SlotThresholds> out(static_cast<size_t>(inst.slots()));
    for (Index t = 0; t < inst.slots(); ++t)
        out[size_t(t)] = slot_thresholds(inst.g(t, n), inst.eps(t, n), inst.p_cap(t), lambda_per_slot(t));
    return out;
}

SlotAllocation allocate_slot(double mu, double l_tilde, const SlotThresholds& th, double c_bar) {
    switch (th.slot_class) {
    case SlotClass::unusable:
        return {};
    case SlotClass::efficient:
        if (at_threshold(mu, th.mu_hat)) return {th.c_hat * l_tilde, l_tilde};
        if (mu < th.mu_hat) return {};
        // log2(mu g / ln2) - eps, written through mu_bar so the gain is not needed.
        if (mu < th.mu_bar) return {c_bar + std::log2(mu / th.mu_bar), 1.0};
        return {c_bar, 1.0};
    case SlotClass::capped:
        if (at_threshold(mu, th.mu_tilde)) return {c_bar * l_tilde, l_tilde};
        if (mu < th.mu_tilde) return {};
        return {c_bar, 1.0};
    }
    return {};
}

double throughput_curve(double mu, const Vector& l_tilde, const std::vector<SlotThresholds>& th,
                        const Vector& c_bar) {
    double total = 0.0;
    for (size_t t = 0; t < th.size(); ++t)
        total += allocate_slot(mu, l_tilde(Index(t)), th[t], c_bar(Index(t))).phi;
    return total;
}

} // namespace rmplan
