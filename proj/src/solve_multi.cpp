#include "rmplan/dual_solver.hpp"

#include <algorithm>
#include <optional>

namespace rmplan {

namespace {

// Entropy-smoothed throughput dual. Every slot's max(0, best bid) is replaced by
// tau_t * log(1 + sum_n exp(bid_n / tau_t)), which makes the dual smooth and strictly
// concave in mu while its maximizer stays primal feasible: the softmax weights are
// valid shares and meet every demand exactly at stationarity. Driving tau to zero
// recovers an optimal primal even when several receivers tie on one slot.
class SmoothedDual {
public:
    SmoothedDual(const ProblemInstance& inst) : inst_(inst) {
        const Index T = inst.slots(), N = inst.receivers();
        scale_ = (inst.p_cap.array() + inst.lambda).matrix();
        // Per-entry constants so that a bid costs no transcendental beyond one log2(mu)
        // per receiver: the unclamped rate is log2(mu) + offset, where 2^(c + eps) =
        // mu g / ln2, and the clamped ends have fixed costs.
        offset_.resize(T, N);
        cost_zero_.resize(T, N);
        cost_cap_.resize(T, N);
        for (Index t = 0; t < T; ++t)
            for (Index n = 0; n < N; ++n) {
                const double g = inst.g(t, n), eps = inst.eps(t, n);
                offset_(t, n) = std::log2(g / kLn2) - eps;
                cost_zero_(t, n) = (std::exp2(eps) - 1.0) / g;
                cost_cap_(t, n) = (std::exp2(inst.c_cap(t, n) + eps) - 1.0) / g;
            }
        for (Index n = 0; n < inst.receivers(); ++n)
            if (inst.demand(n) > 0.0) active_.push_back(n);
        share_.resize(T, inst.receivers());
        rate_.resize(T, inst.receivers());
        slope_.resize(T, inst.receivers());
        lse_.resize(T);
    }

    const std::vector<Index>& active() const { return active_; }

    // Returns the dual value; fills gradient and (negated) Hessian over active receivers.
    double evaluate(const Vector& mu, double tau, Vector* grad, Matrix* neg_hess) {
        const Index T = inst_.slots(), N = inst_.receivers();
        const Index A = Index(active_.size());
        std::vector<double> z(static_cast<size_t>(N)), log_mu(static_cast<size_t>(N));
        for (Index n = 0; n < N; ++n) log_mu[size_t(n)] = mu(n) > 0.0 ? std::log2(mu(n)) : -kInf;
        double value = mu.dot(inst_.demand);
        if (grad) *grad = Vector::Zero(A);
        if (neg_hess) *neg_hess = Matrix::Zero(A, A);
        for (Index t = 0; t < T; ++t) {
            const double temp = tau * scale_(t);
            double top = 0.0;
            for (Index n = 0; n < N; ++n) {
                // Best rate for this entry and the surplus mu c - cost(c) - lambda it earns.
                const double c_bar = inst_.c_cap(t, n);
                double rate = 0.0, slope = 0.0, bid = -kInf;
                if (c_bar > 0.0) {
                    const double c = log_mu[size_t(n)] + offset_(t, n);
                    double cost;
                    if (c <= 0.0) {
                        cost = cost_zero_(t, n);
                    } else if (c >= c_bar) {
                        rate = c_bar;
                        cost = cost_cap_(t, n);
                    } else {
                        rate = c;
                        slope = 1.0 / (mu(n) * kLn2);
                        cost = mu(n) / kLn2 - 1.0 / inst_.g(t, n);
                    }
                    bid = mu(n) * rate - cost - inst_.lambda;
                }
                rate_(t, n) = rate;
                slope_(t, n) = slope;
                z[size_t(n)] = bid / temp;
                top = std::max(top, z[size_t(n)]);
            }
            // Terms below exp(-745) underflow anyway; skipping them avoids libm's slow path.
            double sum = -top > -745.0 ? std::exp(-top) : 0.0;
            for (Index n = 0; n < N; ++n) {
                const double w = z[size_t(n)] - top;
                share_(t, n) = w > -745.0 ? std::exp(w) : 0.0;
                sum += share_(t, n);
            }
            lse_(t) = top + std::log(sum);
            share_.row(t) /= sum;
            value -= temp * lse_(t);
            if (!grad) continue;
            for (Index a = 0; a < A; ++a) {
                Index n = active_[size_t(a)];
                double sc = share_(t, n) * rate_(t, n);
                (*grad)(a) -= sc;
                if (!neg_hess || sc == 0.0) continue;
                (*neg_hess)(a, a) += sc * rate_(t, n) / temp + share_(t, n) * slope_(t, n);
                for (Index b = 0; b < A; ++b) {
                    Index m = active_[size_t(b)];
                    (*neg_hess)(a, b) -= sc * share_(t, m) * rate_(t, m) / temp;
                }
            }
        }
        return value;
    }

    // Damped Newton ascent (Levenberg-Marquardt style); returns the final relative
    // gradient norm. A step is taken when it raises the dual value or, once value
    // differences drown in rounding, when it shrinks the gradient without losing more
    // than rounding noise in value. Large tie groups at small tau need the latter.
    double maximize(Vector& mu, double tau) {
        const Index A = Index(active_.size());
        Vector grad, trial_grad;
        Matrix H, trial_H;
        double value = evaluate(mu, tau, &grad, &H);
        grad += demand_active();
        double residual = relative(grad);
        double damp = 1e-13;
        double best = residual;
        int stagnant = 0;
        for (int it = 0; it < 200 && residual > 1e-12 && stagnant < 5; ++it) {
            const double diag = std::max(H.diagonal().maxCoeff(), 1e-300);
            bool accepted = false;
            for (int tries = 0; tries < 60 && !accepted; ++tries, damp *= 8.0) {
                Matrix M = H;
                M.diagonal().array() += damp * diag;
                Vector d = M.ldlt().solve(grad);
                if (!d.allFinite() || grad.dot(d) <= 0.0) continue;
                double step = 1.0;
                for (Index a = 0; a < A; ++a) {
                    double m = mu(active_[size_t(a)]);
                    if (d(a) < 0.0) step = std::min(step, 0.5 * m / -d(a));
                    // Receivers priced out of every slot contribute no curvature, so the raw
                    // step can overshoot by orders of magnitude; a price at most quadruples.
                    if (d(a) > 0.0) step = std::min(step, 3.0 * m / d(a));
                }
                Vector trial = mu;
                for (Index a = 0; a < A; ++a) trial(active_[size_t(a)]) += step * d(a);
                double tv = evaluate(trial, tau, &trial_grad, &trial_H);
                trial_grad += demand_active();
                double tr = relative(trial_grad);
                if (tv >= value + 1e-4 * step * grad.dot(d) || (tv >= value - 1e-13 * std::abs(value) && tr < residual)) {
                    // Near the rounding floor accepted steps stop reducing the gradient
                    // and may make it oscillate.
                    if (tr < 0.999 * best) best = tr, stagnant = 0;
                    else if (tr < 1e-4) ++stagnant;
                    mu = trial;
                    value = tv;
                    grad = trial_grad;
                    H = trial_H;
                    residual = tr;
                    accepted = true;
                }
            }
            if (!accepted) break;
            damp = std::max(1e-13, damp / 64.0);
        }
        evaluate(mu, tau, nullptr, nullptr);
        return residual;
    }

    // Shares, rates and slot prices at the last evaluated point.
    const Matrix& share() const { return share_; }
    const Matrix& rate() const { return rate_; }
    Vector prices(double tau) const {
        return (tau * scale_.array() * lse_.array()).cwiseMax(0.0).matrix();
    }

private:
    Vector demand_active() const {
        Vector d(Index(active_.size()));
        for (size_t a = 0; a < active_.size(); ++a) d(Index(a)) = inst_.demand(active_[a]);
        return d;
    }
    double relative(const Vector& grad) const {
        double r = 0.0;
        for (size_t a = 0; a < active_.size(); ++a)
            r = std::max(r, std::abs(grad(Index(a))) / inst_.demand(active_[a]));
        return r;
    }

    const ProblemInstance& inst_;
    Vector scale_;
    Matrix offset_, cost_zero_, cost_cap_;
    std::vector<Index> active_;
    Matrix share_, rate_, slope_;
    Vector lse_;
};

constexpr double kCertifyTol = 1e-7;

// Exact finish on the support found by the smoothed dual. With the used cells fixed,
// optimality is a square system in the water levels mu, the prices of full slots that
// receivers share, and the fractional shares:
//   sum_t l c(mu_n) = S_n,   bid(mu_n) = v_t on fractional cells,   sum_n l = 1 on those slots.
// Bids have derivative c in mu, so Newton needs only rates and their slopes.
std::optional<MultiSolution> polish(const ProblemInstance& inst, const MultiSolution& start) {
    const Index T = inst.slots(), N = inst.receivers();
    Matrix share = start.plan.share;
    for (Index t = 0; t < T; ++t)
        for (Index n = 0; n < N; ++n)
            if (share(t, n) <= kActiveTol || inst.demand(n) == 0.0) share(t, n) = 0.0;

    std::vector<Index> mu_idx(static_cast<size_t>(N), -1), v_idx(static_cast<size_t>(T), -1);
    std::vector<Index> receivers;
    for (Index n = 0; n < N; ++n)
        if (inst.demand(n) > 0.0) {
            mu_idx[size_t(n)] = Index(receivers.size());
            receivers.push_back(n);
        }
    const Index A = Index(receivers.size());
    std::vector<char> full(static_cast<size_t>(T));
    std::vector<std::pair<Index, Index>> cells;
    std::vector<Index> priced;
    for (Index t = 0; t < T; ++t) {
        full[size_t(t)] = share.row(t).sum() > 1.0 - 1e-6;
        bool any = false;
        for (Index n = 0; n < N; ++n)
            if (share(t, n) > 0.0 && share(t, n) < 1.0 - kActiveTol) {
                cells.emplace_back(t, n);
                any = true;
            }
        if (any && full[size_t(t)]) {
            v_idx[size_t(t)] = A + Index(priced.size());
            priced.push_back(t);
        }
    }
    if (cells.empty()) return std::nullopt;
    const Index K = Index(priced.size()), F = Index(cells.size()), D = A + K + F;

    auto rate = [&](Index t, Index n, double m, double& slope) {
        slope = 0.0;
        const double c_bar = inst.c_cap(t, n);
        if (!(c_bar > 0.0) || !(m > 0.0)) return 0.0;
        const double c = std::log2(m * inst.g(t, n) / kLn2) - inst.eps(t, n);
        if (c <= 0.0) return 0.0;
        if (c >= c_bar) return c_bar;
        slope = 1.0 / (m * kLn2);
        return c;
    };
    auto bid = [&](Index t, Index n, double m, double c) {
        return m * c - (std::exp2(c + inst.eps(t, n)) - 1.0) / inst.g(t, n) - inst.lambda;
    };

    Vector x(D);
    for (Index a = 0; a < A; ++a) x(a) = start.duals.mu(receivers[size_t(a)]);
    for (Index k = 0; k < K; ++k) x(A + k) = start.duals.v(priced[size_t(k)]);
    for (Index f = 0; f < F; ++f) x(A + K + f) = share(cells[size_t(f)].first, cells[size_t(f)].second);

    Vector row_scale(D);
    for (Index a = 0; a < A; ++a) row_scale(a) = 1.0 / inst.demand(receivers[size_t(a)]);
    for (Index k = 0; k < K; ++k) row_scale(A + k) = 1.0;
    for (Index f = 0; f < F; ++f) {
        auto [t, n] = cells[size_t(f)];
        double slope, m = x(mu_idx[size_t(n)]), c = rate(t, n, m, slope);
        double cost = (std::exp2(c + inst.eps(t, n)) - 1.0) / inst.g(t, n);
        row_scale(A + K + f) = 1.0 / (cost + inst.lambda + m * c + 1e-300);
    }

    auto residual = [&](const Vector& y, Matrix* J) {
        Matrix l = share;
        for (Index f = 0; f < F; ++f) l(cells[size_t(f)].first, cells[size_t(f)].second) = y(A + K + f);
        Vector R = Vector::Zero(D);
        if (J) J->setZero(D, D);
        for (Index a = 0; a < A; ++a) {
            const Index n = receivers[size_t(a)];
            R(a) = -inst.demand(n);
            for (Index t = 0; t < T; ++t) {
                if (l(t, n) == 0.0) continue;
                double slope, c = rate(t, n, y(a), slope);
                R(a) += l(t, n) * c;
                if (J) (*J)(a, a) += l(t, n) * slope;
            }
        }
        for (Index f = 0; f < F; ++f) {
            auto [t, n] = cells[size_t(f)];
            const Index a = mu_idx[size_t(n)], row = A + K + f;
            double slope, m = y(a), c = rate(t, n, m, slope);
            R(row) = bid(t, n, m, c) - (v_idx[size_t(t)] >= 0 ? y(v_idx[size_t(t)]) : 0.0);
            if (J) {
                (*J)(row, a) = c;
                if (v_idx[size_t(t)] >= 0) (*J)(row, v_idx[size_t(t)]) = -1.0;
                (*J)(a, row) = c;  // throughput row depends on this cell's share
            }
            if (v_idx[size_t(t)] >= 0) {
                const Index srow = v_idx[size_t(t)];
                if (J) (*J)(srow, row) = 1.0;
            }
        }
        for (Index k = 0; k < K; ++k) R(A + k) = l.row(priced[size_t(k)]).sum() - 1.0;
        if (J) *J = row_scale.asDiagonal() * *J;
        return Vector(row_scale.asDiagonal() * R);
    };

    Matrix J;
    Vector R = residual(x, &J);
    for (int it = 0; it < 60 && R.lpNorm<Eigen::Infinity>() > 1e-15; ++it) {
        Vector dx = J.completeOrthogonalDecomposition().solve(-R);
        if (!dx.allFinite()) return std::nullopt;
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
            Vector y = x + step * dx;
            if ((y.head(A).array() <= 0.0).any()) continue;
            Matrix Jy;
            Vector Ry = residual(y, &Jy);
            if (Ry.lpNorm<Eigen::Infinity>() < R.lpNorm<Eigen::Infinity>()) {
                x = y;
                R = Ry;
                J = Jy;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }

    MultiSolution out;
    out.plan.share = share;
    for (Index f = 0; f < F; ++f) {
        const double l = x(A + K + f);
        if (l < -1e-12 || l > 1.0 + 1e-12) return std::nullopt;
        out.plan.share(cells[size_t(f)].first, cells[size_t(f)].second) = std::clamp(l, 0.0, 1.0);
    }
    out.duals.mu = Vector::Zero(N);
    for (Index a = 0; a < A; ++a) out.duals.mu(receivers[size_t(a)]) = x(a);
    out.plan.phi = Matrix::Zero(T, N);
    out.duals.v = Vector::Zero(T);
    out.duals.l_tilde = Matrix::Zero(T, N);
    for (Index t = 0; t < T; ++t) {
        double best = 0.0;
        for (Index n = 0; n < N; ++n) {
            const double l = out.plan.share(t, n);
            if (l == 0.0) continue;
            double slope, m = out.duals.mu(n), c = rate(t, n, m, slope);
            out.plan.phi(t, n) = l * c;
            best = std::max(best, bid(t, n, m, c));
            if (l > kActiveTol && l < 1.0 - kActiveTol) out.duals.l_tilde(t, n) = l;
        }
        if (v_idx[size_t(t)] >= 0)
            out.duals.v(t) = std::max(0.0, x(v_idx[size_t(t)]));
        else if (full[size_t(t)])
            out.duals.v(t) = best;
    }
    return out;
}

// Primal candidate read off the smoothed dual at its current point.
std::optional<MultiSolution> read_primal(const ProblemInstance& inst, const SmoothedDual& dual,
                                         Vector mu, double tau) {
    const Index T = inst.slots(), N = inst.receivers();
    MultiSolution out;
    out.plan.share = dual.share();
    out.plan.phi = Matrix::Zero(T, N);
    const Matrix& rate = dual.rate();
    for (Index n = 0; n < N; ++n)
        for (Index t = 0; t < T; ++t) {
            double& l = out.plan.share(t, n);
            if (inst.demand(n) == 0.0 || l < 1e-12 || rate(t, n) == 0.0)
                l = 0.0;
            out.plan.phi(t, n) = rate(t, n) * l;
        }

    // Match each demand exactly. Rates and prices stay put: first move the shares of
    // slots this receiver uses fractionally (ties), otherwise move its water level
    // mu_n with the shares held fixed, which keeps interior rates stationary.
    for (Index n = 0; n < N; ++n) {
        if (inst.demand(n) == 0.0) continue;
        double gap = inst.demand(n) - out.plan.phi.col(n).sum();
        if (gap == 0.0) continue;
        double room = 0.0;
        std::vector<Index> tie;
        for (Index t = 0; t < T; ++t) {
            const double l = out.plan.share(t, n);
            if (!(l > kActiveTol && l < 1.0 - kActiveTol)) continue;
            tie.push_back(t);
            const double c = out.plan.phi(t, n) / l;
            room += gap > 0.0 ? (1.0 - out.plan.share.row(t).sum()) * c : out.plan.phi(t, n);
        }
        if (!tie.empty() && room >= std::abs(gap)) {
            for (Index t : tie) {
                const double l = out.plan.share(t, n), c = out.plan.phi(t, n) / l;
                const double part = gap > 0.0 ? (1.0 - out.plan.share.row(t).sum()) * c : out.plan.phi(t, n);
                const double dl = gap / room * part / c;
                out.plan.share(t, n) = l + dl;
                out.plan.phi(t, n) = c * (l + dl);
            }
            continue;
        }
        auto delivered = [&](double m) {
            double y = 0.0;
            for (Index t = 0; t < T; ++t)
                if (out.plan.share(t, n) > 0.0)
                    y += out.plan.share(t, n) *
                         std::clamp(std::log2(m * inst.g(t, n) / kLn2) - inst.eps(t, n), 0.0,
                                    inst.c_cap(t, n));
            return y;
        };
        double lo = mu(n), hi = mu(n);
        if (delivered(mu(n)) >= inst.demand(n)) {
            for (int k = 0; k < 60 && delivered(lo) >= inst.demand(n); ++k) lo *= 0.5;
        } else {
            for (int k = 0; k < 60 && delivered(hi) < inst.demand(n); ++k) hi *= 2.0;
            if (delivered(hi) < inst.demand(n)) continue;
        }
        for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
            double mid = 0.5 * (lo + hi);
            (delivered(mid) >= inst.demand(n) ? hi : lo) = mid;
        }
        mu(n) = hi;
        for (Index t = 0; t < T; ++t) {
            double l = out.plan.share(t, n);
            out.plan.phi(t, n) =
                l > 0.0 ? l * std::clamp(std::log2(hi * inst.g(t, n) / kLn2) - inst.eps(t, n), 0.0,
                                         inst.c_cap(t, n))
                        : 0.0;
        }
    }

    out.duals.mu = mu;
    out.duals.v = dual.prices(tau);
    out.duals.l_tilde = Matrix::Zero(T, N);
    for (Index n = 0; n < N; ++n)
        for (Index t = 0; t < T; ++t) {
            double l = out.plan.share(t, n);
            if (l > kActiveTol && l < 1.0 - kActiveTol) out.duals.l_tilde(t, n) = l;
        }

    KktReport kkt = kkt_residuals(out.plan, inst, out.duals);
    if (auto p = polish(inst, out)) {
        KktReport kp = kkt_residuals(p->plan, inst, p->duals);
        if (kp.max() < kkt.max()) {
            out = std::move(*p);
            kkt = kp;
        }
    }
    if (kkt.max() > kCertifyTol) return std::nullopt;
    return out;
}

std::optional<MultiSolution> recover_primal(const ProblemInstance& inst, Vector mu) {
    const Index T = inst.slots(), N = inst.receivers();
    SmoothedDual dual(inst);
    for (Index n = 0; n < N; ++n) {
        if (inst.demand(n) == 0.0) {
            mu(n) = 0.0;
        } else if (!(mu(n) > 0.0)) {
            double lowest = kInf;
            for (Index t = 0; t < T; ++t)
                if (inst.c_cap(t, n) > 0.0)
                    lowest = std::min(lowest, kLn2 * std::exp2(inst.eps(t, n)) / inst.g(t, n));
            mu(n) = lowest;
        }
    }
    // Cool the smoothing and try to certify a primal at every stage from 1e-5 down; a
    // stage whose Newton solve stalls ends the schedule.
    dual.maximize(mu, 1e-2);
    for (double tau = 1e-3; tau >= 0.99e-9; tau *= 0.1) {
        Vector trial = mu;
        if (dual.maximize(trial, tau) > 1e-6) break;
        mu = trial;
        if (tau > 1.01e-5) continue;
        if (auto out = read_primal(inst, dual, mu, tau)) return out;
    }
    return std::nullopt;
}

double dual_value(const ProblemInstance& inst, const std::vector<SingleSolution>& sols, const Vector& v) {
    double q = -v.sum();
    for (size_t n = 0; n < sols.size(); ++n) {
        const auto& s = sols[n];
        for (Index t = 0; t < inst.slots(); ++t) {
            double l = s.share(t);
            if (l <= 0.0) continue;
            double p = phi_to_power(s.phi(t), std::min(l, 1.0), inst.g(t, Index(n)), inst.eps(t, Index(n)));
            q += (p + inst.lambda + v(t)) * l;
        }
    }
    return q;
}

} // namespace

MultiSolution solve_multi(const ProblemInstance& inst, const MultiSolverOptions& options) {
    validate(inst);
    const Index T = inst.slots(), N = inst.receivers();
    for (Index n = 0; n < N; ++n) {
        double cap = inst.c_cap.col(n).cwiseMax(0.0).sum();
        if (inst.demand(n) > cap * (1.0 + 1e-12))
            throw InfeasibleError("receiver demand exceeds its deliverable throughput", cap, n);
    }

    const double scale = (inst.p_cap.array() + inst.lambda).mean();
    const double alpha0 = options.step0 * scale;
    Vector v = Vector::Zero(T);
    Vector lambda_t = Vector::Constant(T, inst.lambda);
    std::vector<std::vector<SlotThresholds>> th(static_cast<size_t>(N));
    for (Index n = 0; n < N; ++n) th[size_t(n)] = slot_thresholds(inst, n, lambda_t);
    std::vector<SingleSolution> sols(static_cast<size_t>(N));
    std::vector<TraceRow> trace;

    for (Index k = 1; k <= options.max_outer_iters; ++k) {
        for (Index t = 0; t < T; ++t) {
            double lt = inst.lambda + v(t);
            if (lt == lambda_t(t)) continue;
            lambda_t(t) = lt;
            for (Index n = 0; n < N; ++n)
                th[size_t(n)][size_t(t)] = slot_thresholds(inst.g(t, n), inst.eps(t, n), inst.p_cap(t), lt);
        }
        for (Index n = 0; n < N; ++n) {
            try {
                sols[size_t(n)] = solve_single(inst.c_cap.col(n), th[size_t(n)], inst.demand(n));
            } catch (InfeasibleError& e) {
                throw InfeasibleError(e.what(), e.max_throughput, n);
            }
        }

        Vector usage = Vector::Zero(T);
        for (Index n = 0; n < N; ++n) usage += sols[size_t(n)].share;
        const double step = alpha0 / std::sqrt(double(k));
        Vector v_next = (v + step * (usage.array() - 1.0).matrix()).cwiseMax(0.0);
        const double dv = (v_next - v).norm();
        if (options.record_trace)
            trace.push_back({k, v.norm(), dual_value(inst, sols, v),
                             std::max(0.0, (usage.array() - 1.0).maxCoeff()), step});

        if (dv < options.v_tol * std::max(1.0, scale) && (usage.array() <= 1.0 + 1e-12).all()) {
            MultiSolution out;
            out.plan.phi.resize(T, N);
            out.plan.share.resize(T, N);
            out.duals.v = v;
            out.duals.mu.resize(N);
            out.duals.l_tilde.resize(T, N);
            for (Index n = 0; n < N; ++n) {
                out.plan.phi.col(n) = sols[size_t(n)].phi;
                out.plan.share.col(n) = sols[size_t(n)].share;
                out.duals.mu(n) = sols[size_t(n)].mu;
                out.duals.l_tilde.col(n) = sols[size_t(n)].l_tilde;
            }
            out.iterations = k;
            out.price_converged = true;
            out.trace = std::move(trace);
            return out;
        }
        v = v_next;

        if (options.recovery_interval > 0 &&
            (k % options.recovery_interval == 0 || k == options.max_outer_iters)) {
            Vector mu(N);
            for (Index n = 0; n < N; ++n) mu(n) = sols[size_t(n)].mu;
            if (auto rec = recover_primal(inst, mu)) {
                rec->iterations = k;
                rec->trace = std::move(trace);
                return std::move(*rec);
            }
        }
    }

    Vector usage = Vector::Zero(T);
    for (Index n = 0; n < N; ++n) usage += sols[size_t(n)].share;
    throw ConvergenceError("solve_multi: no certified solution within the iteration limit; "
                           "the instance may be jointly infeasible",
                           std::max(0.0, (usage.array() - 1.0).maxCoeff()), v.norm());
}

} // namespace rmplan
