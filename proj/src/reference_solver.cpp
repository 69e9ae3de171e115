#include "rmplan/baselines.hpp"

#include <Eigen/Cholesky>

namespace rmplan {

namespace {

// One (slot, receiver) pair that can carry traffic. Pairs are stored slot by slot so each
// slot's Newton block is contiguous.
struct Pair {
    Index t, n;
    double g, eps, cap;
};

// Log-barrier formulation of the relaxed problem. Each pair carries (phi, sigma) with
// sigma = cap * l - phi the unused rate headroom, so the objective
//   f = sum l * ((2^(phi/l + eps) - 1) / g + lambda),   l = (phi + sigma) / cap,
// is minimized under phi > 0, sigma > 0, 1 - sum_n l > 0 and sum_t phi = S (the cost grows
// with phi, so demands are met with equality at the optimum). In these
// coordinates a pair pinned at its cap has curvature only along sigma, which keeps the
// Newton blocks well conditioned late in the path.
class Barrier {
public:
    Barrier(const ProblemInstance& inst) : inst_(inst) {
        const Index T = inst.slots(), N = inst.receivers();
        slot_begin_.assign(size_t(T + 1), 0);
        receiver_slot_.assign(size_t(N), -1);
        for (Index n = 0; n < N; ++n)
            if (inst.demand(n) > 0.0) receiver_slot_[size_t(n)] = Index(served_.size()), served_.push_back(n);
        for (Index t = 0; t < T; ++t) {
            slot_begin_[size_t(t)] = Index(pairs_.size());
            for (Index n : served_)
                if (inst.c_cap(t, n) > 0.0) pairs_.push_back({t, n, inst.g(t, n), inst.eps(t, n), inst.c_cap(t, n)});
        }
        slot_begin_[size_t(T)] = Index(pairs_.size());
        for (Index t = 0; t < T; ++t) used_slots_ += slot_begin_[size_t(t) + 1] > slot_begin_[size_t(t)];
        terms_ = 2 * Index(pairs_.size()) + used_slots_;
    }

    Index terms() const { return terms_; }
    Index size() const { return 2 * Index(pairs_.size()); }

    // A strictly feasible start: each slot is split in proportion to the receivers'
    // demand-to-capacity ratios, which works whenever those ratios sum below one.
    bool start(Vector& x) const {
        Vector total = Vector::Zero(inst_.receivers());
        for (const Pair& p : pairs_) total(p.n) += p.cap;
        double load = 0.0;
        for (Index n : served_) {
            if (!(total(n) > 0.0)) return false;
            load += inst_.demand(n) / total(n);
        }
        if (!(load < 1.0)) return false;
        const double scale = 2.0 / (1.0 + load);
        // Each receiver could carry scale * S at full rate; 1 / scale of that meets S exactly.
        x.resize(size());
        for (size_t k = 0; k < pairs_.size(); ++k) {
            const Pair& p = pairs_[k];
            const double rate = p.cap * scale * inst_.demand(p.n) / total(p.n);
            x(2 * Index(k)) = rate / scale;
            x(2 * Index(k) + 1) = rate - rate / scale;
        }
        return true;
    }

    double share(const Vector& x, Index k) const { return (x(2 * k) + x(2 * k + 1)) / pairs_[size_t(k)].cap; }

    double objective(const Vector& x) const {
        double f = 0.0;
        for (Index k = 0; k < Index(pairs_.size()); ++k) {
            const Pair& p = pairs_[size_t(k)];
            const double l = share(x, k);
            f += l * ((std::exp2(x(2 * k) / l + p.eps) - 1.0) / p.g + inst_.lambda);
        }
        return f;
    }

    // Slacks of every barrier term: the pair coordinates themselves, then the slot share
    // budgets.
    Vector slacks(const Vector& x) const {
        Vector s(terms_);
        s.head(size()) = x;
        Index i = size();
        for (Index t = 0; t < inst_.slots(); ++t) {
            const Index b = slot_begin_[size_t(t)], e = slot_begin_[size_t(t) + 1];
            if (b == e) continue;
            double u = 1.0;
            for (Index k = b; k < e; ++k) u -= share(x, k);
            s(i++) = u;
        }
        return s;
    }

    double merit(const Vector& x, double weight) const {
        Vector s = slacks(x);
        if ((s.array() <= 0.0).any()) return kInf;
        return weight * objective(x) - s.array().log().sum();
    }

    // Newton direction for weight * f + barrier that keeps the demand equalities; returns
    // the squared Newton decrement, or NaN if a block could not be factored.
    double newton(const Vector& x, double weight, Vector& dir, Vector& grad) const {
        const Index K = Index(pairs_.size()), R = Index(served_.size());
        const Vector s = slacks(x);
        grad.resize(size());

        // Pair-local terms. In (phi, l) the objective Hessian is (f0''/l) v v^T with
        // v = (1, -c); mapped to (phi, sigma) through l = (phi + sigma) / cap. Each 2x2 block
        // is kept as its inverse, with the determinant expanded so nothing cancels.
        std::vector<Eigen::Matrix2d> inverse(pairs_.size());
        for (Index k = 0; k < K; ++k) {
            const Pair& p = pairs_[size_t(k)];
            const double phi = x(2 * k), sigma = x(2 * k + 1);
            const double l = share(x, k), c = phi / l;
            const double e = std::exp2(c + p.eps) / p.g;
            const double d1 = kLn2 * e, q = weight * kLn2 * kLn2 * e / l;
            const double dl = e - 1.0 / p.g + inst_.lambda - c * d1;
            grad(2 * k) = weight * (d1 + dl / p.cap) - 1.0 / phi;
            grad(2 * k + 1) = weight * dl / p.cap - 1.0 / sigma;
            const double v0 = 1.0 - c / p.cap, v1 = -c / p.cap;
            const double ip = 1.0 / (phi * phi), is = 1.0 / (sigma * sigma);
            const double det = q * (v0 * v0 * is + v1 * v1 * ip) + ip * is;
            Eigen::Matrix2d inv;
            inv << q * v1 * v1 + is, -q * v0 * v1, -q * v0 * v1, q * v0 * v0 + ip;
            inverse[size_t(k)] = inv / det;
        }

        // Each slot adds the share-budget term (a/u)(a/u)^T, which is applied by
        // Sherman-Morrison on top of the pair blocks. Solves are made against the gradient and
        // the demand constraint rows; the equalities are then eliminated through their N x N
        // Schur complement.
        Vector y(size());
        Matrix Z = Matrix::Zero(size(), R);
        Index slot_term = size();
        for (Index t = 0; t < inst_.slots(); ++t) {
            const Index b = slot_begin_[size_t(t)], e = slot_begin_[size_t(t) + 1], m = e - b;
            if (m == 0) continue;
            const double u = s(slot_term++);
            Vector a(2 * m);
            for (Index j = 0; j < m; ++j) a.segment<2>(2 * j).setConstant(1.0 / pairs_[size_t(b + j)].cap);
            grad.segment(2 * b, 2 * m) += a / u;
            Matrix rhs = Matrix::Zero(2 * m, R + 2);
            rhs.col(0) = grad.segment(2 * b, 2 * m);
            rhs.col(1) = a;
            for (Index j = 0; j < m; ++j) rhs(2 * j, 2 + receiver_slot_[size_t(pairs_[size_t(b + j)].n)]) = 1.0;
            for (Index j = 0; j < m; ++j) rhs.middleRows<2>(2 * j) = inverse[size_t(b + j)] * rhs.middleRows<2>(2 * j);
            const Vector da = rhs.col(1);
            const double denom = u * u + a.dot(da);
            if (!(denom > 0.0)) return std::nan("");
            Matrix solved = rhs - da * (a.transpose() * rhs) / denom;
            y.segment(2 * b, 2 * m) = solved.col(0);
            Z.middleRows(2 * b, 2 * m) = solved.rightCols(R);
        }
        // A v sums the phi entries of each receiver.
        auto constraint = [&](const Eigen::Ref<const Vector>& v) {
            Vector out = Vector::Zero(R);
            for (Index k = 0; k < K; ++k) out(receiver_slot_[size_t(pairs_[size_t(k)].n)]) += v(2 * k);
            return out;
        };
        Matrix schur(R, R);
        for (Index r = 0; r < R; ++r) schur.col(r) = constraint(Z.col(r));
        const Vector nu = -schur.ldlt().solve(constraint(y));
        dir = -(y + Z * nu);
        return -grad.dot(dir);
    }

    // Largest step along dir that keeps every slack positive.
    double max_step(const Vector& x, const Vector& dir) const {
        const Vector s0 = slacks(x);
        const Vector ds = slacks(x + dir) - s0;
        double step = kInf;
        for (Index i = 0; i < s0.size(); ++i)
            if (ds(i) < 0.0) step = std::min(step, -s0(i) / ds(i));
        return step;
    }

    PhiPlan plan(const Vector& x) const {
        PhiPlan p{Matrix::Zero(inst_.slots(), inst_.receivers()), Matrix::Zero(inst_.slots(), inst_.receivers())};
        for (Index k = 0; k < Index(pairs_.size()); ++k) {
            p.phi(pairs_[size_t(k)].t, pairs_[size_t(k)].n) = x(2 * k);
            p.share(pairs_[size_t(k)].t, pairs_[size_t(k)].n) = share(x, k);
        }
        return p;
    }

private:
    const ProblemInstance& inst_;
    std::vector<Pair> pairs_;
    std::vector<Index> slot_begin_, served_, receiver_slot_;
    Index used_slots_ = 0, terms_ = 0;
};

} // namespace

ReferenceResult reference_solver(const ProblemInstance& inst, const ReferenceOptions& options) {
    validate(inst);
    const Index T = inst.slots(), N = inst.receivers();
    if (T * N > 10000) throw DomainError("reference_solver: instance too large for the oracle");

    ReferenceResult r;
    if ((inst.demand.array() == 0.0).all()) {
        r.plan = {Matrix::Zero(T, N), Matrix::Zero(T, N)};
        return r;
    }

    Barrier barrier(inst);
    Vector x;
    if (!barrier.start(x))
        throw InfeasibleError("reference_solver: no strictly feasible proportional split of the slots");

    const double m = double(barrier.terms());
    double weight = m / barrier.objective(x);
    Vector dir, grad;
    for (;;) {
        // Centering by damped Newton. Late in the path the direction is only accurate to a
        // decrement of about 1e-7, so centering stops there or after a bounded number of steps.
        for (int inner = 0; inner < 100; ++inner) {
            if (++r.iterations > options.max_iterations)
                throw ConvergenceError("reference_solver: iteration cap exceeded", m / weight / barrier.objective(x));
            const double decrement = barrier.newton(x, weight, dir, grad);
            if (std::isnan(decrement)) throw ConvergenceError("reference_solver: singular Newton system");
            if (decrement < 1e-7) break;
            double step = std::min(1.0, 0.99 * barrier.max_step(x, dir));
            const double current = barrier.merit(x, weight);
            while (barrier.merit(x + step * dir, weight) > current - 0.25 * step * decrement && step > 1e-16)
                step *= 0.5;
            if (step <= 1e-16) break;
            x += step * dir;
        }
        const double f = barrier.objective(x);
        if (m / weight <= options.relative_gap * f) {
            r.objective = f;
            r.lower_bound = f - m / weight;
            break;
        }
        weight *= 10.0;
    }
    r.plan = barrier.plan(x);
    return r;
}

} // namespace rmplan
