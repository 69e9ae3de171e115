#include "rmplan/baselines.hpp"

#include <array>

namespace rmplan {

namespace {

struct Choice {
    double share = 0.0;
    double power = 0.0;
};

// Options one receiver has in one slot: (share, power) pairs with positive throughput.
struct ReceiverOption {
    Choice choice;
    double throughput = 0.0;
    double energy = 0.0;
};

std::vector<ReceiverOption> receiver_options(const ProblemInstance& inst, Index t, Index n,
                                             const GridOptions& opt) {
    std::vector<ReceiverOption> out{{}};
    const int steps = int(std::lround(1.0 / opt.share_step));
    const double p_cap = inst.p_cap(t);
    for (int k = 1; k <= steps; ++k) {
        double l = std::min(1.0, k * opt.share_step);
        for (int j = 0; j < opt.power_points; ++j) {
            double frac = opt.power_points == 1
                              ? 1.0
                              : std::pow(opt.power_floor, 1.0 - double(j) / (opt.power_points - 1));
            double p = p_cap * frac;
            double c = capacity(p, inst.g(t, n), inst.eps(t, n));
            if (c <= 0.0) continue;
            out.push_back({{l, p}, c * l, p * l});
        }
    }
    return out;
}

} // namespace

GridResult grid_oracle(const ProblemInstance& inst, const GridOptions& opt) {
    validate(inst);
    const Index T = inst.slots(), N = inst.receivers();
    if (N > 2 || (N == 2 && T > 3) || (N == 1 && T > 64))
        throw DomainError("grid_oracle: instance too large (N <= 2; T <= 3 for N = 2, T <= 64 for N = 1)");
    if (!(opt.share_step > 0.0 && opt.share_step <= 1.0) || opt.power_points < 1)
        throw DomainError("grid_oracle: invalid grid options");

    GridResult result{zero_plan(inst), 0.0};
    if ((inst.demand.array() == 0.0).all()) return result;

    const int bins = opt.throughput_bins > 0 ? opt.throughput_bins : (N == 1 ? 4000 : 100);
    std::array<int, 2> size{1, 1};
    std::array<double, 2> width{1.0, 1.0};
    for (Index n = 0; n < N; ++n)
        if (inst.demand(n) > 0.0) {
            size[size_t(n)] = bins + 1;
            width[size_t(n)] = inst.demand(n) / bins;
        }
    const int states = size[0] * size[1];
    auto bin_of = [&](Index n, double y) {
        if (size[size_t(n)] == 1) return 0;
        return int(std::min<double>(size[size_t(n)] - 1, std::floor(y / width[size_t(n)] + 1e-12)));
    };

    // Per slot, the cheapest option for every binned throughput increment.
    struct SlotOption {
        std::array<int, 2> inc{0, 0};
        double cost = kInf;
        std::array<Choice, 2> choice{};
    };
    std::vector<std::vector<SlotOption>> slot_options(static_cast<size_t>(T));
    for (Index t = 0; t < T; ++t) {
        std::vector<std::vector<ReceiverOption>> per(static_cast<size_t>(N));
        for (Index n = 0; n < N; ++n)
            if (inst.demand(n) > 0.0) per[size_t(n)] = receiver_options(inst, t, n, opt);
            else per[size_t(n)] = {ReceiverOption{}};
        std::vector<SlotOption> best(static_cast<size_t>(states));
        auto offer = [&](const ReceiverOption& a, const ReceiverOption* b) {
            double used = a.choice.share + (b ? b->choice.share : 0.0);
            if (used > 1.0 + 1e-12) return;
            SlotOption o;
            o.inc = {bin_of(0, a.throughput), b ? bin_of(1, b->throughput) : 0};
            o.cost = a.energy + (b ? b->energy : 0.0) + (used > 0.0 ? inst.lambda : 0.0);
            o.choice = {a.choice, b ? b->choice : Choice{}};
            int key = o.inc[0] * size[1] + o.inc[1];
            if (o.cost < best[size_t(key)].cost) best[size_t(key)] = o;
        };
        for (const auto& a : per[0]) {
            if (N == 1) {
                offer(a, nullptr);
                continue;
            }
            for (const auto& b : per[1]) offer(a, &b);
        }
        for (const auto& o : best)
            if (std::isfinite(o.cost)) slot_options[size_t(t)].push_back(o);
    }

    // Dynamic program over slots on the binned throughput state.
    std::vector<double> cost(size_t(states), kInf);
    cost[0] = 0.0;
    std::vector<std::vector<int>> from_state(static_cast<size_t>(T)), from_option(static_cast<size_t>(T));
    for (Index t = 0; t < T; ++t) {
        std::vector<double> next(size_t(states), kInf);
        auto& fs = from_state[size_t(t)];
        auto& fo = from_option[size_t(t)];
        fs.assign(size_t(states), -1);
        fo.assign(size_t(states), -1);
        const auto& opts = slot_options[size_t(t)];
        for (int s = 0; s < states; ++s) {
            if (!std::isfinite(cost[size_t(s)])) continue;
            int s0 = s / size[1], s1 = s % size[1];
            for (size_t k = 0; k < opts.size(); ++k) {
                int a = std::min(size[0] - 1, s0 + opts[k].inc[0]);
                int b = std::min(size[1] - 1, s1 + opts[k].inc[1]);
                int target = a * size[1] + b;
                double c = cost[size_t(s)] + opts[k].cost;
                if (c < next[size_t(target)]) {
                    next[size_t(target)] = c;
                    fs[size_t(target)] = s;
                    fo[size_t(target)] = int(k);
                }
            }
        }
        cost = std::move(next);
    }

    const int goal = states - 1;
    if (!std::isfinite(cost[size_t(goal)]))
        throw InfeasibleError("grid_oracle: no grid plan meets the demands");
    result.cost = cost[size_t(goal)];
    int s = goal;
    for (Index t = T - 1; t >= 0; --t) {
        const SlotOption& o = slot_options[size_t(t)][size_t(from_option[size_t(t)][size_t(s)])];
        for (Index n = 0; n < N; ++n) {
            result.plan.share(t, n) = o.choice[size_t(n)].share;
            result.plan.power(t, n) = o.choice[size_t(n)].power;
        }
        s = from_state[size_t(t)][size_t(s)];
    }
    return result;
}

} // namespace rmplan
