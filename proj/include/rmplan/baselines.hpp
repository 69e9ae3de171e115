#pragma once

#include "rmplan/dual_solver.hpp"
#include "rmplan/instance_builder.hpp"
#include "rmplan/rounding.hpp"

namespace rmplan {

/// Channel realizations seen by a scheme that reacts to the current slot.
struct RealizedChannels {
    Matrix receiver_gain; ///< T x N, noise normalized, fading included
    Matrix neighbor_gain; ///< T x M, raw linear, fading included
};

RealizedChannels realize_channels(const RadioMap& map, const Matrix& fading, double noise_mw);

struct BestEffortResult {
    Plan plan;
    Vector delivered; ///< realized throughput per receiver, normalized units
};

/// Equal split among receivers still short of their demand, at the instantaneous
/// interference-limited power (never above p_max).
BestEffortResult best_effort(const RealizedChannels& channels, const Vector& demand, double i_bs_mw,
                             double p_max_mw);

struct PlannedScheme {
    ProblemInstance instance;
    Plan relaxed;
    Plan rounded;
    MultiSolution solution;
};

/// Plans on `map` with receiver gains scaled by beta. With the average map and beta < 1
/// this is the map-free predictive baseline; with the true map and beta = 1 it is the
/// proposed scheme.
PlannedScheme predictive_womap(const RadioMap& map, const LinkBudget& budget, double lambda,
                               double delta, double beta, const MultiSolverOptions& options = {});

/// Relaxed planning pipeline on a ready instance: solve, convert and round.
PlannedScheme plan_instance(const ProblemInstance& inst, const MultiSolverOptions& options = {});

struct ReferenceOptions {
    double relative_gap = 1e-7;
    /// Cap on the total number of Newton steps.
    Index max_iterations = 5000;
};

struct ReferenceResult {
    PhiPlan plan;
    double objective = 0.0;
    double lower_bound = 0.0;
    Index iterations = 0;
};

/// Slow primal solver for the relaxed problem: a log-barrier interior-point method on
/// (phi, l), where the rate caps are linear constraints phi <= c_cap * l. Stops once the
/// barrier duality gap m / t is below relative_gap of the objective. Needs the slots split
/// in proportion to demand over capacity to be strictly feasible; otherwise throws
/// InfeasibleError.
ReferenceResult reference_solver(const ProblemInstance& inst, const ReferenceOptions& options = {});

struct GridOptions {
    double share_step = 1e-2;
    int power_points = 40;
    /// Smallest grid power as a fraction of the slot's power cap.
    double power_floor = 1e-4;
    /// Throughput bins per receiver; 0 picks a default for the instance size.
    int throughput_bins = 0;
};

struct GridResult {
    Plan plan;
    double cost = 0.0;
};

/// Exhaustive search for the indicator-cost problem over a share/power grid. Throughput
/// is accumulated in bins rounded down, so every returned plan is feasible and its cost
/// is an upper bound on the optimum.
GridResult grid_oracle(const ProblemInstance& inst, const GridOptions& options = {});

} // namespace rmplan
