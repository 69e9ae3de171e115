#pragma once

#include "rmplan/channel.hpp"
#include "rmplan/problem.hpp"

namespace rmplan {

/// Physical link budget used to turn a radio map into a planning instance.
struct LinkBudget {
    double bandwidth_hz = 10e6;
    double noise_figure_db = 7.0;
    double i_bs_dbm = -70.0;
    double p_max_dbm = 23.0;
    double demand_bits = 500e6;

    /// Thermal noise over the band, in mW.
    double noise_mw() const;
    double i_bs_mw() const { return db_to_linear(i_bs_dbm); }
    double p_max_mw() const { return db_to_linear(p_max_dbm); }
};

/// Receiver gains are divided by the noise power so that p * g is an SNR with p in mW.
/// `beta` scales the receiver gains (1 leaves them untouched). Powers are capped by both
/// the neighbor interference limit and p_max.
ProblemInstance instance_from_map(const RadioMap& map, const LinkBudget& budget, double lambda,
                                  double delta, double beta = 1.0);

/// Neighbor gains (T x M), raw linear.
Matrix neighbor_gains(const RadioMap& map);
/// Unknown-user gains (T x Q), raw linear.
Matrix user_gains(const RadioMap& map);

} // namespace rmplan
