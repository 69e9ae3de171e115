#pragma once

#include "rmplan/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rmplan {

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

double distance(const Position& a, const Position& b);

enum class NodeRole { transmitter, receiver, neighbor, user };

const char* to_string(NodeRole role);

/// Positions are sampled at the start of every slot, t * delta.
struct NodeTrack {
    int node_id = 0;
    NodeRole role = NodeRole::transmitter;
    std::vector<Position> positions;
    double speed = 0.0;
};

struct ScenarioConfig {
    double area_m = 200.0;
    int num_bs = 5;
    int num_users = 100;
    int num_receivers = 4;
    double tx_height_m = 100.0;
    double rx_height_horizontal_m = 100.0;
    double rx_height_vertical_m = 95.0;
    double bs_height_m = 10.0;
    double user_height_m = 0.0;
    double tx_speed_mps = 5.0;
    double rx_speed_mps = 3.0;
    double carrier_freq_ghz = 3.0;
    double shadowing_std_db = std::sqrt(8.0);
    double shadowing_corr_dist_m = 5.0;
    double los_a = 11.95;
    double los_b = 0.14;
    double los_threshold = 0.5;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

/// 3GPP urban-micro path loss in dB. Distance in meters, carrier in GHz.
template <typename Scalar>
Scalar path_loss_umi(Scalar distance_m, Scalar carrier_ghz, bool los) {
    using std::log10;
    if (!(distance_m > Scalar(0)) || !(carrier_ghz > Scalar(0)))
        throw DomainError("path_loss_umi: distance and carrier must be positive");
    if (los)
        return Scalar(22.0) + Scalar(28.0) * log10(distance_m) + Scalar(20.0) * log10(carrier_ghz);
    return Scalar(22.7) + Scalar(36.7) * log10(distance_m) + Scalar(26.0) * log10(carrier_ghz);
}

template <typename Scalar>
Scalar los_probability(Scalar elevation_deg, Scalar a, Scalar b) {
    using std::exp;
    if (!(a > Scalar(0)) || !(b > Scalar(0)))
        throw DomainError("los_probability: a and b must be positive");
    if (elevation_deg < Scalar(0) || elevation_deg > Scalar(90))
        throw DomainError("los_probability: elevation outside [0, 90] degrees");
    return Scalar(1) / (Scalar(1) + a * exp(-b * (elevation_deg - a)));
}

/// Elevation of the segment between two points, in degrees.
double elevation_deg(const Position& a, const Position& b);

/// Thresholded LOS state for a ground link; air-to-air links are always LOS.
bool los_state(const Position& tx, const Position& rx, const ScenarioConfig& cfg,
               bool air_to_air = false);

/// AR(1) log-normal shadowing sampled along cumulative traveled distances (meters).
std::vector<double> shadowing_track(std::span<const double> cumulative_distance_m,
                                    double std_db, double corr_dist_m, Rng& rng);

/// Gamma(kappa, 1/kappa) small-scale fading; an infinite kappa yields exactly 1.
double sample_fading(double kappa, Rng& rng);

/// Node 0 is the transmitter, then receivers, neighbor base stations and users.
std::vector<NodeTrack> generate_tracks(const ScenarioConfig& cfg, double delta, Index num_slots);

struct LinkParams {
    double g = 0.0;
    double kappa = 1.0;
    bool los = true;
};

/// Large-scale channel state from the transmitter to every other node, per slot.
/// Column j of `gain` belongs to node `link_node[j]`.
struct RadioMap {
    MatrixX<double> gain;
    MatrixX<bool> los;
    Vector kappa;
    std::vector<int> link_node;
    std::vector<NodeRole> link_role;

    Index slots() const { return gain.rows(); }
    Index links() const { return gain.cols(); }
    LinkParams at(Index t, Index link) const { return {gain(t, link), kappa(link), los(t, link)}; }
    std::vector<Index> links_with_role(NodeRole role) const;
    /// Keeps every `stride`-th slot.
    RadioMap subsample(Index stride) const;
};

RadioMap build_radio_map(const ScenarioConfig& cfg, const std::vector<NodeTrack>& tracks,
                         Rng& rng);

/// Map a planner would hold without measurements: LOS-probability weighted path loss
/// (mixed in dB), no shadowing, and no knowledge of the fading shape.
RadioMap average_radio_map(const ScenarioConfig& cfg, const std::vector<NodeTrack>& tracks);

/// One fading realization per slot and link, shaped like `map.gain`.
Matrix sample_fading_matrix(const RadioMap& map, Rng& rng);

} // namespace rmplan
