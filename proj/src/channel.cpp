#include "rmplan/channel.hpp"

#include <algorithm>

namespace rmplan {

namespace {

constexpr double kMinLinkDistance = 1.0;

// Position along a segment of length `span` after traveling `s` meters,
// bouncing back at both ends.
double reflect(double s, double span) {
    if (span <= 0.0) return 0.0;
    double period = 2.0 * span;
    double r = std::fmod(s, period);
    if (r < 0.0) r += period;
    return r <= span ? r : period - r;
}

// Receivers alternate between horizontal and vertical lanes at 1/4 and 3/4 of the area.
NodeTrack receiver_track(const ScenarioConfig& cfg, int index, double delta, Index num_slots) {
    NodeTrack track;
    track.node_id = index + 1;
    track.role = NodeRole::receiver;
    track.speed = cfg.rx_speed_mps;
    const double a = cfg.area_m;
    const bool horizontal = index % 2 == 0;
    const int lane = (index / 2) % 2;
    const double fixed = a * (lane == 0 ? 0.25 : 0.75);
    const double start = a * (lane == 0 ? 0.2 : 0.8);
    const double sign = lane == 0 ? 1.0 : -1.0;
    const double height = horizontal ? cfg.rx_height_horizontal_m : cfg.rx_height_vertical_m;
    track.positions.reserve(static_cast<size_t>(num_slots));
    for (Index t = 0; t < num_slots; ++t) {
        double moving = reflect(start + sign * cfg.rx_speed_mps * delta * double(t), a);
        if (horizontal)
            track.positions.push_back({moving, fixed, height});
        else
            track.positions.push_back({fixed, moving, height});
    }
    return track;
}

NodeTrack static_track(int id, NodeRole role, Position p, Index num_slots) {
    NodeTrack track;
    track.node_id = id;
    track.role = role;
    track.positions.assign(static_cast<size_t>(num_slots), p);
    return track;
}

double link_distance(const Position& a, const Position& b) {
    return std::max(distance(a, b), kMinLinkDistance);
}

} // namespace

double distance(const Position& a, const Position& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                     (a.z - b.z) * (a.z - b.z));
}

const char* to_string(NodeRole role) {
    switch (role) {
    case NodeRole::transmitter: return "transmitter";
    case NodeRole::receiver: return "receiver";
    case NodeRole::neighbor: return "neighbor";
    case NodeRole::user: return "user";
    }
    return "unknown";
}

void ScenarioConfig::validate() const {
    if (!(area_m > 0.0)) throw DomainError("scenario: area_m must be positive");
    if (num_bs < 0 || num_users < 0 || num_receivers < 1)
        throw DomainError("scenario: node counts must be non-negative, receivers >= 1");
    if (tx_height_m < 0.0 || rx_height_horizontal_m < 0.0 || rx_height_vertical_m < 0.0 ||
        bs_height_m < 0.0 || user_height_m < 0.0)
        throw DomainError("scenario: heights must be non-negative");
    if (tx_speed_mps < 0.0 || rx_speed_mps < 0.0)
        throw DomainError("scenario: speeds must be non-negative");
    if (!(carrier_freq_ghz > 0.0)) throw DomainError("scenario: carrier frequency must be positive");
    if (shadowing_std_db < 0.0 || !(shadowing_corr_dist_m > 0.0))
        throw DomainError("scenario: invalid shadowing parameters");
    if (!(los_a > 0.0) || !(los_b > 0.0)) throw DomainError("scenario: los_a, los_b must be positive");
    if (!(los_threshold > 0.0 && los_threshold < 1.0))
        throw DomainError("scenario: los_threshold must lie in (0, 1)");
}

double elevation_deg(const Position& a, const Position& b) {
    double d = distance(a, b);
    if (d == 0.0) throw DomainError("elevation_deg: coincident positions");
    double u = std::abs(a.z - b.z);
    return std::asin(std::min(1.0, u / d)) * 180.0 / std::numbers::pi;
}

bool los_state(const Position& tx, const Position& rx, const ScenarioConfig& cfg, bool air_to_air) {
    if (distance(tx, rx) == 0.0) throw DomainError("los_state: coincident positions");
    if (air_to_air) return true;
    return los_probability(elevation_deg(tx, rx), cfg.los_a, cfg.los_b) >= cfg.los_threshold;
}

std::vector<double> shadowing_track(std::span<const double> cumulative_distance_m, double std_db,
                                    double corr_dist_m, Rng& rng) {
    if (!(corr_dist_m > 0.0)) throw DomainError("shadowing_track: corr_dist_m must be positive");
    std::vector<double> out(cumulative_distance_m.size(), 0.0);
    if (out.empty() || std_db == 0.0) return out;
    std::normal_distribution<double> normal(0.0, 1.0);
    out[0] = std_db * normal(rng);
    for (size_t k = 1; k < out.size(); ++k) {
        double step = std::abs(cumulative_distance_m[k] - cumulative_distance_m[k - 1]);
        double rho = std::isinf(corr_dist_m) ? 1.0 : std::exp(-step / corr_dist_m);
        double z = normal(rng);
        out[k] = rho * out[k - 1] + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * std_db * z;
    }
    return out;
}

double sample_fading(double kappa, Rng& rng) {
    if (!(kappa >= 1.0)) throw DomainError("sample_fading: kappa must be >= 1");
    if (std::isinf(kappa)) return 1.0;
    std::gamma_distribution<double> gamma(kappa, 1.0 / kappa);
    return gamma(rng);
}

std::vector<NodeTrack> generate_tracks(const ScenarioConfig& cfg, double delta, Index num_slots) {
    cfg.validate();
    if (!(delta > 0.0) || num_slots < 1) throw DomainError("generate_tracks: need delta > 0, T >= 1");
    std::vector<NodeTrack> tracks;

    NodeTrack tx;
    tx.node_id = 0;
    tx.role = NodeRole::transmitter;
    tx.speed = cfg.tx_speed_mps;
    for (Index t = 0; t < num_slots; ++t)
        tx.positions.push_back({reflect(cfg.tx_speed_mps * delta * double(t), cfg.area_m),
                                cfg.area_m / 2.0, cfg.tx_height_m});
    tracks.push_back(std::move(tx));

    for (int i = 0; i < cfg.num_receivers; ++i)
        tracks.push_back(receiver_track(cfg, i, delta, num_slots));

    // Ground nodes come from their own stream so geometry does not depend on delta.
    Rng geometry(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> coord(0.0, cfg.area_m);
    int id = cfg.num_receivers + 1;
    for (int m = 0; m < cfg.num_bs; ++m) {
        double x = coord(geometry), y = coord(geometry);
        tracks.push_back(static_track(id++, NodeRole::neighbor, {x, y, cfg.bs_height_m}, num_slots));
    }
    for (int q = 0; q < cfg.num_users; ++q) {
        double x = coord(geometry), y = coord(geometry);
        tracks.push_back(static_track(id++, NodeRole::user, {x, y, cfg.user_height_m}, num_slots));
    }
    return tracks;
}

std::vector<Index> RadioMap::links_with_role(NodeRole role) const {
    std::vector<Index> out;
    for (size_t j = 0; j < link_role.size(); ++j)
        if (link_role[j] == role) out.push_back(Index(j));
    return out;
}

RadioMap RadioMap::subsample(Index stride) const {
    if (stride < 1) throw DomainError("RadioMap::subsample: stride must be >= 1");
    Index rows = (slots() + stride - 1) / stride;
    RadioMap out = *this;
    out.gain.resize(rows, links());
    out.los.resize(rows, links());
    for (Index r = 0; r < rows; ++r) {
        out.gain.row(r) = gain.row(r * stride);
        out.los.row(r) = los.row(r * stride);
    }
    return out;
}

namespace {

RadioMap empty_map(const std::vector<NodeTrack>& tracks) {
    if (tracks.empty() || tracks.front().role != NodeRole::transmitter)
        throw DomainError("radio map: first track must be the transmitter");
    Index T = Index(tracks.front().positions.size());
    Index L = Index(tracks.size()) - 1;
    RadioMap map;
    map.gain.resize(T, L);
    map.los.resize(T, L);
    map.kappa.resize(L);
    for (Index j = 0; j < L; ++j) {
        const NodeTrack& node = tracks[size_t(j + 1)];
        if (Index(node.positions.size()) != T)
            throw DomainError("radio map: track lengths differ");
        map.link_node.push_back(node.node_id);
        map.link_role.push_back(node.role);
    }
    return map;
}

} // namespace

RadioMap build_radio_map(const ScenarioConfig& cfg, const std::vector<NodeTrack>& tracks, Rng& rng) {
    cfg.validate();
    RadioMap map = empty_map(tracks);
    const auto& tx = tracks.front().positions;
    const Index T = map.slots();
    std::uniform_int_distribution<int> kappa_draw(1, 30);
    std::vector<double> travel(static_cast<size_t>(T));
    for (Index j = 0; j < map.links(); ++j) {
        const NodeTrack& node = tracks[size_t(j + 1)];
        const bool air = node.role == NodeRole::receiver;
        map.kappa(j) = kappa_draw(rng);

        travel[0] = 0.0;
        for (Index t = 1; t < T; ++t) {
            const Position& a0 = tx[size_t(t - 1)];
            const Position& a1 = tx[size_t(t)];
            const Position& b0 = node.positions[size_t(t - 1)];
            const Position& b1 = node.positions[size_t(t)];
            Position rel0{b0.x - a0.x, b0.y - a0.y, b0.z - a0.z};
            Position rel1{b1.x - a1.x, b1.y - a1.y, b1.z - a1.z};
            travel[size_t(t)] = travel[size_t(t - 1)] + distance(rel0, rel1);
        }
        std::vector<double> chi = air ? std::vector<double>(size_t(T), 0.0)
                                      : shadowing_track(travel, cfg.shadowing_std_db,
                                                        cfg.shadowing_corr_dist_m, rng);
        for (Index t = 0; t < T; ++t) {
            const Position& p0 = tx[size_t(t)];
            const Position& pj = node.positions[size_t(t)];
            bool los = los_state(p0, pj, cfg, air);
            double pl = path_loss_umi(link_distance(p0, pj), cfg.carrier_freq_ghz, los);
            map.gain(t, j) = db_to_linear(-(pl + chi[size_t(t)]));
            map.los(t, j) = los;
        }
    }
    return map;
}

RadioMap average_radio_map(const ScenarioConfig& cfg, const std::vector<NodeTrack>& tracks) {
    cfg.validate();
    RadioMap map = empty_map(tracks);
    const auto& tx = tracks.front().positions;
    map.kappa.setConstant(kInf);
    for (Index j = 0; j < map.links(); ++j) {
        const NodeTrack& node = tracks[size_t(j + 1)];
        const bool air = node.role == NodeRole::receiver;
        for (Index t = 0; t < map.slots(); ++t) {
            const Position& p0 = tx[size_t(t)];
            const Position& pj = node.positions[size_t(t)];
            double d = link_distance(p0, pj);
            double pl_los = path_loss_umi(d, cfg.carrier_freq_ghz, true);
            double pl;
            if (air) {
                pl = pl_los;
            } else {
                double prob = los_probability(elevation_deg(p0, pj), cfg.los_a, cfg.los_b);
                pl = prob * pl_los + (1.0 - prob) * path_loss_umi(d, cfg.carrier_freq_ghz, false);
            }
            map.gain(t, j) = db_to_linear(-pl);
            map.los(t, j) = air || los_state(p0, pj, cfg, false);
        }
    }
    return map;
}

Matrix sample_fading_matrix(const RadioMap& map, Rng& rng) {
    Matrix xi(map.slots(), map.links());
    for (Index j = 0; j < map.links(); ++j) {
        double kappa = map.kappa(j);
        if (std::isinf(kappa)) {
            xi.col(j).setOnes();
            continue;
        }
        std::gamma_distribution<double> gamma(kappa, 1.0 / kappa);
        for (Index t = 0; t < map.slots(); ++t) xi(t, j) = gamma(rng);
    }
    return xi;
}

} // namespace rmplan
