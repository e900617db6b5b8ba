#pragma once

#include <cstdint>
#include <vector>

#include "axlab/model.hpp"

namespace axlab {

/// Particle occupancy of every (edge, feature) cell and the per-edge pile sizes.
///
/// A particle sits at (u, i) exactly when the endpoints of edge u disagree on feature i.
/// An edge holding F particles is a blockade.
class ParticleField {
public:
    ParticleField() = default;
    ParticleField(int edges, int features);

    int edges() const { return edges_; }
    int features() const { return features_; }

    bool occupied(int u, int i) const { return occupancy_[index(u, i)] != 0; }
    int count(int u) const { return counts_[static_cast<std::size_t>(u)]; }
    bool is_blockade(int u) const { return count(u) == features_; }
    const std::vector<int>& counts() const { return counts_; }

    void set(int u, int i, bool occupied);

    std::int64_t total() const;
    std::int64_t total_on_feature(int i) const;
    int blockades() const;

    friend bool operator==(const ParticleField&, const ParticleField&) = default;

private:
    std::size_t index(int u, int i) const
    {
        return static_cast<std::size_t>(u) * features_ + static_cast<std::size_t>(i);
    }

    int edges_ = 0;
    int features_ = 0;
    std::vector<std::uint8_t> occupancy_;
    std::vector<int> counts_;
};

ParticleField derive_particles(const Configuration& c);

/// Per-particle jump rate on an edge holding j particles: 1/j - 1/F. Rejects j outside 1..F.
Ratio jump_rate(int j, int F);

/// Same rate in floating point; both engines and replay compare marks against this value.
double jump_rate_value(int j, int F);

}  // namespace axlab
