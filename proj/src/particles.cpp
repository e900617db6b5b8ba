#include "axlab/particles.hpp"

#include <numeric>

namespace axlab {

ParticleField::ParticleField(int edges, int features)
    : edges_(edges),
      features_(features),
      occupancy_(static_cast<std::size_t>(edges) * features, 0),
      counts_(static_cast<std::size_t>(edges), 0)
{
}

void ParticleField::set(int u, int i, bool occupied)
{
    auto& cell = occupancy_[index(u, i)];
    if ((cell != 0) == occupied) return;
    cell = occupied ? 1 : 0;
    counts_[static_cast<std::size_t>(u)] += occupied ? 1 : -1;
}

std::int64_t ParticleField::total() const
{
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::int64_t ParticleField::total_on_feature(int i) const
{
    std::int64_t n = 0;
    for (int u = 0; u < edges_; ++u) n += occupied(u, i);
    return n;
}

int ParticleField::blockades() const
{
    int n = 0;
    for (int c : counts_) n += c == features_;
    return n;
}

ParticleField derive_particles(const Configuration& c)
{
    const auto& p = c.params();
    ParticleField f(p.edge_count(), p.F);
    for (int u = 0; u < p.edge_count(); ++u) {
        const int x = p.left_of(u);
        const int y = p.right_of(u);
        for (int i = 0; i < p.F; ++i) f.set(u, i, c.state(x, i) != c.state(y, i));
    }
    return f;
}

Ratio jump_rate(int j, int F)
{
    if (j < 1 || j > F)
        throw ContractError("jump_rate: pile size " + std::to_string(j) + " outside 1.." + std::to_string(F));
    return Ratio(F - j, static_cast<std::int64_t>(j) * F);
}

double jump_rate_value(int j, int F)
{
    if (j < 1 || j > F) return 0.0;
    return static_cast<double>(F - j) / (static_cast<double>(j) * F);
}

}  // namespace axlab
