#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "axlab/rng.hpp"

namespace axlab {

/// A precondition of a model operation was violated by the caller.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Topology { interval, ring };

std::string_view to_string(Topology t);
Topology parse_topology(std::string_view s);

using State = std::uint16_t;
using Ratio = boost::rational<std::int64_t>;

/// Number of features F, states per feature q, vertex count L and boundary condition.
///
/// Vertices are 0..L-1 and features 0..F-1; states are 1..q. Edge e joins vertex e and
/// vertex e+1 (mod L on the ring), so it stands for the half-integer site e + 1/2.
struct ModelParams {
    int F = 2;
    int q = 2;
    int L = 2;
    Topology topology = Topology::interval;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;

    int edge_count() const { return topology == Topology::ring ? L : L - 1; }
    int left_of(int edge) const { return edge; }
    int right_of(int edge) const { return edge + 1 == L ? 0 : edge + 1; }

    /// Edge joining x and y, if they are nearest neighbours.
    std::optional<int> edge_between(int x, int y) const;

    /// Neighbour of x on the far side from y, if any (x, y adjacent).
    std::optional<int> opposite_neighbor(int x, int y) const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

std::string describe(const ModelParams& p);

class Configuration {
public:
    Configuration() = default;
    /// All cells set to `fill`.
    explicit Configuration(const ModelParams& params, State fill = 1);
    Configuration(const ModelParams& params, std::vector<State> cells);
    Configuration(const ModelParams& params, const std::vector<std::vector<int>>& cultures);

    const ModelParams& params() const { return params_; }
    int vertices() const { return params_.L; }
    int features() const { return params_.F; }

    State state(int x, int i) const { return cells_[index(x, i)]; }
    void set_state(int x, int i, State s) { cells_[index(x, i)] = s; }
    std::span<const State> culture(int x) const
    {
        return {cells_.data() + static_cast<std::size_t>(x) * params_.F,
                static_cast<std::size_t>(params_.F)};
    }
    const std::vector<State>& cells() const { return cells_; }

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::size_t index(int x, int i) const
    {
        return static_cast<std::size_t>(x) * params_.F + static_cast<std::size_t>(i);
    }

    ModelParams params_{};
    std::vector<State> cells_;
};

/// Product measure: every (vertex, feature) state iid uniform on 1..q.
Configuration sample_pi0(const ModelParams& params, Seed seed);
Configuration sample_pi0(const ModelParams& params, Rng& rng);

/// Count of features on which x and y agree.
int shared_features(const Configuration& c, int x, int y);

/// Fraction of shared features of two adjacent vertices, as an exact ratio over F.
Ratio overlap(const Configuration& c, int x, int y);

/// Copy of `c` with feature i of x set to feature i of y.
Configuration apply_update(const Configuration& c, int x, int y, int i);
void apply_update_in_place(Configuration& c, int x, int y, int i);

/// True when every adjacent pair agrees on all or on no features.
bool is_absorbed(const Configuration& c);

/// Edges whose endpoints disagree on every feature.
int blockade_count(const Configuration& c);

/// Maximal runs of vertices carrying identical cultures.
int domain_count(const Configuration& c);

/// Text format: a header line "F=<F> q=<q> L=<L> topology=<t>" followed by one line per
/// vertex holding F comma-separated states.
void write_configuration(std::ostream& os, const Configuration& c);
Configuration read_configuration(std::istream& is);
ModelParams parse_params_header(std::string_view line);

}  // namespace axlab
