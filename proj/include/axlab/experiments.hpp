#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "axlab/engine.hpp"
#include "axlab/stats.hpp"

namespace axlab {

/// Seeds of replica r: the initial configuration and the dynamics get separate streams,
/// both derived from replica_seed(base, r).
struct ReplicaSeeds {
    Seed initial;
    Seed dynamics;
};
ReplicaSeeds replica_seeds(Seed base, std::uint64_t replica);

struct Aggregate {
    std::string name;
    double value = 0.0;
    double standard_error = 0.0;  ///< 0 when not applicable
};

/// Generic experiment output: one row of numbers per replica plus named aggregates that
/// can be recomputed from those rows.
struct ExperimentReport {
    std::string experiment;
    ModelParams params;
    std::uint64_t replicas = 0;
    Seed seed;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> records;
    std::vector<Aggregate> aggregates;
    std::vector<std::string> notes;
    double wall_seconds = 0.0;

    /// Throws std::out_of_range for an unknown name.
    const Aggregate& aggregate(const std::string& name) const;
    double value(const std::string& name) const { return aggregate(name).value; }
    std::vector<double> column(const std::string& name) const;
};

/// "# axelrod-lab report v1" tag line, per-replica CSV, then "# aggregate" lines.
void write_report_csv(std::ostream& os, const ExperimentReport& report);
/// Aggregates and notes only, as a JSON object.
std::string report_summary_json(const ExperimentReport& report);

struct ExperimentOptions {
    EngineKind engine = EngineKind::gillespie;
    double horizon = std::numeric_limits<double>::infinity();
    std::uint64_t event_cap = default_event_cap;
    unsigned threads = 1;
};

/// Columns: absorbed, end_time, blockade_density, domains, domain_density,
/// particle_density, effective_events. Replicas that stop before absorption are
/// censored: counted in "censored" and left out of the absorption-time mean.
ExperimentReport fixation_run(const ModelParams& params, std::uint64_t replicas, Seed seed,
                              const ExperimentOptions& options = {});

/// Same statistics for one fixed initial configuration (dynamics still vary by replica).
ExperimentReport fixation_run_from(const Configuration& initial, std::uint64_t replicas, Seed seed,
                                   const ExperimentOptions& options = {});

struct DensityCurve {
    std::vector<double> times;
    std::vector<double> particle_density;  ///< mean zeta / F per edge
    std::vector<double> particle_se;
    std::vector<double> blockade_density;
    std::vector<double> blockade_se;
    /// Estimate of P(eta(x, i) = eta(y, i)) for neighbours, i.e. 1 - particle density.
    std::vector<double> agreement;
    /// Replicas contributing at each time; event-capped runs drop out after their end time.
    std::vector<std::uint64_t> samples;
    std::uint64_t replicas = 0;
    std::uint64_t censored = 0;
};

/// Densities at each snapshot time (non-decreasing, within the horizon).
DensityCurve density_curve(const ModelParams& params, const std::vector<double>& snapshots, std::uint64_t replicas,
                           Seed seed, const ExperimentOptions& options = {});

/// n + 1 equally spaced times from 0 to horizon.
std::vector<double> uniform_grid(double horizon, int n);

void write_density_csv(std::ostream& os, const DensityCurve& curve);

struct CollisionOptions {
    ExperimentOptions run;
    std::uint64_t max_replicas = 1'000'000;
    /// Replicas are launched in fixed-size batches so the stopping point does not
    /// depend on the thread count.
    std::uint64_t batch = 64;
};

/// Runs replicas until at least `min_collisions` collisions are seen. Aggregates:
/// collisions, annihilation_fraction (with SE), wilson_low, wilson_high,
/// chi_square, chi_square_p, coalescences, target_expected = 1/(q-1).
/// A "shortfall" note is added if max_replicas ran out first.
ExperimentReport collision_outcome_experiment(const ModelParams& params, std::uint64_t min_collisions, Seed seed,
                                              const CollisionOptions& options = {});

/// Descendant counts M_t(site, i) for every feature, from Harris runs up to `time`.
/// Aggregates: mean_i and variance_i per feature. Adds a note when the site is close
/// enough to an interval end for the genealogy to feel it.
ExperimentReport martingale_experiment(const ModelParams& params, double time, int site, std::uint64_t replicas,
                                       Seed seed, unsigned threads = 1);

/// Minimal distance to an interval end for martingale_experiment to stay quiet.
double martingale_boundary_margin(double time);

struct SixArrowOutcome {
    /// 0 and 1 are the inner arrows a->b and c->b; 2..5 are b->a, b->c, (a-1)->a, (c+1)->c.
    int first = 0;
    bool inner = false;
    bool collided = false;
    bool blockade = false;
};

/// One race on a five-vertex window with single particles on the two middle edges.
SixArrowOutcome six_arrow_trial(int q, Rng& rng);

/// Aggregates: inner_first (with SE), wilson_low, wilson_high, inner_count,
/// collide_or_blockade_rate (among inner-first trials), collisions, blockades, and
/// arrow_k frequencies that sum to one.
ExperimentReport six_arrow_race(int q, std::uint64_t replicas, Seed seed);

struct SweepCell {
    int F = 2;
    int q = 2;
};

struct SweepOptions {
    int L = 300;
    Topology topology = Topology::interval;
    std::uint64_t replicas = 20;
    ExperimentOptions run;
    /// If set, each finished cell is written there atomically and reused by later runs
    /// with the same settings.
    std::optional<std::filesystem::path> directory;
};

struct SweepFailure {
    SweepCell cell;
    std::string message;
};

struct SweepResult {
    std::string csv;
    std::vector<SweepFailure> failures;
    std::uint64_t cells_run = 0;
    std::uint64_t cells_reused = 0;
};

inline constexpr const char* sweep_header =
    "kind,F,q,L,replica,absorbed,end_time,blockade_density,domains,particle_density";

/// One CSV row per (cell, replica), then one aggregate row per successful cell.
SweepResult sweep(const std::vector<SweepCell>& grid, Seed seed, const SweepOptions& options);

/// Seed of one sweep cell: independent of the grid order, so cells can be resumed.
Seed sweep_cell_seed(Seed base, const ModelParams& params);

struct SpacetimeField {
    ModelParams params;
    std::vector<double> times;
    std::vector<std::vector<int>> zeta;  ///< zeta[row][edge]
};

/// Pile sizes at `rows` equally spaced times from 0 to horizon.
SpacetimeField spacetime_field(const Trajectory& trajectory, int rows);

/// Grayscale PNG, one pixel per (snapshot, edge): white for empty edges, black for blockades.
void write_spacetime_png(const std::filesystem::path& path, const SpacetimeField& field);

struct SpacetimeExport {
    std::filesystem::path trajectory;
    std::filesystem::path zeta;
    std::optional<std::filesystem::path> image;
    SpacetimeField field;
};

/// Runs Gillespie to `horizon`, writes <stem>.log (replayable trajectory),
/// <stem>.zeta.csv (space-time stream) and optionally <stem>.png.
SpacetimeExport spacetime_export(const ModelParams& params, double horizon, Seed seed,
                                 const std::filesystem::path& stem, int rows, bool render);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace axlab
