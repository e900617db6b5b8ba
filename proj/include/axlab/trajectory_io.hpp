#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "axlab/engine.hpp"

namespace axlab {

/// Format tag written on the first line of every trajectory log.
inline constexpr const char* trajectory_format_tag = "axelrod-lab-trajectory v1";

/// Line-based trajectory log:
///
///     axelrod-lab-trajectory v1
///     F=<F> q=<q> L=<L> topology=<interval|ring>
///     engine=<harris|gillespie> seed=<u64> horizon=<real|inf> event_cap=<u64> log=<all|effective|none>
///     end_time=<real> absorbed=<0|1> stop=<absorbed|horizon|event_cap> arrows=<u64> effective=<u64>
///     initial
///     <L lines of F comma-separated states>
///     events <n>
///     <time>,<source>,<target>,<feature>,<mark>,<active>,<effective>     (n lines)
///     final
///     <L lines of F comma-separated states>
///
/// Vertices and features are 0-based, states 1-based. Reals use the shortest
/// representation that parses back to the same double, so logs round-trip exactly.
void write_trajectory(std::ostream& os, const Trajectory& t);
Trajectory read_trajectory(std::istream& is);

void save_trajectory(const std::filesystem::path& path, const Trajectory& t);
Trajectory load_trajectory(const std::filesystem::path& path);

std::string format_real(double v);
double parse_real(std::string_view s);

}  // namespace axlab
