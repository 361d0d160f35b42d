#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pinnworks/odeint.hpp"

namespace pinnworks {

/// Shortest form is not needed; 17 significant digits round-trip exactly.
std::string format_double(double v);

/// Strict full-string parse; throws std::invalid_argument.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

using ExtraColumn = std::function<double(double t, std::span<const double> state)>;

/// Header `t,<var1>,...[,extra]`, one row per time stamp.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::string& extra_name = {}, const ExtraColumn& extra = {});

Trajectory read_trajectory_csv(std::istream& in, Provenance provenance);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_file(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace pinnworks
