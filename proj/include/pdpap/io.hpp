#pragma once

#include "pdpap/control.hpp"
#include "pdpap/pdpap.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pdpap::io {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
/// Throws ConfigError on malformed input.
double parse_double(std::string_view text);

inline constexpr std::string_view log_header =
    "k,t_sec,c,relerr,J_exact,J_inexact,res_pde,res_adj,res_x,res_y";

void write_log_header(std::ostream& out);
void write_log_row(std::ostream& out, const LogRow& row);
IterationLog read_log_csv(std::istream& in);
IterationLog read_log_csv(const std::filesystem::path& path);

/// `c = <value>` and, for field controls, `a = v0,v1,...`.
void write_control(std::ostream& out, const ControlParam& x);
void write_control(const std::filesystem::path& path, const ControlParam& x);
ControlParam read_control(std::istream& in);
ControlParam read_control(const std::filesystem::path& path);

/// One row per node: `node,z1,...,zm`.
void write_fields(std::ostream& out, const std::vector<GridFunction>& fields,
                  std::string_view prefix);
std::vector<GridFunction> read_fields(std::istream& in);

} // namespace pdpap::io
