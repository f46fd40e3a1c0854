#pragma once

#include "dynbc/mesh.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dynbc {

inline constexpr const char* kVersion = "0.1.0";

/// First line of every CSV written by the tools: `# dynbc <version> config <hash>`.
std::string csv_header(const std::string& config_hash);

struct NodalField {
    std::string name;
    std::span<const double> values;
};

/// Legacy ASCII VTK unstructured grid (triangles, z = 0) with point scalars.
void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<NodalField>& fields,
               const std::string& title = "dynbc");

/// `solution_<t>.vtk` with t printed in shortest round-trip form.
std::string snapshot_filename(double t);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace dynbc
