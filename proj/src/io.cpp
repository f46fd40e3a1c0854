#include "dynbc/io.hpp"

#include "dynbc/errors.hpp"

#include <charconv>
#include <ostream>

namespace dynbc {

std::string csv_header(const std::string& config_hash) {
    return std::string("# dynbc ") + kVersion + " config " + config_hash;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw InvalidArgument("cannot format number");
    return std::string(buf, ptr);
}

std::string snapshot_filename(double t) { return "solution_" + format_double(t) + ".vtk"; }

void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<NodalField>& fields, const std::string& title) {
    const int nv = mesh.num_vertices(), nt = mesh.num_triangles();
    for (const auto& f : fields)
        if (static_cast<int>(f.values.size()) != nv)
            throw InvalidArgument("vtk field '" + f.name + "' has " + std::to_string(f.values.size()) +
                                  " values for " + std::to_string(nv) + " vertices");
    const auto old = os.precision(17);
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << nv << " double\n";
    for (const auto& p : mesh.vertices()) os << p.x << ' ' << p.y << " 0\n";
    os << "CELLS " << nt << ' ' << 4 * nt << '\n';
    for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << nt << '\n';
    for (int i = 0; i < nt; ++i) os << "5\n";
    if (!fields.empty()) os << "POINT_DATA " << nv << '\n';
    for (const auto& f : fields) {
        os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : f.values) os << v << '\n';
    }
    os.precision(old);
}

}  // namespace dynbc
