#pragma once

#include "dynbc/mesh.hpp"

#include <array>
#include <span>

namespace dynbc::quadrature {

/// Point in barycentric coordinates with a weight relative to the element area.
struct TrianglePoint {
    std::array<double, 3> bary;
    double weight;
};

/// Edge point as the parameter s in [0,1] (s=0 at the first vertex) with a
/// weight relative to the edge length.
struct EdgePoint {
    double s;
    double weight;
};

/// Edge-midpoint rule, exact for polynomials of degree 2.
inline constexpr std::array<TrianglePoint, 3> kTriangleMidpoints{{
    {{0.5, 0.5, 0.0}, 1.0 / 3.0},
    {{0.0, 0.5, 0.5}, 1.0 / 3.0},
    {{0.5, 0.0, 0.5}, 1.0 / 3.0},
}};

/// Six-point symmetric rule, exact for polynomials of degree 4.
inline constexpr double kA1 = 0.445948490915964886;
inline constexpr double kW1 = 0.223381589678011466;
inline constexpr double kA2 = 0.091576213509770743;
inline constexpr double kW2 = 0.109951743655321868;
inline constexpr std::array<TrianglePoint, 6> kTriangleDegree4{{
    {{kA1, kA1, 1.0 - 2.0 * kA1}, kW1},
    {{kA1, 1.0 - 2.0 * kA1, kA1}, kW1},
    {{1.0 - 2.0 * kA1, kA1, kA1}, kW1},
    {{kA2, kA2, 1.0 - 2.0 * kA2}, kW2},
    {{kA2, 1.0 - 2.0 * kA2, kA2}, kW2},
    {{1.0 - 2.0 * kA2, kA2, kA2}, kW2},
}};

/// Two-point Gauss rule (degree 3).
inline constexpr double kGauss2Offset = 0.211324865405187118;  // (1 - 1/sqrt(3))/2
inline constexpr std::array<EdgePoint, 2> kGauss2{{
    {kGauss2Offset, 0.5},
    {1.0 - kGauss2Offset, 0.5},
}};

/// Three-point Gauss rule (degree 5).
inline constexpr double kGauss3Offset = 0.112701665379258311;  // (1 - sqrt(3/5))/2
inline constexpr std::array<EdgePoint, 3> kGauss3{{
    {kGauss3Offset, 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {1.0 - kGauss3Offset, 5.0 / 18.0},
}};

inline Point map(const std::array<Point, 3>& v, const std::array<double, 3>& bary) {
    return {bary[0] * v[0].x + bary[1] * v[1].x + bary[2] * v[2].x,
            bary[0] * v[0].y + bary[1] * v[1].y + bary[2] * v[2].y};
}

inline Point map(Point a, Point b, double s) { return {(1.0 - s) * a.x + s * b.x, (1.0 - s) * a.y + s * b.y}; }

/// Gradients of the three barycentric coordinates (constant on the triangle).
inline std::array<Point, 3> barycentric_gradients(const std::array<Point, 3>& v, double area) {
    const double inv = 1.0 / (2.0 * area);
    return {{{(v[1].y - v[2].y) * inv, (v[2].x - v[1].x) * inv},
             {(v[2].y - v[0].y) * inv, (v[0].x - v[2].x) * inv},
             {(v[0].y - v[1].y) * inv, (v[1].x - v[0].x) * inv}}};
}

}  // namespace dynbc::quadrature
