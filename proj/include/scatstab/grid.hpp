#pragma once

// Regular centered grids on R^d (d = 1 or 2) with isotropic spacing.
// Extents are powers of two so radix-2 FFTs and integer sub-sampling
// chains work without padding.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace scatstab {

using Coord = std::array<double, 2>;  // coord[1] unused when dim == 1

inline bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

// (1 + |x|^2)^{1/2}; >= 1 for every x.
inline double japanese_bracket(std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return std::sqrt(1.0 + r2);
}

inline double japanese_bracket(const Coord& x, int dim) {
    return japanese_bracket(std::span<const double>(x.data(), static_cast<std::size_t>(dim)));
}

struct Grid {
    int dim = 1;                            // 1 or 2
    std::array<std::size_t, 2> extent{2, 1};  // extent[1] == 1 when dim == 1
    double spacing = 1.0;

    Grid() = default;

    Grid(int dim_, std::array<std::size_t, 2> extent_, double spacing_)
        : dim(dim_), extent(extent_), spacing(spacing_) {
        if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
        if (dim == 1) extent[1] = 1;
        for (int a = 0; a < dim; ++a) {
            if (extent[static_cast<std::size_t>(a)] < 2 || !is_power_of_two(extent[static_cast<std::size_t>(a)]))
                throw std::invalid_argument("Grid: extent must be a power of two >= 2");
        }
        if (!(spacing > 0.0)) throw std::invalid_argument("Grid: spacing must be positive");
    }

    static Grid line(std::size_t n, double spacing) { return Grid(1, {n, 1}, spacing); }
    static Grid plane(std::size_t n0, std::size_t n1, double spacing) { return Grid(2, {n0, n1}, spacing); }

    std::size_t size() const { return extent[0] * extent[1]; }

    // Lowest physical coordinate along an axis; the grid covers
    // [-extent*spacing/2, extent*spacing/2) and index extent/2 sits at 0.
    double origin(int axis) const {
        return -static_cast<double>(extent[static_cast<std::size_t>(axis)] / 2) * spacing;
    }

    double coord(int axis, std::size_t i) const { return origin(axis) + static_cast<double>(i) * spacing; }

    Coord point(std::size_t i0, std::size_t i1 = 0) const {
        return {coord(0, i0), dim == 2 ? coord(1, i1) : 0.0};
    }

    std::size_t index(std::size_t i0, std::size_t i1 = 0) const { return i0 * extent[1] + i1; }

    // Half-width of the domain along an axis.
    double half_width(int axis) const {
        return static_cast<double>(extent[static_cast<std::size_t>(axis)]) * spacing * 0.5;
    }

    // Quadrature weight of one cell.
    double cell_volume() const { return dim == 2 ? spacing * spacing : spacing; }

    bool operator==(const Grid& o) const {
        return dim == o.dim && extent == o.extent && spacing == o.spacing;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    std::string describe() const {
        std::string s = std::to_string(extent[0]);
        if (dim == 2) s += "x" + std::to_string(extent[1]);
        return s + " @ dx=" + std::to_string(spacing);
    }
};

}  // namespace scatstab
