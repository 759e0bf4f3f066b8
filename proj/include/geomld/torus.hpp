#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace geomld {

// Canonical coordinate on the unit torus: representative in [0,1).
double wrap01(double x);

// Finite configuration on the d-dimensional unit torus, stored flat.
// Coordinates are canonicalized into [0,1) on insertion so point equality
// is well defined.
struct PointSet {
    int dim = 1;
    std::vector<double> coords;

    explicit PointSet(int d = 1) : dim(d) {}

    std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
    bool empty() const { return coords.empty(); }

    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
    }

    void append(std::span<const double> x);
    void append_raw(std::span<const double> x);  // caller guarantees [0,1)
};

// min over integer translates of the Euclidean distance; range [0, sqrt(d)/2]
double torus_distance(std::span<const double> x, std::span<const double> y);
double torus_distance(const PointSet& ps, std::size_t i, std::size_t j);

// Per-axis displacement y - x mapped to [-1/2, 1/2).
void torus_displacement(std::span<const double> x, std::span<const double> y,
                        std::span<double> out);

enum class Metric { Torus, EuclideanRepresentative };

// Max pairwise distance. Throws for fewer than 2 points.
double diameter(const PointSet& ps, Metric metric = Metric::Torus);

// CSV: first row "dim=d", then one row per point, 17 significant digits.
void write_point_set_csv(std::ostream& os, const PointSet& ps);
PointSet read_point_set_csv(std::istream& is);
std::string point_set_to_csv(const PointSet& ps);
PointSet point_set_from_csv(const std::string& text);

}  // namespace geomld
