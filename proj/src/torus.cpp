#include "geomld/torus.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace geomld {

double wrap01(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;  // guards x = -eps rounding to 1.0
    return r;
}

void PointSet::append(std::span<const double> x) {
    if (static_cast<int>(x.size()) != dim)
        throw std::invalid_argument("PointSet::append: dimension mismatch");
    for (double c : x) coords.push_back(wrap01(c));
}

void PointSet::append_raw(std::span<const double> x) {
    coords.insert(coords.end(), x.begin(), x.end());
}

double torus_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("torus_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        double d = std::fabs(x[a] - y[a]);
        if (d > 0.5) d = 1.0 - d;
        s += d * d;
    }
    return std::sqrt(s);
}

double torus_distance(const PointSet& ps, std::size_t i, std::size_t j) {
    return torus_distance(ps.point(i), ps.point(j));
}

void torus_displacement(std::span<const double> x, std::span<const double> y,
                        std::span<double> out) {
    for (std::size_t a = 0; a < x.size(); ++a) {
        double d = y[a] - x[a];
        d -= std::round(d);
        if (d >= 0.5) d = -0.5;
        out[a] = d;
    }
}

double diameter(const PointSet& ps, Metric metric) {
    const std::size_t n = ps.size();
    if (n < 2) throw std::invalid_argument("diameter: need at least 2 points");
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d;
            if (metric == Metric::Torus) {
                d = torus_distance(ps, i, j);
            } else {
                double s = 0.0;
                auto pi = ps.point(i);
                auto pj = ps.point(j);
                for (int a = 0; a < ps.dim; ++a) {
                    double c = pi[a] - pj[a];
                    s += c * c;
                }
                d = std::sqrt(s);
            }
            if (d > best) best = d;
        }
    }
    return best;
}

void write_point_set_csv(std::ostream& os, const PointSet& ps) {
    os << "dim=" << ps.dim << "\n";
    char buf[64];
    for (std::size_t i = 0; i < ps.size(); ++i) {
        auto p = ps.point(i);
        for (int a = 0; a < ps.dim; ++a) {
            std::snprintf(buf, sizeof(buf), "%.17g", p[a]);
            os << (a ? "," : "") << buf;
        }
        os << "\n";
    }
}

PointSet read_point_set_csv(std::istream& is) {
    std::string line;
    // tolerate leading metadata comments
    do {
        if (!std::getline(is, line))
            throw std::runtime_error("point set csv: missing header");
    } while (!line.empty() && line[0] == '#');
    if (line.rfind("dim=", 0) != 0)
        throw std::runtime_error("point set csv: header must be dim=<d>");
    const int d = std::stoi(line.substr(4));
    if (d < 1) throw std::runtime_error("point set csv: dim must be positive");
    PointSet ps(d);
    std::vector<double> row(d);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (int a = 0; a < d; ++a) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("point set csv: short row");
            row[a] = std::stod(cell);
        }
        ps.append(row);
    }
    return ps;
}

std::string point_set_to_csv(const PointSet& ps) {
    std::ostringstream os;
    write_point_set_csv(os, ps);
    return os.str();
}

PointSet point_set_from_csv(const std::string& text) {
    std::istringstream is(text);
    return read_point_set_csv(is);
}

}  // namespace geomld
