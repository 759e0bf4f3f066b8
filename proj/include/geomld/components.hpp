#pragma once

#include <cstdint>
#include <vector>

#include "geomld/torus.hpp"

namespace geomld {

class UnionFind {
  public:
    explicit UnionFind(std::size_t n);
    std::uint32_t find(std::uint32_t x);
    void unite(std::uint32_t a, std::uint32_t b);
    std::size_t component_count() const { return components_; }

  private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
    std::size_t components_;
};

// Connected components of the geometric graph with edges at torus distance
// <= r (closed). Each inner vector lists point indices ascending; components
// ordered by smallest member.
std::vector<std::vector<std::uint32_t>> connected_components(const PointSet& ps,
                                                             double r);

}  // namespace geomld
