#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "tanfem/errors.hpp"

namespace tanfem {

// Triangulation: straight-edged triangles, order 1 (3 nodes) or 2 (6 nodes,
// vertices then edge midpoints mid01, mid12, mid20). Boundary sets are named
// node sets.
struct Mesh {
  int order = 1;
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::vector<int>> elements;
  std::map<std::string, std::vector<int>> boundary_sets;

  int nen() const { return order == 1 ? 3 : 6; }
  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }

  // Signed doubled area from the three vertices.
  double orientation(int e) const;
  // Index ranges, element sizes, positive orientation, midpoint consistency.
  void validate() const;
  // Copies the coordinates of element e into out (nen pairs).
  void element_coords(int e, std::vector<double>& out) const;
};

// Unit-height channel [0, nx/ny] x [0, 1], nx*ny cells split into 2 triangles
// each with a uniform diagonal direction. Boundary sets: inflow (x = 0),
// outflow (x = L), wall_bottom (y = 0), wall_top (y = 1); corners belong to
// both adjacent sets.
Mesh generate_rect_mesh(int nx, int ny, int order);

}  // namespace tanfem
