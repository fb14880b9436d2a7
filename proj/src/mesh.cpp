#include "tanfem/mesh.hpp"

#include <cmath>
#include <string>

namespace tanfem {

double Mesh::orientation(int e) const {
  const auto& el = elements[e];
  const auto& a = nodes[el[0]];
  const auto& b = nodes[el[1]];
  const auto& c = nodes[el[2]];
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

void Mesh::validate() const {
  const int n = num_nodes();
  const int want = nen();
  for (int e = 0; e < num_elements(); ++e) {
    const auto& el = elements[e];
    if (static_cast<int>(el.size()) != want)
      raise(ErrorCode::invalid_mesh, "element " + std::to_string(e) + " has " +
                                         std::to_string(el.size()) +
                                         " nodes, expected " + std::to_string(want));
    for (int id : el)
      if (id < 0 || id >= n)
        raise(ErrorCode::invalid_mesh,
              "element " + std::to_string(e) + " references node " +
                  std::to_string(id) + " outside [0," + std::to_string(n) + ")");
    if (orientation(e) <= 0)
      raise(ErrorCode::invalid_mesh,
            "element " + std::to_string(e) + " is not positively oriented");
    if (order == 2) {
      static const int edge[3][2] = {{0, 1}, {1, 2}, {2, 0}};
      for (int k = 0; k < 3; ++k) {
        const auto& a = nodes[el[edge[k][0]]];
        const auto& b = nodes[el[edge[k][1]]];
        const auto& m = nodes[el[3 + k]];
        const double ex = 0.5 * (a[0] + b[0]) - m[0];
        const double ey = 0.5 * (a[1] + b[1]) - m[1];
        if (std::abs(ex) > 1e-10 || std::abs(ey) > 1e-10)
          raise(ErrorCode::invalid_mesh,
                "element " + std::to_string(e) + " midpoint " + std::to_string(k) +
                    " is not the edge midpoint");
      }
    }
  }
  for (const auto& [name, set] : boundary_sets)
    for (int id : set)
      if (id < 0 || id >= n)
        raise(ErrorCode::invalid_mesh,
              "boundary set '" + name + "' references node " + std::to_string(id));
}

void Mesh::element_coords(int e, std::vector<double>& out) const {
  const auto& el = elements[e];
  out.resize(el.size() * 2);
  for (std::size_t i = 0; i < el.size(); ++i) {
    out[2 * i] = nodes[el[i]][0];
    out[2 * i + 1] = nodes[el[i]][1];
  }
}

Mesh generate_rect_mesh(int nx, int ny, int order) {
  if (nx < 2 || ny < 2)
    raise(ErrorCode::invalid_argument, "generated mesh sizes must be >= 2x2");
  if (order != 1 && order != 2)
    raise(ErrorCode::invalid_argument, "mesh order must be 1 or 2");

  Mesh m;
  m.order = order;
  const int vx = nx + 1;
  m.nodes.reserve(static_cast<std::size_t>(vx) * (ny + 1));
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix)
      m.nodes.push_back({static_cast<double>(ix) / ny, static_cast<double>(iy) / ny});

  auto vid = [vx](int ix, int iy) { return iy * vx + ix; };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int v00 = vid(ix, iy), v10 = vid(ix + 1, iy);
      const int v01 = vid(ix, iy + 1), v11 = vid(ix + 1, iy + 1);
      m.elements.push_back({v00, v10, v11});
      m.elements.push_back({v00, v11, v01});
    }
  }

  auto& inflow = m.boundary_sets["inflow"];
  auto& outflow = m.boundary_sets["outflow"];
  auto& bottom = m.boundary_sets["wall_bottom"];
  auto& top = m.boundary_sets["wall_top"];
  for (int iy = 0; iy <= ny; ++iy) {
    inflow.push_back(vid(0, iy));
    outflow.push_back(vid(nx, iy));
  }
  for (int ix = 0; ix <= nx; ++ix) {
    bottom.push_back(vid(ix, 0));
    top.push_back(vid(ix, ny));
  }

  if (order == 2) {
    std::map<std::pair<int, int>, int> edge_node;
    auto midpoint = [&](int a, int b) {
      const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      auto it = edge_node.find(key);
      if (it != edge_node.end()) return it->second;
      const int id = m.num_nodes();
      m.nodes.push_back({0.5 * (m.nodes[a][0] + m.nodes[b][0]),
                         0.5 * (m.nodes[a][1] + m.nodes[b][1])});
      edge_node.emplace(key, id);
      return id;
    };
    for (auto& el : m.elements) {
      const int m01 = midpoint(el[0], el[1]);
      const int m12 = midpoint(el[1], el[2]);
      const int m20 = midpoint(el[2], el[0]);
      el.insert(el.end(), {m01, m12, m20});
    }
    // a midside node joins every set both its endpoints belong to
    for (auto& [name, set] : m.boundary_sets) {
      std::vector<bool> member(m.num_nodes(), false);
      for (int id : set) member[id] = true;
      for (const auto& [key, id] : edge_node)
        if (member[key.first] && member[key.second]) set.push_back(id);
    }
  }
  return m;
}

}  // namespace tanfem
