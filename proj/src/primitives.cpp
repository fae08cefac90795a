#include "facecond/primitives.hpp"

#include <cmath>
#include <map>

namespace facecond {

Mesh make_icosphere(int subdivisions, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : verts) v.normalize();
  std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const auto idx = static_cast<std::uint32_t>(verts.size() - 1);
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const std::uint32_t ab = midpoint(f[0], f[1]);
      const std::uint32_t bc = midpoint(f[1], f[2]);
      const std::uint32_t ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  auto topology = std::make_shared<MeshTopology>();
  topology->faces = faces;
  const auto cells = static_cast<int>(std::ceil(std::sqrt(faces.size() / 2.0)));
  const double cell = 1.0 / cells;
  topology->uvs.resize(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const std::size_t c = i / 2;
    const double u0 = static_cast<double>(c % cells) * cell;
    const double v0 = static_cast<double>(c / cells) * cell;
    if (i % 2 == 0) {
      topology->uvs[i] = {Vec2(u0, v0), Vec2(u0 + cell, v0), Vec2(u0, v0 + cell)};
    } else {
      topology->uvs[i] = {Vec2(u0 + cell, v0 + cell), Vec2(u0, v0 + cell), Vec2(u0 + cell, v0)};
    }
  }

  Mesh mesh;
  mesh.topology = std::move(topology);
  mesh.vertices.reserve(verts.size());
  for (const Vec3& v : verts) mesh.vertices.push_back(radius * v);
  return mesh;
}

Mesh make_cube(double h) {
  Mesh mesh;
  mesh.vertices = {{-h, -h, -h}, {h, -h, -h}, {h, h, -h}, {-h, h, -h},
                   {-h, -h, h},  {h, -h, h},  {h, h, h},  {-h, h, h}};
  auto topology = std::make_shared<MeshTopology>();
  topology->faces = {{0, 3, 2}, {0, 2, 1}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                     {3, 7, 6}, {3, 6, 2}, {0, 4, 7}, {0, 7, 3}, {1, 2, 6}, {1, 6, 5}};
  mesh.topology = std::move(topology);
  return mesh;
}

Mesh make_quad(double x0, double y0, double x1, double y1, double depth) {
  Mesh mesh;
  // 0: top-left, 1: top-right, 2: bottom-right, 3: bottom-left (y up).
  mesh.vertices = {{x0, y1, depth}, {x1, y1, depth}, {x1, y0, depth}, {x0, y0, depth}};
  auto topology = std::make_shared<MeshTopology>();
  topology->faces = {{0, 3, 2}, {0, 2, 1}};
  const Vec2 tl(0, 0), tr(1, 0), br(1, 1), bl(0, 1);
  topology->uvs = {{tl, bl, br}, {tl, br, tr}};
  mesh.topology = std::move(topology);
  return mesh;
}

}  // namespace facecond
