#include "facecond/error.hpp"
#include "facecond/model.hpp"
#include "facecond/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace facecond {

namespace {

constexpr double kPi = std::numbers::pi;

// Ellipsoid semi-axes (x: half width, y: half height, z: half depth), meters.
constexpr double kAxisX = 0.078;
constexpr double kAxisY = 0.105;
constexpr double kAxisZ = 0.095;

constexpr double kBasisDecay = 0.93;

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * (3.0 - 2.0 * t);
}

// Unit direction for polar angle `polar` (from +y) and azimuth `azimuth`
// (0 faces +z, positive towards +x).
Vec3 direction(double polar, double azimuth) {
  return {std::sin(polar) * std::sin(azimuth), std::cos(polar),
          std::sin(polar) * std::cos(azimuth)};
}

Vec3 random_unit(CounterRng& rng) {
  Vec3 v;
  do {
    v = Vec3(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-6);
  return v.normalized();
}

double nose_profile(const Vec3& d) {
  if (d.z() <= 0.0) return 0.0;
  const double dy = d.y() + 0.05;
  return 0.13 * d.z() * std::exp(-(d.x() * d.x() / 0.012 + dy * dy / 0.03));
}

Vec3 head_surface(const Vec3& d) {
  const double r = 1.0 + nose_profile(d);
  return {kAxisX * d.x() * r, kAxisY * d.y() * r, kAxisZ * d.z() * r};
}

struct Bump {
  Vec3 centre;
  double width;
  Vec3 weight;
};

Vec3 eval_bumps(std::span<const Bump> bumps, const Vec3& d) {
  Vec3 out = Vec3::Zero();
  for (const Bump& b : bumps) {
    const double dist2 = (d - b.centre).squaredNorm();
    out += b.weight * std::exp(-dist2 / (2.0 * b.width * b.width));
  }
  return out;
}

// Rescales column k of a row-major (rows × cols) basis to `norm`.
void normalize_column(std::vector<double>& basis, std::size_t rows, int cols, int k, double norm) {
  double sq = 0.0;
  for (std::size_t r = 0; r < rows; ++r) sq += basis[r * cols + k] * basis[r * cols + k];
  const double s = sq > 0.0 ? norm / std::sqrt(sq) : 0.0;
  for (std::size_t r = 0; r < rows; ++r) basis[r * cols + k] *= s;
}

std::vector<float> to_float(const std::vector<double>& v) {
  return {v.begin(), v.end()};
}

// Smooth per-vertex displacement fields; column norms decay geometrically like
// a PCA basis ordered by variance.
std::vector<double> geometry_basis(CounterRng rng, const std::vector<Vec3>& dirs,
                                   const std::vector<Vec3>& normals, int cols, double base_norm,
                                   bool face_local) {
  const std::size_t v_count = dirs.size();
  std::vector<double> basis(v_count * 3 * cols, 0.0);
  for (int k = 0; k < cols; ++k) {
    CounterRng col_rng = rng.split(static_cast<std::uint64_t>(k));
    std::vector<Bump> bumps(6);
    for (Bump& b : bumps) {
      if (face_local) {
        b.centre = (Vec3(0.0, -0.3, 0.9) + 0.4 * random_unit(col_rng)).normalized();
      } else {
        b.centre = random_unit(col_rng);
      }
      b.width = col_rng.uniform(0.35, 0.8) * (face_local ? 0.6 : 1.0);
      b.weight = Vec3(col_rng.normal(), 0.0, 0.0);
    }
    const Vec3 stretch(col_rng.normal(), col_rng.normal(), col_rng.normal());
    for (std::size_t v = 0; v < v_count; ++v) {
      const Vec3& d = dirs[v];
      const double radial = eval_bumps(bumps, d).x();
      Vec3 disp = radial * normals[v] + 0.3 * stretch.cwiseProduct(d);
      if (face_local) disp *= smoothstep((d.z() + 0.1) / 0.6);
      for (int c = 0; c < 3; ++c) basis[(3 * v + c) * cols + k] = disp[c];
    }
    normalize_column(basis, v_count * 3, cols, k, base_norm * std::pow(kBasisDecay, k));
  }
  return basis;
}

}  // namespace

HeadModelAssets gen_synthetic_assets(std::uint64_t seed, int v_target, int tex_res) {
  if (v_target < 100)
    throw ValidationError(
        fmt::format("v_target {} too small to triangulate a head (minimum 100)", v_target));
  if (tex_res < 32 || (tex_res & (tex_res - 1)) != 0)
    throw ValidationError(
        fmt::format("tex_res {} must be a power of two and at least 32", tex_res));

  const CounterRng root(seed);
  const int rings = std::max(7, static_cast<int>(std::lround(std::sqrt(v_target / 2.0))));
  const int segments = 2 * rings;
  const std::size_t v_count = 2 + static_cast<std::size_t>(rings - 1) * segments;

  auto ring_vertex = [&](int ring, int seg) -> std::uint32_t {
    if (ring == 0) return 0;
    if (ring == rings) return static_cast<std::uint32_t>(v_count - 1);
    return static_cast<std::uint32_t>(1 + (ring - 1) * segments + (seg % segments));
  };
  auto azimuth = [&](int seg) { return 2.0 * kPi * (seg - segments / 2) / segments; };

  // Latitude/longitude directions; segment j and segments - j mirror across x = 0.
  std::vector<Vec3> dirs(v_count);
  dirs[0] = Vec3(0.0, 1.0, 0.0);
  dirs[v_count - 1] = Vec3(0.0, -1.0, 0.0);
  for (int i = 1; i < rings; ++i)
    for (int j = 0; j < segments; ++j)
      dirs[ring_vertex(i, j)] = direction(kPi * i / rings, azimuth(j));

  HeadModelAssets a;
  a.template_vertices.resize(3 * v_count);
  std::vector<Vec3> positions(v_count);
  for (std::size_t v = 0; v < v_count; ++v) {
    positions[v] = head_surface(dirs[v]);
    for (int c = 0; c < 3; ++c) a.template_vertices[3 * v + c] = static_cast<float>(positions[v][c]);
  }

  // Faces, per-corner UVs. u follows the segment index without wrapping (the
  // seam runs down the back of the head), v follows the ring index.
  auto topology = std::make_shared<MeshTopology>();
  auto add_face = [&](std::array<std::pair<int, int>, 3> corners, bool pole_top, bool pole_bottom,
                      int seg) {
    Face f;
    FaceUv uv;
    for (int k = 0; k < 3; ++k) {
      const auto [ring, s] = corners[k];
      f[k] = ring_vertex(ring, s);
      double u = static_cast<double>(s) / segments;
      if ((pole_top && ring == 0) || (pole_bottom && ring == rings)) u = (seg + 0.5) / segments;
      // Single precision, as stored on disk.
      const float uf = static_cast<float>(u);
      const float vf = static_cast<float>(static_cast<double>(ring) / rings);
      uv[k] = Vec2(uf, vf);
    }
    // Orient outwards (counter-clockwise seen from outside).
    const Vec3 n = (positions[f[1]] - positions[f[0]]).cross(positions[f[2]] - positions[f[0]]);
    const Vec3 centroid = positions[f[0]] + positions[f[1]] + positions[f[2]];
    if (n.dot(centroid) < 0.0) {
      std::swap(f[1], f[2]);
      std::swap(uv[1], uv[2]);
    }
    topology->faces.push_back(f);
    topology->uvs.push_back(uv);
  };
  for (int j = 0; j < segments; ++j) {
    add_face({{{0, j}, {1, j}, {1, j + 1}}}, true, false, j);
    for (int i = 1; i < rings - 1; ++i) {
      add_face({{{i, j}, {i + 1, j}, {i + 1, j + 1}}}, false, false, j);
      add_face({{{i, j}, {i + 1, j + 1}, {i, j + 1}}}, false, false, j);
    }
    add_face({{{rings - 1, j}, {rings, j}, {rings - 1, j + 1}}}, false, true, j);
  }
  a.topology = topology;

  // Outward ellipsoid normals drive the displacement direction of the bases.
  std::vector<Vec3> normals(v_count);
  for (std::size_t v = 0; v < v_count; ++v) {
    const Vec3& d = dirs[v];
    normals[v] = Vec3(d.x() / kAxisX, d.y() / kAxisY, d.z() / kAxisZ).normalized();
  }
  const double sqrt_v = std::sqrt(static_cast<double>(v_count));
  a.shape_basis = to_float(geometry_basis(root.split(1), dirs, normals, kShapeDims, 0.01 * sqrt_v, false));
  a.expression_basis =
      to_float(geometry_basis(root.split(2), dirs, normals, kExpressionDims, 0.006 * sqrt_v, true));

  // Jaw hinge sits below eye level, towards the back; weights ramp from 0 at
  // the hinge plane to 1 at the chin, restricted to the front half.
  const Vec3 joint(0.0, -0.15 * kAxisY, -0.25 * kAxisZ);
  for (int c = 0; c < 3; ++c) a.jaw_joint[c] = static_cast<float>(joint[c]);
  a.jaw_weights.resize(v_count);
  for (std::size_t v = 0; v < v_count; ++v) {
    const Vec3& p = positions[v];
    const double below = smoothstep((joint.y() - p.y()) / (0.45 * kAxisY));
    const double front = smoothstep((p.z() + 0.2 * kAxisZ) / (0.6 * kAxisZ));
    a.jaw_weights[v] = static_cast<float>(below * front);
  }

  const int eye_ring = static_cast<int>(std::lround(0.43 * rings));
  const int eye_offset =
      std::max(1, static_cast<int>(std::lround(0.42 * segments / (2.0 * kPi))));
  a.eye_vertex_ids = {ring_vertex(eye_ring, segments / 2 + eye_offset),
                      ring_vertex(eye_ring, segments / 2 - eye_offset)};

  // Albedo lives in UV space; each texel maps back to a direction on the head
  // so colour features stay attached to anatomy.
  a.tex_res = tex_res;
  const std::size_t texels = static_cast<std::size_t>(tex_res) * tex_res;
  std::vector<Vec3> texel_dirs(texels);
  for (int r = 0; r < tex_res; ++r)
    for (int c = 0; c < tex_res; ++c) {
      const double u = (c + 0.5) / tex_res;
      const double v = (r + 0.5) / tex_res;
      texel_dirs[static_cast<std::size_t>(r) * tex_res + c] = direction(kPi * v, 2.0 * kPi * (u - 0.5));
    }

  CounterRng tone_rng = root.split(3);
  const Vec3 skin = Vec3(0.80, 0.60, 0.50) +
                    0.04 * Vec3(tone_rng.normal(), tone_rng.normal(), tone_rng.normal());
  const Vec3 eye_l = dirs[a.eye_vertex_ids[0]];
  const Vec3 eye_r = dirs[a.eye_vertex_ids[1]];
  std::vector<Bump> features = {
      {Vec3(0.45, -0.12, 0.88).normalized(), 0.16, Vec3(0.05, -0.03, -0.03)},
      {Vec3(-0.45, -0.12, 0.88).normalized(), 0.16, Vec3(0.05, -0.03, -0.03)},
      {Vec3(0.0, -0.45, 0.89).normalized(), 0.07, Vec3(-0.08, -0.22, -0.16)},
      {(eye_l + Vec3(0.0, 0.12, 0.0)).normalized(), 0.06, Vec3(-0.25, -0.25, -0.22)},
      {(eye_r + Vec3(0.0, 0.12, 0.0)).normalized(), 0.06, Vec3(-0.25, -0.25, -0.22)},
      {eye_l, 0.05, Vec3(-0.12, -0.08, -0.05)},
      {eye_r, 0.05, Vec3(-0.12, -0.08, -0.05)},
  };
  for (int i = 0; i < 4; ++i)
    features.push_back({random_unit(tone_rng), tone_rng.uniform(0.3, 0.6),
                        0.03 * Vec3(tone_rng.normal(), tone_rng.normal(), tone_rng.normal())});
  a.albedo_mean.resize(texels * 3);
  for (std::size_t t = 0; t < texels; ++t) {
    const Vec3 colour = skin + eval_bumps(features, texel_dirs[t]);
    for (int c = 0; c < 3; ++c)
      a.albedo_mean[3 * t + c] = static_cast<float>(std::clamp(colour[c], 0.0, 1.0));
  }

  std::vector<double> albedo_basis(texels * 3 * kAppearanceDims, 0.0);
  CounterRng app_rng = root.split(4);
  for (int k = 0; k < kAppearanceDims; ++k) {
    CounterRng col_rng = app_rng.split(static_cast<std::uint64_t>(k));
    std::vector<Bump> bumps(5);
    for (Bump& b : bumps) {
      b.centre = random_unit(col_rng);
      b.width = col_rng.uniform(0.3, 0.7);
      // Mostly along the skin-tone direction, with some chroma variation.
      b.weight = col_rng.normal() * skin.normalized() +
                 0.3 * Vec3(col_rng.normal(), col_rng.normal(), col_rng.normal());
    }
    for (std::size_t t = 0; t < texels; ++t) {
      const Vec3 d = eval_bumps(bumps, texel_dirs[t]);
      for (int c = 0; c < 3; ++c) albedo_basis[(3 * t + c) * kAppearanceDims + k] = d[c];
    }
    normalize_column(albedo_basis, texels * 3, kAppearanceDims, k,
                     0.05 * std::sqrt(3.0 * texels) * std::pow(kBasisDecay, k));
  }
  a.albedo_basis = to_float(albedo_basis);

  a.validate();
  return a;
}

}  // namespace facecond
