#include "facecond/error.hpp"
#include "facecond/model.hpp"
#include "facecond/primitives.hpp"
#include "facecond/rng.hpp"

#include <doctest.h>
#include <Eigen/Geometry>

#include <bit>
#include <cmath>
#include <map>
#include <numbers>

using namespace facecond;

namespace {

const HeadModelAssets& small_assets() {
  static const HeadModelAssets assets = gen_synthetic_assets(7, 1000, 64);
  return assets;
}

FlameParams random_params(CounterRng& rng, bool pose) {
  FlameParams p;
  for (double& b : p.beta) b = rng.normal();
  for (double& e : p.psi) e = rng.normal();
  if (pose)
    for (double& t : p.theta) t = rng.uniform(-0.6, 0.6);
  return p;
}

double column_norm(const std::vector<float>& basis, std::size_t rows, int cols, int k) {
  double sq = 0.0;
  for (std::size_t r = 0; r < rows; ++r) sq += double(basis[r * cols + k]) * basis[r * cols + k];
  return std::sqrt(sq);
}

std::size_t jaw_weights_offset(const HeadModelAssets& a) {
  const std::size_t v = a.num_vertices(), f = a.num_faces();
  std::size_t off = 8;                       // magic + version
  off += 4 + 8 + v * 3 * 4;                  // template_vertices
  off += 4 + 8 + f * 3 * 4;                  // faces
  off += 4 + 12 + v * 3 * kShapeDims * 4;    // shape_basis
  off += 4 + 12 + v * 3 * kExpressionDims * 4;  // expression_basis
  return off + 4 + 4;                        // jaw_weights rank + dim
}

}  // namespace

TEST_CASE("synthetic assets are deterministic in the seed") {
  const HeadModelAssets a = gen_synthetic_assets(7, 1000, 64);
  const HeadModelAssets b = gen_synthetic_assets(7, 1000, 64);
  CHECK(a == b);
  CHECK(serialize_assets(a) == serialize_assets(b));
  const HeadModelAssets c = gen_synthetic_assets(8, 1000, 64);
  CHECK_FALSE(a == c);
}

TEST_CASE("synthetic template is a closed triangulation near the target size") {
  const HeadModelAssets& a = small_assets();
  CHECK(a.num_vertices() > 800);
  CHECK(a.num_vertices() < 1200);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const Face& f : a.topology->faces)
    for (int k = 0; k < 3; ++k) ++edges[std::minmax(f[k], f[(k + 1) % 3])];
  for (const auto& [edge, uses] : edges) CHECK(uses == 2);
  CHECK(a.num_vertices() - edges.size() + a.num_faces() == 2);  // Euler characteristic
}

TEST_CASE("basis column norms decay monotonically") {
  const HeadModelAssets& a = small_assets();
  const std::size_t rows = a.num_vertices() * 3;
  for (int k = 0; k + 1 < kShapeDims; ++k)
    CHECK(column_norm(a.shape_basis, rows, kShapeDims, k + 1) <=
          column_norm(a.shape_basis, rows, kShapeDims, k));
  for (int k = 0; k + 1 < kExpressionDims; ++k)
    CHECK(column_norm(a.expression_basis, rows, kExpressionDims, k + 1) <=
          column_norm(a.expression_basis, rows, kExpressionDims, k));
  const std::size_t texel_rows = std::size_t(a.tex_res) * a.tex_res * 3;
  for (int k = 0; k + 1 < kAppearanceDims; ++k)
    CHECK(column_norm(a.albedo_basis, texel_rows, kAppearanceDims, k + 1) <=
          column_norm(a.albedo_basis, texel_rows, kAppearanceDims, k));
}

TEST_CASE("eye vertices mirror across x = 0 and sit on the front") {
  for (int v_target : {100, 1000, 5023}) {
    const HeadModelAssets a = gen_synthetic_assets(3, v_target, 32);
    const Vec3 l = a.template_vertex(a.eye_vertex_ids[0]);
    const Vec3 r = a.template_vertex(a.eye_vertex_ids[1]);
    CHECK(std::abs(l.x() + r.x()) <= 1e-6);
    CHECK(std::abs(l.y() - r.y()) <= 1e-6);
    CHECK(std::abs(l.z() - r.z()) <= 1e-6);
    CHECK(l.x() > 0.0);
    CHECK(l.z() > 0.0);
  }
}

TEST_CASE("jaw weights are zero above the jaw joint") {
  const HeadModelAssets& a = small_assets();
  bool any_full = false;
  for (std::size_t v = 0; v < a.num_vertices(); ++v) {
    if (a.template_vertex(v).y() >= a.jaw_joint[1]) CHECK(a.jaw_weights[v] == 0.0f);
    any_full |= a.jaw_weights[v] > 0.99f;
  }
  CHECK(any_full);
}

TEST_CASE("gen_synthetic_assets rejects degenerate requests") {
  CHECK_THROWS_AS(gen_synthetic_assets(1, 99, 64), ValidationError);
  CHECK_THROWS_AS(gen_synthetic_assets(1, 1000, 48), ValidationError);
  CHECK_THROWS_AS(gen_synthetic_assets(1, 1000, 16), ValidationError);
}

TEST_CASE("asset files round-trip exactly") {
  const HeadModelAssets& a = small_assets();
  const auto bytes = serialize_assets(a);
  const HeadModelAssets b = deserialize_assets(bytes);
  CHECK(a == b);
  CHECK(serialize_assets(b) == bytes);
}

TEST_CASE("asset loading reports the offending field") {
  const HeadModelAssets& a = small_assets();
  auto bytes = serialize_assets(a);

  SUBCASE("out-of-range jaw weight") {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(1.5f);
    const std::size_t off = jaw_weights_offset(a);
    for (int i = 0; i < 4; ++i) bytes[off + i] = static_cast<std::uint8_t>(bits >> (8 * i));
    try {
      deserialize_assets(bytes);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("jaw_weights") != std::string::npos);
    }
  }
  SUBCASE("non-finite template value") {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(std::nanf(""));
    for (int i = 0; i < 4; ++i) bytes[8 + 12 + i] = static_cast<std::uint8_t>(bits >> (8 * i));
    try {
      deserialize_assets(bytes);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("template_vertices") != std::string::npos);
    }
  }
  SUBCASE("truncated file") {
    bytes.resize(bytes.size() / 2);
    CHECK_THROWS_AS(deserialize_assets(bytes), FormatError);
  }
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(deserialize_assets(bytes), FormatError);
  }
  SUBCASE("header only") {
    bytes.resize(6);
    CHECK_THROWS_AS(deserialize_assets(bytes), FormatError);
  }
  SUBCASE("trailing garbage") {
    bytes.push_back(0);
    CHECK_THROWS_AS(deserialize_assets(bytes), FormatError);
  }
}

TEST_CASE("zero parameters reproduce the template exactly") {
  const HeadModelAssets& a = small_assets();
  const Mesh m = evaluate(a, FlameParams{});
  REQUIRE(m.num_vertices() == a.num_vertices());
  for (std::size_t v = 0; v < m.num_vertices(); ++v) CHECK(m.vertices[v] == a.template_vertex(v));
}

TEST_CASE("blendshapes superpose when the pose is zero") {
  const HeadModelAssets& a = small_assets();
  CounterRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const FlameParams p1 = random_params(rng, false);
    const FlameParams p2 = random_params(rng, false);
    FlameParams sum;
    for (int k = 0; k < kShapeDims; ++k) sum.beta[k] = p1.beta[k] + p2.beta[k];
    for (int k = 0; k < kExpressionDims; ++k) sum.psi[k] = p1.psi[k] + p2.psi[k];
    const Mesh m1 = evaluate(a, p1), m2 = evaluate(a, p2), ms = evaluate(a, sum);
    double max_err = 0.0, max_mag = 0.0;
    for (std::size_t v = 0; v < ms.num_vertices(); ++v) {
      const Vec3 t = a.template_vertex(v);
      const Vec3 lhs = ms.vertices[v] - t;
      const Vec3 rhs = (m1.vertices[v] - t) + (m2.vertices[v] - t);
      max_err = std::max(max_err, (lhs - rhs).cwiseAbs().maxCoeff());
      max_mag = std::max(max_mag, rhs.cwiseAbs().maxCoeff());
    }
    CHECK(max_err <= 1e-9 * max_mag);
  }
}

TEST_CASE("a half turn about y maps (x, y, z) to (-x, y, -z)") {
  const HeadModelAssets& a = small_assets();
  FlameParams p;
  p.theta[1] = std::numbers::pi;
  const Mesh m = evaluate(a, p);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const Vec3 t = a.template_vertex(v);
    CHECK((m.vertices[v] - Vec3(-t.x(), t.y(), -t.z())).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("global rotation is rigid and jaw rotation is local") {
  const HeadModelAssets& a = small_assets();
  CounterRng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    FlameParams p = random_params(rng, false);
    const Mesh rest = evaluate(a, p);

    FlameParams rotated = p;
    for (int k = 0; k < 3; ++k) rotated.theta[k] = rng.uniform(-3.0, 3.0);
    const Mesh moved = evaluate(a, rotated);
    for (std::size_t i = 0; i < rest.num_vertices(); i += 7)
      for (std::size_t j = i + 1; j < rest.num_vertices(); j += 13) {
        const double d0 = (rest.vertices[i] - rest.vertices[j]).norm();
        const double d1 = (moved.vertices[i] - moved.vertices[j]).norm();
        CHECK(std::abs(d0 - d1) <= 1e-9 * d0);
      }

    FlameParams jaw = p;
    for (int k = 3; k < 6; ++k) jaw.theta[k] = rng.uniform(-0.5, 0.5);
    const Mesh opened = evaluate(a, jaw);
    std::size_t moved_count = 0;
    for (std::size_t v = 0; v < rest.num_vertices(); ++v) {
      if (a.jaw_weights[v] == 0.0f) CHECK(opened.vertices[v] == rest.vertices[v]);
      moved_count += opened.vertices[v] != rest.vertices[v];
    }
    CHECK(moved_count > 0);
  }
}

TEST_CASE("evaluate is deterministic and evaluate_vertices agrees with it") {
  const HeadModelAssets& a = small_assets();
  CounterRng rng(9);
  const FlameParams p = random_params(rng, true);
  const Mesh m1 = evaluate(a, p), m2 = evaluate(a, p);
  CHECK(m1.vertices == m2.vertices);
  const std::vector<std::uint32_t> ids = {0, 17, a.eye_vertex_ids[0], a.eye_vertex_ids[1]};
  const auto subset = evaluate_vertices(a, p, ids);
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(subset[i] == m1.vertices[ids[i]]);
  const std::vector<std::uint32_t> bad = {static_cast<std::uint32_t>(a.num_vertices())};
  CHECK_THROWS_AS(evaluate_vertices(a, p, bad), ValidationError);
}

TEST_CASE("rotation_from_axis_angle") {
  CHECK(rotation_from_axis_angle(Vec3::Zero()) == Mat3::Identity());
  const Mat3 r = rotation_from_axis_angle(Vec3(0, 0, std::numbers::pi / 2));
  CHECK((r * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() < 1e-15);
}

TEST_CASE("cube corner normals are the normalized sum of the three side normals") {
  const Mesh cube = make_cube(0.5);
  const auto normals = vertex_normals(cube);
  for (std::size_t v = 0; v < cube.num_vertices(); ++v) {
    const Vec3& p = cube.vertices[v];
    // Side normals at a corner are the signed axes; their sum is sign(p).
    const Vec3 expected = Vec3(p.x() > 0 ? 1 : -1, p.y() > 0 ? 1 : -1, p.z() > 0 ? 1 : -1) /
                          std::sqrt(3.0);
    CHECK((normals[v] - expected).norm() < 1e-12);
  }
}

TEST_CASE("icosphere vertex normals follow the radial direction") {
  const Mesh sphere = make_icosphere(3);
  const auto normals = vertex_normals(sphere);
  const double max_angle = std::numbers::pi / 180.0;
  for (std::size_t v = 0; v < sphere.num_vertices(); ++v) {
    CHECK(std::abs(normals[v].norm() - 1.0) <= 1e-6);
    const double c = std::clamp(normals[v].dot(sphere.vertices[v].normalized()), -1.0, 1.0);
    CHECK(std::acos(c) < max_angle);
  }
}

TEST_CASE("vertex normals rotate with the mesh") {
  const HeadModelAssets& a = small_assets();
  CounterRng rng(21);
  FlameParams p = random_params(rng, false);
  const Mesh rest = evaluate(a, p);
  for (int k = 0; k < 3; ++k) p.theta[k] = rng.uniform(-2.0, 2.0);
  const Mesh moved = evaluate(a, p);
  const Mat3 r = rotation_from_axis_angle(p.global_rotation());
  const auto n0 = vertex_normals(rest), n1 = vertex_normals(moved);
  for (std::size_t v = 0; v < n0.size(); ++v) CHECK((n1[v] - r * n0[v]).norm() <= 1e-6);
}

TEST_CASE("degenerate faces are skipped in normal accumulation") {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}, {5, 5, 5}, {5, 5, 5}};
  auto topo = std::make_shared<MeshTopology>();
  topo->faces = {{0, 1, 2}, {3, 4, 5}};
  m.topology = topo;
  const auto n = vertex_normals(m);
  CHECK((n[0] - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK(n[3] == Vec3(0, 0, 1));
  CHECK(n[5] == Vec3(0, 0, 1));
}
