// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here.

#include "facecond/camera.hpp"
#include "facecond/dataset.hpp"
#include "facecond/error.hpp"
#include "facecond/formats.hpp"
#include "facecond/model.hpp"
#include "facecond/params.hpp"
#include "facecond/primitives.hpp"
#include "facecond/raster.hpp"
#include "facecond/rng.hpp"
#include "facecond/shading.hpp"
#include "facecond/texsteal.hpp"

#include "oracles.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <string>

using namespace facecond;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Rasterizer against the brute-force per-pixel oracle.
Outcome raster_oracle() {
  constexpr int kMeshes = 100, kMaxTriangles = 200, kRes = 64;
  constexpr double kBudgetSeconds = 60.0;
  const auto t0 = Clock::now();
  const CameraParams cam{64.0, 32.0, 32.0};
  std::size_t mismatches = 0, covered = 0;
  for (int seed = 0; seed < kMeshes; ++seed) {
    CounterRng rng(1000 + seed);
    const int triangles = 1 + static_cast<int>(rng.below(kMaxTriangles));
    const Mesh soup = oracle::random_triangle_soup(rng, triangles, kRes, cam);
    std::vector<ProjectedPoint> projected;
    std::vector<Vec3> screen;
    for (const Vec3& v : soup.vertices) {
      projected.push_back(project(v, cam));
      screen.emplace_back(projected.back().x, projected.back().y, projected.back().depth);
    }
    const Fragments f = rasterize_triangles(projected, soup.faces(), kRes, kRes, CullMode::kBackFaces);
    const auto expected = oracle::raster_all_triangles(screen, soup.faces(), kRes, kRes, true);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const bool hit = expected[i].tri != kEmptyTriangle;
      covered += hit;
      if (f.tri_id[i] != expected[i].tri ||
          (hit && std::abs(f.depth[i] - expected[i].depth) > 1e-9 * (1.0 + expected[i].depth)))
        ++mismatches;
    }
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && elapsed < kBudgetSeconds,
          fmt::format("{} meshes, {} covered pixels, {} mismatching pixels, {:.2f} s (budget {} s)",
                      kMeshes, covered, mismatches, elapsed, kBudgetSeconds)};
}

// Texel visibility against ray casting on a rotating icosphere.
Outcome visibility_oracle() {
  constexpr int kPoses = 20, kRes = 128, kTexSize = 128;
  constexpr double kMaxDisagreement = 0.005;
  const Mesh sphere = make_icosphere(3, 1.0);
  const CameraParams cam{56.0, 64.0, 64.0};
  CounterRng rng(77);
  double worst = 0.0, worst_geometric = 0.0;
  for (int pose = 0; pose < kPoses; ++pose) {
    const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Mat3 r = rotation_from_axis_angle(axis * rng.uniform(0.0, std::numbers::pi));
    Mesh m = sphere;
    for (Vec3& v : m.vertices) v = r * v;
    const CorrespondenceMap corr = texel_correspondences(m, cam, ImageSpec{kRes}, kTexSize);
    const auto texels = oracle::uv_surface_points(m, kTexSize);
    const auto mask = oracle::coverage_mask(m, cam, kRes);
    std::size_t considered = 0, disagree = 0, disagree_geometric = 0;
    for (std::size_t i = 0; i < texels.size(); ++i) {
      if (texels[i].face < 0) {
        disagree += corr.visible[i] != 0;
        continue;
      }
      ++considered;
      const Vec3& q = texels[i].point;
      const bool ray = oracle::ray_cast_visible(m, texels[i].face, q, cam, kRes);
      const bool seen =
          ray && oracle::bilinear_taps_covered(mask, kRes, cam.scale * q.x() + cam.tx, -cam.scale * q.y() + cam.ty);
      disagree += seen != (corr.visible[i] != 0);
      disagree_geometric += ray != (corr.visible[i] != 0);
    }
    worst = std::max(worst, static_cast<double>(disagree) / considered);
    worst_geometric = std::max(worst_geometric, static_cast<double>(disagree_geometric) / considered);
  }
  return {worst < kMaxDisagreement,
          fmt::format("{} poses, worst disagreement {:.3f}% (limit {:.1f}%); ray cast alone, before "
                      "dropping silhouette-footprint texels: {:.3f}%",
                      kPoses, 100 * worst, 100 * kMaxDisagreement, 100 * worst_geometric)};
}

double masked_mae(const PartialTexture& a, const std::function<std::array<double, 3>(int, int)>& ref,
                  std::size_t& count) {
  double sum = 0.0;
  count = 0;
  for (int r = 0; r < a.size(); ++r)
    for (int c = 0; c < a.size(); ++c) {
      if (!a.visible[static_cast<std::size_t>(r) * a.size() + c]) continue;
      const auto e = ref(r, c);
      for (int ch = 0; ch < 3; ++ch) sum += std::abs(a.texels.at(r, c, ch) - e[ch]);
      ++count;
    }
  return count ? sum / (3.0 * count) : 0.0;
}

// Render with flat light, steal, compare against the albedo; then compare the
// stolen textures of pose pairs on their mutual visibility.
Outcome texture_round_trip() {
  constexpr double kRoundTripLimit = 2.0 / 255.0, kPairLimit = 4.0 / 255.0;
  constexpr int kRes = 256, kTexSize = 128, kPoses = 6;
  const HeadModelAssets assets = gen_synthetic_assets(7, 5023, 128);
  const ImageSpec image{kRes};
  const LightingParams flat = LightingParams::constant();

  std::vector<PartialTexture> stolen;
  double worst_round_trip = 0.0;
  for (int k = 0; k < kPoses; ++k) {
    FaceParams p = sample_params(500 + k, assets, image);
    p.appearance = {};  // one shared albedo across poses
    const Mesh mesh = evaluate(assets, p.flame);
    const TextureMap albedo = albedo_from_appearance(assets, p.appearance);
    const RenderBuffers buf = render_conditions(mesh, p.cam, image, albedo, flat);
    const CorrespondenceMap corr = texel_correspondences(mesh, p.cam, image, kTexSize);
    stolen.push_back(steal_texture(buf.color_img, corr));
    std::size_t n = 0;
    const double mae = masked_mae(stolen.back(), [&](int r, int c) {
      return sample_texture(albedo, Vec2((c + 0.5) / kTexSize, (r + 0.5) / kTexSize));
    }, n);
    if (n == 0) return {false, "no visible texels"};
    worst_round_trip = std::max(worst_round_trip, mae);
  }
  double worst_pair = 0.0;
  std::size_t min_overlap = SIZE_MAX;
  for (int i = 0; i < kPoses; ++i)
    for (int j = i + 1; j < kPoses; ++j) {
      double sum = 0.0;
      std::size_t overlap = 0;
      for (std::size_t t = 0; t < stolen[i].visible.size(); ++t) {
        if (!stolen[i].visible[t] || !stolen[j].visible[t]) continue;
        ++overlap;
        for (int ch = 0; ch < 3; ++ch)
          sum += std::abs(stolen[i].texels.data[3 * t + ch] - stolen[j].texels.data[3 * t + ch]);
      }
      min_overlap = std::min(min_overlap, overlap);
      if (overlap) worst_pair = std::max(worst_pair, sum / (3.0 * overlap));
    }
  return {worst_round_trip < kRoundTripLimit && worst_pair < kPairLimit && min_overlap > 1000,
          fmt::format("worst round-trip MAE {:.2f}/255 (limit 2/255) over {} poses; worst pose-pair "
                      "MAE {:.2f}/255 (limit 4/255), smallest overlap {} texels",
                      255 * worst_round_trip, kPoses, 255 * worst_pair, min_overlap)};
}

Outcome sh_shading() {
  const double y0 = 1.0 / (2.0 * std::sqrt(std::numbers::pi));
  CounterRng rng(9);
  double y0_err = 0.0, const_err = 0.0, lin_err = 0.0;
  const LightingParams flat = LightingParams::constant();
  for (int i = 0; i < 10000; ++i) {
    const Vec3 n = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    y0_err = std::max(y0_err, std::abs(sh_basis(n)[0] - y0));
    const std::array<double, 3> albedo{rng.uniform(), rng.uniform(), rng.uniform()};
    const auto c = shade(albedo, n, flat);
    for (int ch = 0; ch < 3; ++ch) const_err = std::max(const_err, std::abs(c[ch] - albedo[ch]));
    LightingParams l1, l2, sum;
    for (int k = 0; k < 27; ++k) {
      l1.sh[k] = rng.uniform(-2, 2);
      l2.sh[k] = rng.uniform(-2, 2);
      sum.sh[k] = l1.sh[k] + l2.sh[k];
    }
    const auto a = shade_unclamped(albedo, n, l1), b = shade_unclamped(albedo, n, l2);
    const auto s = shade_unclamped(albedo, n, sum);
    for (int ch = 0; ch < 3; ++ch) lin_err = std::max(lin_err, std::abs(s[ch] - a[ch] - b[ch]));
  }
  return {y0_err <= 1e-9 && const_err <= 1.0 / 255.0 && lin_err <= 1e-9,
          fmt::format("10000 normals: |Y0 - 1/(2 sqrt(pi))| max {:.1e} (limit 1e-9), constant light "
                      "error max {:.1e} (limit 1/255), linearity error max {:.1e} (limit 1e-9)",
                      y0_err, const_err, lin_err)};
}

Outcome model_invariants() {
  constexpr int kDraws = 1000;
  const HeadModelAssets assets = gen_synthetic_assets(11, 500, 32);
  const std::size_t v = assets.num_vertices();
  CounterRng rng(12);
  double lin_err = 0.0, rigid_err = 0.0;
  std::size_t jaw_moved = 0, nondeterministic = 0;
  auto random_geometry = [&] {
    FlameParams p;
    for (double& b : p.beta) b = rng.normal();
    for (double& e : p.psi) e = rng.normal();
    return p;
  };
  for (int draw = 0; draw < kDraws; ++draw) {
    const FlameParams p1 = random_geometry(), p2 = random_geometry();
    FlameParams sum;
    for (int k = 0; k < kShapeDims; ++k) sum.beta[k] = p1.beta[k] + p2.beta[k];
    for (int k = 0; k < kExpressionDims; ++k) sum.psi[k] = p1.psi[k] + p2.psi[k];
    const Mesh m1 = evaluate(assets, p1), m2 = evaluate(assets, p2), ms = evaluate(assets, sum);
    double err = 0.0, mag = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
      const Vec3 t = assets.template_vertex(i);
      const Vec3 rhs = (m1.vertices[i] - t) + (m2.vertices[i] - t);
      err = std::max(err, (ms.vertices[i] - t - rhs).cwiseAbs().maxCoeff());
      mag = std::max(mag, rhs.cwiseAbs().maxCoeff());
    }
    lin_err = std::max(lin_err, err / mag);

    FlameParams turned = p1;
    for (int k = 0; k < 3; ++k) turned.theta[k] = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const Mesh mt = evaluate(assets, turned);
    for (std::size_t i = 0; i < v; ++i)
      for (std::size_t j = i + 1; j < v; ++j) {
        const double d0 = (m1.vertices[i] - m1.vertices[j]).norm();
        const double d1 = (mt.vertices[i] - mt.vertices[j]).norm();
        rigid_err = std::max(rigid_err, std::abs(d1 - d0) / d0);
      }

    FlameParams jaw = turned;
    for (int k = 3; k < 6; ++k) jaw.theta[k] = rng.uniform(-0.6, 0.6);
    const Mesh mj = evaluate(assets, jaw);
    for (std::size_t i = 0; i < v; ++i)
      if (assets.jaw_weights[i] == 0.0f && mj.vertices[i] != mt.vertices[i]) ++jaw_moved;
    if (evaluate(assets, jaw).vertices != mj.vertices) ++nondeterministic;
  }
  return {lin_err <= 1e-9 && rigid_err <= 1e-9 && jaw_moved == 0 && nondeterministic == 0,
          fmt::format("{} draws on {} vertices: superposition rel. error {:.1e} (limit 1e-9), "
                      "pairwise distance rel. error {:.1e} (limit 1e-9), {} zero-weight vertices "
                      "moved by the jaw, {} non-deterministic evaluations",
                      kDraws, v, lin_err, rigid_err, jaw_moved, nondeterministic)};
}

Outcome eye_solver() {
  constexpr int kPoses = 1000;
  constexpr double kTolerancePx = 1e-6;
  const HeadModelAssets assets = gen_synthetic_assets(7, 2000, 32);
  CounterRng rng(21);
  double worst = 0.0;
  for (int i = 0; i < kPoses; ++i) {
    FlameParams p;
    for (int k = 0; k < 3; ++k) {
      p.beta[k] = rng.normal();
      p.psi[k] = rng.normal();
    }
    p.theta[0] = rng.uniform(-0.4, 0.4);
    p.theta[1] = rng.uniform(-1.3, 1.3);  // up to about 75 degrees of yaw
    p.theta[2] = rng.uniform(-0.4, 0.4);
    p.theta[3] = rng.uniform(0.0, 0.3);
    const ImageSpec image{static_cast<int>(32u << rng.below(6))};
    const double res = image.resolution;
    const EyeFraming framing{rng.uniform(0.1, 0.4) * res, rng.uniform(0.3, 0.7) * res,
                             rng.uniform(0.3, 0.7) * res};
    const Mesh m = evaluate(assets, p);
    const CameraParams cam = camera_from_eyes(m, assets, image, framing);
    const ProjectedPoint l = project(m.vertices[assets.eye_vertex_ids[0]], cam);
    const ProjectedPoint r = project(m.vertices[assets.eye_vertex_ids[1]], cam);
    worst = std::max({worst, std::abs(0.5 * (l.x + r.x) - framing.center_x),
                      std::abs(0.5 * (l.y + r.y) - framing.center_y),
                      std::abs(std::hypot(l.x - r.x, l.y - r.y) - framing.interocular_px)});
  }
  int profile_errors = 0;
  const int profile_cases = 20;
  for (int i = 0; i < profile_cases; ++i) {
    FlameParams p;
    p.theta[1] = (i % 2 ? 1.0 : -1.0) * std::numbers::pi / 2;
    p.theta[3] = rng.uniform(0.0, 0.3);
    const Mesh m = evaluate(assets, p);
    try {
      camera_from_eyes(m, assets, ImageSpec{64}, EyeFraming::defaults(ImageSpec{64}));
    } catch (const GeometryError&) {
      ++profile_errors;
    }
  }
  return {worst <= kTolerancePx && profile_errors == profile_cases,
          fmt::format("{} poses: worst post-condition error {:.1e} px (limit 1e-6); {}/{} profile "
                      "poses raised the eye-coincidence error",
                      kPoses, worst, profile_errors, profile_cases)};
}

Outcome sampling_protocol() {
  constexpr int kDraws = 100000;
  const HeadModelAssets assets = gen_synthetic_assets(7, 500, 32);
  const ImageSpec image{64};
  double yaw_lo = INFINITY, yaw_hi = -INFINITY, jaw_lo = INFINITY, jaw_hi = -INFINITY;
  std::size_t nonzero_tail = 0, other_pose = 0;
  double sum = 0.0, sum_sq = 0.0;
  for (int seed = 0; seed < kDraws; ++seed) {
    const FaceParams p = sample_params(static_cast<std::uint64_t>(seed), assets, image);
    yaw_lo = std::min(yaw_lo, p.flame.theta[1]);
    yaw_hi = std::max(yaw_hi, p.flame.theta[1]);
    jaw_lo = std::min(jaw_lo, p.flame.theta[3]);
    jaw_hi = std::max(jaw_hi, p.flame.theta[3]);
    for (int k : {0, 2, 4, 5}) other_pose += p.flame.theta[k] != 0.0;
    for (int k = kSampledComponents; k < kShapeDims; ++k) nonzero_tail += p.flame.beta[k] != 0.0;
    for (int k = kSampledComponents; k < kExpressionDims; ++k) nonzero_tail += p.flame.psi[k] != 0.0;
    for (int k = kSampledComponents; k < kAppearanceDims; ++k)
      nonzero_tail += p.appearance.alpha[k] != 0.0;
    sum += p.flame.beta[0];
    sum_sq += p.flame.beta[0] * p.flame.beta[0];
  }
  const double yaw_max = std::numbers::pi / 8, jaw_max = std::numbers::pi / 12;
  const double mean = sum / kDraws, sd = std::sqrt(sum_sq / kDraws - mean * mean);
  // Ranges must be respected and nearly filled (1% of the interval).
  const bool ranges = yaw_lo >= -yaw_max && yaw_hi <= yaw_max && jaw_lo >= 0.0 && jaw_hi <= jaw_max &&
                      yaw_lo < -0.99 * yaw_max && yaw_hi > 0.99 * yaw_max && jaw_lo < 0.01 * jaw_max &&
                      jaw_hi > 0.99 * jaw_max;
  const bool gaussian = std::abs(mean) < 0.02 && std::abs(sd - 1.0) < 0.02;
  return {ranges && gaussian && nonzero_tail == 0 && other_pose == 0,
          fmt::format("{} draws: yaw [{:.5f}, {:.5f}] within +-pi/8 = {:.5f}; jaw [{:.5f}, {:.5f}] "
                      "within [0, pi/12 = {:.5f}]; {} non-zero trailing components; {} non-zero "
                      "other pose entries; beta_0 mean {:.4f} sd {:.4f}",
                      kDraws, yaw_lo, yaw_hi, yaw_max, jaw_lo, jaw_hi, jaw_max, nonzero_tail,
                      other_pose, mean, sd)};
}

std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_bytes(e.path());
  return files;
}

Outcome dataset_determinism() {
  const HeadModelAssets assets = gen_synthetic_assets(7, 2000, 64);
  const fs::path root = fs::temp_directory_path() / "facecond_acceptance_dataset";
  fs::remove_all(root);
  DatasetOptions opts;
  opts.count = 8;
  opts.image = ImageSpec{64};
  opts.seed = 1;
  opts.correspondences = true;
  opts.tex_size = 64;
  make_dataset(assets, root / "a", opts);
  make_dataset(assets, root / "b", opts);
  opts.workers = 4;
  make_dataset(assets, root / "c", opts);
  const auto a = snapshot(root / "a");
  const bool identical = a == snapshot(root / "b") && a == snapshot(root / "c");
  validate_dataset(root / "a");

  double pool_err = 0.0;
  const DatasetManifest m = read_manifest(root / "a");
  for (const ManifestRecord& r : m.records) {
    const ConditioningStack s = read_stack(root / "a" / r.conditioning);
    for (int k = 1; k < s.levels(); ++k) {
      const Image& fine = s.pyramid[k - 1];
      const Image& coarse = s.pyramid[k];
      for (int row = 0; row < coarse.height; ++row)
        for (int col = 0; col < coarse.width; ++col)
          for (int ch = 0; ch < coarse.channels; ++ch) {
            const double mean = (static_cast<double>(fine.at(2 * row, 2 * col, ch)) +
                                 fine.at(2 * row, 2 * col + 1, ch) + fine.at(2 * row + 1, 2 * col, ch) +
                                 fine.at(2 * row + 1, 2 * col + 1, ch)) / 4.0;
            pool_err = std::max(pool_err, std::abs(coarse.at(row, col, ch) - mean));
          }
    }
  }
  fs::remove_all(root);
  return {identical && pool_err <= 1e-6,
          fmt::format("{} files byte-identical across two runs and 1 vs 4 workers: {}; worst "
                      "pyramid pooling error {:.1e} (limit 1e-6)",
                      a.size(), identical ? "yes" : "no", pool_err)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rasterizer matches brute-force oracle", raster_oracle},
      {"texel visibility matches ray-cast oracle", visibility_oracle},
      {"texture round trip and pose-pair agreement", texture_round_trip},
      {"SH shading constants, constant light, linearity", sh_shading},
      {"model linearity, rigidity, jaw locality", model_invariants},
      {"eye-centering solver", eye_solver},
      {"sampling protocol ranges", sampling_protocol},
      {"dataset determinism and pyramid pooling", dataset_determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failures += !o.pass;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
