#include "facecond/texsteal.hpp"

#include "facecond/error.hpp"
#include "facecond/raster.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace facecond {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double edge(const ProjectedPoint& a, const ProjectedPoint& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Front-facing triangles binned on a coarse screen grid; answers "nearest
// front surface depth at (x, y)" for arbitrary sample positions.
class DepthQuery {
 public:
  DepthQuery(const std::vector<ProjectedPoint>& verts, const std::vector<Face>& faces,
             int resolution)
      : verts_(verts), faces_(faces), cells_((resolution + kCell - 1) / kCell) {
    bins_.resize(static_cast<std::size_t>(cells_) * cells_);
    front_.assign(faces.size(), 0);
    for (std::size_t t = 0; t < faces.size(); ++t) {
      const auto& a = verts[faces[t][0]];
      const auto& b = verts[faces[t][1]];
      const auto& c = verts[faces[t][2]];
      if (!(edge(a, b, c.x, c.y) < 0.0)) continue;
      front_[t] = 1;
      const int c0 = cell_of(std::min({a.x, b.x, c.x}));
      const int c1 = cell_of(std::max({a.x, b.x, c.x}));
      const int r0 = cell_of(std::min({a.y, b.y, c.y}));
      const int r1 = cell_of(std::max({a.y, b.y, c.y}));
      for (int r = r0; r <= r1; ++r)
        for (int cc = c0; cc <= c1; ++cc)
          bins_[static_cast<std::size_t>(r) * cells_ + cc].push_back(static_cast<std::uint32_t>(t));
    }
  }

  bool front_facing(std::size_t t) const { return front_[t] != 0; }

  // Depth of the closest front-facing triangle containing (x, y), +inf if none.
  double nearest(double x, double y) const {
    double best = kInf;
    for (std::uint32_t t : bins_[static_cast<std::size_t>(cell_of(y)) * cells_ + cell_of(x)]) {
      const auto& a = verts_[faces_[t][0]];
      const auto& b = verts_[faces_[t][1]];
      const auto& c = verts_[faces_[t][2]];
      // Front faces have negative screen-space area; flip so inside is >= 0.
      const double area = -edge(a, b, c.x, c.y);
      const double wa = -edge(b, c, x, y);
      const double wb = -edge(c, a, x, y);
      const double wc = -edge(a, b, x, y);
      const double slack = -1e-12 * area;
      if (wa < slack || wb < slack || wc < slack) continue;
      const double z = (wa * a.depth + wb * b.depth + wc * c.depth) / area;
      best = std::min(best, z);
    }
    return best;
  }

 private:
  static constexpr int kCell = 4;
  int cell_of(double v) const {
    return std::clamp(static_cast<int>(std::floor(v / kCell)), 0, cells_ - 1);
  }

  const std::vector<ProjectedPoint>& verts_;
  const std::vector<Face>& faces_;
  int cells_;
  std::vector<std::vector<std::uint32_t>> bins_;
  std::vector<std::uint8_t> front_;
};

std::size_t count_visible(const std::vector<std::uint8_t>& visible) {
  return static_cast<std::size_t>(std::count(visible.begin(), visible.end(), std::uint8_t{1}));
}

}  // namespace

std::size_t CorrespondenceMap::visible_count() const { return count_visible(visible); }
std::size_t PartialTexture::visible_count() const { return count_visible(visible); }

CorrespondenceMap texel_correspondences(const Mesh& mesh, const CameraParams& cam,
                                        const ImageSpec& image, int t_s) {
  image.validate();
  cam.validate();
  if (t_s < 1) throw ValidationError(fmt::format("stolen texture size {} must be positive", t_s));
  if (!mesh.topology || !mesh.topology->has_uvs())
    throw ValidationError("texture stealing needs a mesh with UV coordinates");
  const auto& faces = mesh.faces();
  const auto& uvs = mesh.topology->uvs;
  const int p = image.resolution;

  // UV-space raster: one vertex per face corner so charts stay independent.
  std::vector<ProjectedPoint> uv_points(3 * faces.size());
  std::vector<Face> uv_faces(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k)
      uv_points[3 * f + k] = {uvs[f][k].x() * t_s, uvs[f][k].y() * t_s, 0.0};
    const auto base = static_cast<std::uint32_t>(3 * f);
    uv_faces[f] = {base, base + 1, base + 2};
  }
  const Fragments texel_frags = rasterize_triangles(uv_points, uv_faces, t_s, t_s, CullMode::kNone);

  std::vector<ProjectedPoint> projected(mesh.num_vertices());
  double z_min = kInf, z_max = -kInf;
  for (std::size_t v = 0; v < projected.size(); ++v) {
    projected[v] = project(mesh.vertices[v], cam);
    z_min = std::min(z_min, projected[v].depth);
    z_max = std::max(z_max, projected[v].depth);
  }
  const double eps_z = kVisibilityDepthTolerance * (z_max - z_min);
  const DepthQuery depth(projected, faces, p);
  const Fragments coverage = rasterize_triangles(projected, faces, p, p, CullMode::kBackFaces);
  // All four bilinear taps around (x, y) land on rendered surface.
  auto footprint_covered = [&](double x, double y) {
    const int x0 = static_cast<int>(std::floor(x - 0.5)), y0 = static_cast<int>(std::floor(y - 0.5));
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const int col = std::clamp(x0 + dx, 0, p - 1), row = std::clamp(y0 + dy, 0, p - 1);
        if (coverage.tri_id[coverage.index(row, col)] == kEmptyTriangle) return false;
      }
    return true;
  };

  CorrespondenceMap corr;
  corr.size = t_s;
  corr.image_resolution = p;
  corr.img_xy.assign(static_cast<std::size_t>(t_s) * t_s * 2, 0.0f);
  corr.visible.assign(static_cast<std::size_t>(t_s) * t_s, 0);
  for (std::size_t i = 0; i < corr.visible.size(); ++i) {
    const std::int32_t tri = texel_frags.tri_id[i];
    if (tri == kEmptyTriangle) continue;
    const Face& f = faces[tri];
    const auto& b = texel_frags.bary[i];
    const Vec3 surface =
        b[0] * mesh.vertices[f[0]] + b[1] * mesh.vertices[f[1]] + b[2] * mesh.vertices[f[2]];
    const ProjectedPoint q = project(surface, cam);
    corr.img_xy[2 * i] = static_cast<float>(q.x);
    corr.img_xy[2 * i + 1] = static_cast<float>(q.y);
    if (!depth.front_facing(static_cast<std::size_t>(tri))) continue;
    if (!(q.x >= 0.0 && q.x < p && q.y >= 0.0 && q.y < p)) continue;
    // An empty query (own triangle missed by rounding) counts as unoccluded.
    if (!(q.depth <= depth.nearest(q.x, q.y) + eps_z)) continue;
    corr.visible[i] = footprint_covered(q.x, q.y);
  }
  return corr;
}

PartialTexture steal_texture(const Image& img, const CorrespondenceMap& corr) {
  if (img.height != corr.image_resolution || img.width != corr.image_resolution)
    throw ValidationError(fmt::format("image is {}x{}, correspondence map expects {}x{}",
                                      img.height, img.width, corr.image_resolution,
                                      corr.image_resolution));
  if (img.channels != 3) throw ValidationError("texture stealing expects an RGB image");
  PartialTexture out;
  out.texels = Image(corr.size, corr.size, 3, 0.0f);
  out.visible = corr.visible;
  double rgb[3];
  for (int row = 0; row < corr.size; ++row)
    for (int col = 0; col < corr.size; ++col) {
      const std::size_t i = corr.index(row, col);
      if (!corr.visible[i]) continue;
      sample_bilinear(img, corr.img_xy[2 * i], corr.img_xy[2 * i + 1], rgb);
      for (int c = 0; c < 3; ++c) out.texels.at(row, col, c) = static_cast<float>(rgb[c]);
    }
  return out;
}

ConsistencyResult consistency_loss(const PartialTexture& a, const PartialTexture& b) {
  if (!a.texels.same_shape(b.texels))
    throw ValidationError(fmt::format("texture sizes differ: {} vs {}", a.size(), b.size()));
  double sum = 0.0;
  std::size_t overlap = 0;
  for (std::size_t i = 0; i < a.visible.size(); ++i) {
    if (!a.visible[i] || !b.visible[i]) continue;
    ++overlap;
    for (int c = 0; c < 3; ++c) {
      const double d = static_cast<double>(a.texels.data[3 * i + c]) - b.texels.data[3 * i + c];
      sum += d * d;
    }
  }
  if (overlap == 0) return {};
  return {sum / (3.0 * static_cast<double>(overlap)), overlap};
}

}  // namespace facecond
