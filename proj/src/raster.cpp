#include "facecond/raster.hpp"

#include "facecond/error.hpp"
#include "facecond/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace facecond {

const std::array<std::string, kConditionChannels> kConditionChannelNames = {
    "normal_x", "normal_y", "normal_z", "texture_r", "texture_g", "texture_b"};

namespace {

constexpr int kTile = 16;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct TriangleSetup {
  std::array<int, 3> order;  // corner index of ordered vertex k
  std::array<Vec2, 3> p;
  std::array<double, 3> z;
  std::array<bool, 3> top_left;  // for edges opposite vertex k
  double area2;
  int col_min, col_max, row_min, row_max;
};

double edge(const Vec2& a, const Vec2& b, double px, double py) {
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

bool is_top_left(const Vec2& from, const Vec2& to) {
  const double dx = to.x() - from.x();
  const double dy = to.y() - from.y();
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

bool setup_triangle(std::span<const ProjectedPoint> verts, const Face& f, int width, int height,
                    CullMode cull, TriangleSetup& s) {
  std::array<Vec2, 3> p;
  std::array<double, 3> z;
  for (int k = 0; k < 3; ++k) {
    const ProjectedPoint& v = verts[f[k]];
    p[k] = Vec2(v.x, v.y);
    z[k] = v.depth;
  }
  const double area2 = edge(p[0], p[1], p[2].x(), p[2].y());
  if (!std::isfinite(area2) || area2 == 0.0) return false;
  // Counter-clockwise in y-up world coordinates appears clockwise on screen.
  const bool front = area2 < 0.0;
  if (cull == CullMode::kBackFaces && !front) return false;

  s.order = front ? std::array<int, 3>{0, 2, 1} : std::array<int, 3>{0, 1, 2};
  for (int k = 0; k < 3; ++k) {
    s.p[k] = p[s.order[k]];
    s.z[k] = z[s.order[k]];
  }
  s.area2 = edge(s.p[0], s.p[1], s.p[2].x(), s.p[2].y());
  s.top_left = {is_top_left(s.p[1], s.p[2]), is_top_left(s.p[2], s.p[0]),
                is_top_left(s.p[0], s.p[1])};

  const double x_lo = std::min({p[0].x(), p[1].x(), p[2].x()});
  const double x_hi = std::max({p[0].x(), p[1].x(), p[2].x()});
  const double y_lo = std::min({p[0].y(), p[1].y(), p[2].y()});
  const double y_hi = std::max({p[0].y(), p[1].y(), p[2].y()});
  // Pixel centres inside the bounding box, clipped to the viewport.
  const double c_lo = std::max(std::ceil(x_lo - 0.5), 0.0);
  const double c_hi = std::min(std::floor(x_hi - 0.5), width - 1.0);
  const double r_lo = std::max(std::ceil(y_lo - 0.5), 0.0);
  const double r_hi = std::min(std::floor(y_hi - 0.5), height - 1.0);
  if (c_lo > c_hi || r_lo > r_hi) return false;
  s.col_min = static_cast<int>(c_lo);
  s.col_max = static_cast<int>(c_hi);
  s.row_min = static_cast<int>(r_lo);
  s.row_max = static_cast<int>(r_hi);
  return true;
}

bool inside(double w, bool top_left) { return w > 0.0 || (w == 0.0 && top_left); }

}  // namespace

Fragments rasterize_triangles(std::span<const ProjectedPoint> vertices, std::span<const Face> faces,
                              int width, int height, CullMode cull, int workers) {
  Fragments out;
  out.width = width;
  out.height = height;
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  out.depth.assign(pixels, kInf);
  out.tri_id.assign(pixels, kEmptyTriangle);
  out.bary.assign(pixels, {0.0, 0.0, 0.0});

  std::vector<TriangleSetup> setups;
  std::vector<std::int32_t> setup_ids;
  setups.reserve(faces.size());
  for (std::size_t t = 0; t < faces.size(); ++t) {
    TriangleSetup s;
    if (setup_triangle(vertices, faces[t], width, height, cull, s)) {
      setups.push_back(s);
      setup_ids.push_back(static_cast<std::int32_t>(t));
    }
  }

  // Bin in triangle order; each tile then owns its pixels exclusively.
  const int tiles_x = (width + kTile - 1) / kTile;
  const int tiles_y = (height + kTile - 1) / kTile;
  std::vector<std::vector<std::uint32_t>> bins(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (std::size_t i = 0; i < setups.size(); ++i) {
    const TriangleSetup& s = setups[i];
    for (int ty = s.row_min / kTile; ty <= s.row_max / kTile; ++ty)
      for (int tx = s.col_min / kTile; tx <= s.col_max / kTile; ++tx)
        bins[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(static_cast<std::uint32_t>(i));
  }

  parallel_for(bins.size(), workers, [&](std::size_t tile) {
    const int tile_row = static_cast<int>(tile / tiles_x) * kTile;
    const int tile_col = static_cast<int>(tile % tiles_x) * kTile;
    for (std::uint32_t i : bins[tile]) {
      const TriangleSetup& s = setups[i];
      const int r0 = std::max(s.row_min, tile_row);
      const int r1 = std::min(s.row_max, tile_row + kTile - 1);
      const int c0 = std::max(s.col_min, tile_col);
      const int c1 = std::min(s.col_max, tile_col + kTile - 1);
      for (int row = r0; row <= r1; ++row) {
        const double py = row + 0.5;
        for (int col = c0; col <= c1; ++col) {
          const double px = col + 0.5;
          const double w0 = edge(s.p[1], s.p[2], px, py);
          const double w1 = edge(s.p[2], s.p[0], px, py);
          const double w2 = edge(s.p[0], s.p[1], px, py);
          if (!inside(w0, s.top_left[0]) || !inside(w1, s.top_left[1]) ||
              !inside(w2, s.top_left[2]))
            continue;
          const double b0 = w0 / s.area2;
          const double b1 = w1 / s.area2;
          const double b2 = w2 / s.area2;
          const double z = b0 * s.z[0] + b1 * s.z[1] + b2 * s.z[2];
          const std::size_t idx = out.index(row, col);
          if (!(z < out.depth[idx])) continue;
          out.depth[idx] = z;
          out.tri_id[idx] = setup_ids[i];
          auto& bary = out.bary[idx];
          bary[s.order[0]] = b0;
          bary[s.order[1]] = b1;
          bary[s.order[2]] = b2;
        }
      }
    }
  });
  return out;
}

RenderBuffers rasterize(const Mesh& mesh, const CameraParams& cam, const ImageSpec& image,
                        int workers) {
  image.validate();
  cam.validate();
  if (mesh.num_faces() == 0) throw ValidationError("cannot rasterize an empty mesh");
  const int p = image.resolution;

  std::vector<ProjectedPoint> projected(mesh.num_vertices());
  for (std::size_t v = 0; v < projected.size(); ++v) projected[v] = project(mesh.vertices[v], cam);
  Fragments frags =
      rasterize_triangles(projected, mesh.faces(), p, p, CullMode::kBackFaces, workers);

  RenderBuffers buf;
  buf.resolution = p;
  buf.depth = std::move(frags.depth);
  buf.tri_id = std::move(frags.tri_id);
  buf.bary = std::move(frags.bary);
  buf.mask.resize(buf.tri_id.size());
  for (std::size_t i = 0; i < buf.mask.size(); ++i) buf.mask[i] = buf.tri_id[i] != kEmptyTriangle;

  if (mesh.topology->has_uvs()) {
    buf.uv.assign(buf.tri_id.size(), Vec2::Zero());
    for (std::size_t i = 0; i < buf.uv.size(); ++i) {
      if (!buf.mask[i]) continue;
      const FaceUv& corners = mesh.topology->uvs[buf.tri_id[i]];
      const auto& b = buf.bary[i];
      buf.uv[i] = b[0] * corners[0] + b[1] * corners[1] + b[2] * corners[2];
    }
  }
  buf.normal_img = Image(p, p, 3, 0.5f);
  buf.color_img = Image(p, p, 3, 0.0f);
  return buf;
}

namespace {

Vec3 interpolated_normal(const RenderBuffers& buf, std::size_t idx, const Mesh& mesh,
                         std::span<const Vec3> normals) {
  const Face& f = mesh.faces()[buf.tri_id[idx]];
  const auto& b = buf.bary[idx];
  Vec3 n = b[0] * normals[f[0]] + b[1] * normals[f[1]] + b[2] * normals[f[2]];
  double len = n.norm();
  if (len < 1e-12) {
    n = (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    len = n.norm();
  }
  return n / len;
}

void check_normals(const Mesh& mesh, std::span<const Vec3> normals) {
  if (normals.size() != mesh.num_vertices())
    throw ValidationError(fmt::format("{} vertex normals for a mesh with {} vertices",
                                      normals.size(), mesh.num_vertices()));
}

}  // namespace

Image render_normals(const RenderBuffers& buffers, const Mesh& mesh) {
  const auto normals = vertex_normals(mesh);
  return render_normals(buffers, mesh, normals);
}

Image render_normals(const RenderBuffers& buffers, const Mesh& mesh,
                     std::span<const Vec3> normals) {
  check_normals(mesh, normals);
  const int p = buffers.resolution;
  Image img(p, p, 3, 0.5f);
  for (int row = 0; row < p; ++row)
    for (int col = 0; col < p; ++col) {
      const std::size_t idx = buffers.index(row, col);
      if (!buffers.mask[idx]) continue;
      const Vec3 n = interpolated_normal(buffers, idx, mesh, normals);
      for (int c = 0; c < 3; ++c) img.at(row, col, c) = static_cast<float>(0.5 * (n[c] + 1.0));
    }
  return img;
}

Image render_textured(const RenderBuffers& buffers, const Mesh& mesh, const TextureMap& albedo,
                      const LightingParams& light) {
  const auto normals = vertex_normals(mesh);
  return render_textured(buffers, mesh, normals, albedo, light);
}

Image render_textured(const RenderBuffers& buffers, const Mesh& mesh,
                      std::span<const Vec3> normals, const TextureMap& albedo,
                      const LightingParams& light) {
  check_normals(mesh, normals);
  if (buffers.uv.empty()) throw ValidationError("textured rendering needs UV coordinates");
  if (albedo.channels != 3) throw ValidationError("albedo must have 3 channels");
  const int p = buffers.resolution;
  Image img(p, p, 3, 0.0f);
  for (int row = 0; row < p; ++row)
    for (int col = 0; col < p; ++col) {
      const std::size_t idx = buffers.index(row, col);
      if (!buffers.mask[idx]) continue;
      const Vec3 n = interpolated_normal(buffers, idx, mesh, normals);
      const auto rgb = shade(sample_texture(albedo, buffers.uv[idx]), n, light);
      for (int c = 0; c < 3; ++c) img.at(row, col, c) = static_cast<float>(rgb[c]);
    }
  return img;
}

RenderBuffers render_conditions(const Mesh& mesh, const CameraParams& cam, const ImageSpec& image,
                                const TextureMap& albedo, const LightingParams& light,
                                int workers) {
  RenderBuffers buf = rasterize(mesh, cam, image, workers);
  const auto normals = vertex_normals(mesh);
  buf.normal_img = render_normals(buf, mesh, normals);
  buf.color_img = render_textured(buf, mesh, normals, albedo, light);
  return buf;
}

int max_pyramid_levels(int resolution) {
  int levels = 1;
  while ((resolution >> levels) >= 4 && (resolution >> (levels - 1)) % 2 == 0) ++levels;
  return levels;
}

Image average_pool_2x2(const Image& img) {
  if (img.height % 2 != 0 || img.width % 2 != 0)
    throw ValidationError(fmt::format("cannot pool a {}x{} image", img.height, img.width));
  Image out(img.height / 2, img.width / 2, img.channels);
  for (int row = 0; row < out.height; ++row)
    for (int col = 0; col < out.width; ++col)
      for (int c = 0; c < img.channels; ++c) {
        const double sum = static_cast<double>(img.at(2 * row, 2 * col, c)) +
                           img.at(2 * row, 2 * col + 1, c) + img.at(2 * row + 1, 2 * col, c) +
                           img.at(2 * row + 1, 2 * col + 1, c);
        out.at(row, col, c) = static_cast<float>(0.25 * sum);
      }
  return out;
}

ConditioningStack conditioning_stack(const Image& normal_img, const Image& color_img, int levels) {
  if (!normal_img.same_shape(color_img) || normal_img.channels != 3 ||
      normal_img.height != normal_img.width)
    throw ValidationError(fmt::format(
        "conditioning inputs must be equal-sized square RGB images (got {}x{}x{} and {}x{}x{})",
        normal_img.height, normal_img.width, normal_img.channels, color_img.height,
        color_img.width, color_img.channels));
  const int p = normal_img.width;
  const int max_levels = max_pyramid_levels(p);
  if (levels < 1 || levels > max_levels)
    throw ValidationError(
        fmt::format("{} pyramid levels requested, resolution {} allows 1..{}", levels, p, max_levels));

  Image full(p, p, kConditionChannels);
  for (int row = 0; row < p; ++row)
    for (int col = 0; col < p; ++col)
      for (int c = 0; c < 3; ++c) {
        full.at(row, col, c) = normal_img.at(row, col, c);
        full.at(row, col, 3 + c) = color_img.at(row, col, c);
      }
  ConditioningStack stack;
  stack.pyramid.push_back(std::move(full));
  for (int k = 1; k < levels; ++k) stack.pyramid.push_back(average_pool_2x2(stack.pyramid.back()));
  return stack;
}

}  // namespace facecond
