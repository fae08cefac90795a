#include "facecond/camera.hpp"

#include "facecond/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace facecond {

void CameraParams::validate() const {
  if (!(std::isfinite(scale) && std::isfinite(tx) && std::isfinite(ty)))
    throw ValidationError("camera parameters must be finite");
  if (!(scale > 0.0)) throw ValidationError(fmt::format("camera scale {} must be positive", scale));
}

void ImageSpec::validate() const {
  if (resolution < 32 || resolution > 1024 || (resolution & (resolution - 1)) != 0)
    throw ValidationError(
        fmt::format("image resolution {} must be a power of two in [32, 1024]", resolution));
}

EyeFraming EyeFraming::defaults(const ImageSpec& image) {
  const double p = image.resolution;
  return {0.22 * p, 0.5 * p, 0.42 * p};
}

CameraParams camera_from_eye_points(const Vec3& left_eye, const Vec3& right_eye,
                                    const ImageSpec& image, const EyeFraming& framing) {
  image.validate();
  if (!(framing.interocular_px > 0.0))
    throw ValidationError("interocular distance must be positive");
  const double separation = std::hypot(left_eye.x() - right_eye.x(), left_eye.y() - right_eye.y());
  if (separation < kMinEyeSeparation)
    throw GeometryError(fmt::format(
        "eye projections coincide (separation {:.3g} m): profile view, no camera solves the "
        "eye framing without extreme zoom",
        separation));
  CameraParams cam;
  cam.scale = framing.interocular_px / separation;
  const double mid_x = 0.5 * (left_eye.x() + right_eye.x());
  const double mid_y = 0.5 * (left_eye.y() + right_eye.y());
  cam.tx = framing.center_x - cam.scale * mid_x;
  cam.ty = framing.center_y + cam.scale * mid_y;
  return cam;
}

CameraParams camera_from_eyes(const Mesh& mesh, const HeadModelAssets& assets,
                              const ImageSpec& image, const EyeFraming& framing) {
  const auto [left, right] = assets.eye_vertex_ids;
  if (left >= mesh.num_vertices() || right >= mesh.num_vertices())
    throw ValidationError("eye vertex ids out of range for mesh");
  return camera_from_eye_points(mesh.vertices[left], mesh.vertices[right], image, framing);
}

}  // namespace facecond
