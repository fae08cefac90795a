#pragma once

#include "facecond/model.hpp"

namespace facecond {

// Weak-perspective camera: x_px = scale·x + tx, y_px = -scale·y + ty. The
// camera looks down -z, so depth = -z and smaller depth is closer.
struct CameraParams {
  double scale = 1.0;  // pixels per meter
  double tx = 0.0;     // pixels
  double ty = 0.0;     // pixels

  void validate() const;
  friend bool operator==(const CameraParams&, const CameraParams&) = default;
};

// Square P×P image, P a power of two in [32, 1024].
struct ImageSpec {
  int resolution = 64;

  void validate() const;
  friend bool operator==(const ImageSpec&, const ImageSpec&) = default;
};

struct ProjectedPoint {
  double x;
  double y;
  double depth;
};

inline ProjectedPoint project(const Vec3& p, const CameraParams& cam) {
  return {cam.scale * p.x() + cam.tx, -cam.scale * p.y() + cam.ty, -p.z()};
}

// Framing targets for camera_from_eyes().
struct EyeFraming {
  double interocular_px;
  double center_x;
  double center_y;

  // 0.22·P between the eyes, midpoint at (0.5·P, 0.42·P).
  static EyeFraming defaults(const ImageSpec& image);
};

// Eye separation in the image plane below which no camera is solved.
inline constexpr double kMinEyeSeparation = 1e-6;  // meters

// Solves scale and translation so the projected eye midpoint lands on the
// framing centre and the projected eyes are interocular_px apart. Throws
// GeometryError when the eyes (nearly) coincide in projection, i.e. in
// profile views, instead of returning an extreme zoom.
CameraParams camera_from_eyes(const Mesh& mesh, const HeadModelAssets& assets,
                              const ImageSpec& image, const EyeFraming& framing);

// Same, from already posed eye positions.
CameraParams camera_from_eye_points(const Vec3& left_eye, const Vec3& right_eye,
                                    const ImageSpec& image, const EyeFraming& framing);

}  // namespace facecond
