#pragma once

#include "facecond/model.hpp"

namespace facecond {

// Reference meshes used by tests and tooling. All are wound counter-clockwise
// seen from outside.

// Subdivided icosahedron on a sphere of `radius`. UVs pack every triangle into
// its own half-cell of a square grid atlas, so no two faces share texels.
Mesh make_icosphere(int subdivisions, double radius = 1.0);

// Axis-aligned cube [-h, h]^3, two triangles per side, no UVs.
Mesh make_cube(double half_extent = 0.5);

// Rectangle in the plane z = depth spanning [x0, x1] × [y0, y1], facing +z.
// UV (0, 0) at the top-left corner (x0, y1), (1, 1) at (x1, y0).
Mesh make_quad(double x0, double y0, double x1, double y1, double depth = 0.0);

}  // namespace facecond
