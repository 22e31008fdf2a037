#ifndef TFEM_FOLD_SURFACE_HPP
#define TFEM_FOLD_SURFACE_HPP

#include "tfem/hex_basis.hpp"

#include <string>
#include <vector>

namespace tfem {

// Triangle of the det J = 0 isosurface, in physical space with the
// reference-space preimages kept for residual checks.
struct FoldTriangle {
  std::array<Vec3, 3> x;
  std::array<Vec3, 3> xi;
};

struct FoldSurface {
  std::vector<FoldTriangle> triangles;
  int resolution = 0;
};

// Cube-case isosurface extraction of det J = 0 over a resolution^3
// cell lattice in reference space.  Crossing edges are resolved by
// bisection (det J is one-signed at the ends and quadratic along a
// lattice edge), so vertex preimages satisfy |det J| well below 1e-6.
// Convex elements simply yield zero triangles.  Diagnostic output;
// nothing in the solve path depends on it.
FoldSurface extract_fold_surface(const ElementGeom& geom, int resolution);

// One triangle per line: nine reals (x1 y1 z1 x2 y2 z2 x3 y3 z3).
void save_fold_surface(const FoldSurface& fs, const std::string& path);

} // namespace tfem

#endif
