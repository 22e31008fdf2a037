#ifndef TFEM_FACE_QUADRATURE_HPP
#define TFEM_FACE_QUADRATURE_HPP

#include "tfem/hex_basis.hpp"
#include "tfem/mesh.hpp"

#include <vector>

namespace tfem {

// Bilinear geometry of one element face, x(s,t) = c0 + c1 s + c2 t +
// c3 s t over [-1,1]^2, with corners in face_param order so that
// dx/ds x dx/dt points out of the element.
struct FaceGeom {
  std::array<Vec3, 4> corner;
  std::array<Vec3, 4> coef;
  Vec3 unit_normal = Vec3::Zero(); // meaningful for planar faces
  bool planar = false;
  double scale = 0.0; // corner bounding-box diagonal
};

FaceGeom face_geom(const Mesh& mesh, int e, int f);

Vec3 face_map(const FaceGeom& fg, double s, double t);
Vec3 face_cross(const FaceGeom& fg, double s, double t);

// True when the area density takes both signs over the face, i.e. the
// face folds over itself.  Exact for planar faces (affine density,
// corner probe); corners-plus-center heuristic otherwise.
bool face_tangled(const FaceGeom& fg);

// One in-plane preimage of a physical point under a planar face map.
// j is the area density dx/ds x dx/dt projected on the outward normal;
// its sign separates the face's upright and folded-over branches.
struct FaceRoot {
  double s = 0.0, t = 0.0;
  double j = 0.0;
  int sign = 0;
  bool ambiguous = false;
};

// All roots of the planar bilinear system x(s,t) = p inside [-1,1]^2,
// solved in closed form (the eliminated variable satisfies a
// quadratic), then Newton-polished.  Points off the face plane by more
// than tol yield no roots.  Throws GeometryError for non-planar faces.
std::vector<FaceRoot> invert_bilinear_face(const FaceGeom& fg, const Vec3& p,
                                           double tol);

struct FQPoint {
  Vec3 x;
  double w; // physical area weight
  double s_plus = 0.0, t_plus = 0.0;
};

struct FaceRegionQuadrature {
  int elem = -1;
  int face = -1;
  std::vector<FQPoint> points;
  int depth = 0;
  Vec3 unit_normal = Vec3::Zero();
  bool tangled = false;
};

// Area quadrature over the face region minus its 2D fold, mirroring
// the volume octree with a quadtree.  Faces whose area density never
// changes sign (any convex element's face, and untangled faces of
// concave elements) get the plain full-face tensor rule.  Tangled
// faces must be planar; the membership test (exactly one positive
// branch, no negative) uses the closed-form bilinear inversion.
FaceRegionQuadrature face_region_quadrature(const Mesh& mesh, int e, int f,
                                            int depth, int cell_order = 2);

} // namespace tfem

#endif
