#ifndef TFEM_INVERT_HPP
#define TFEM_INVERT_HPP

#include "tfem/hex_basis.hpp"
#include "tfem/mesh.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace tfem {

// Axis-aligned box in reference coordinates.
struct ParamBox {
  Vec3 lo, hi;
};

struct Interval {
  double lo = 0.0, hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
};

// Conservative enclosure of det J over a reference box.  Column entries
// are bilinear in the two complementary variables (corner-exact bounds);
// the determinant is expanded in interval arithmetic on top of that.
Interval detj_interval(const ElementGeom& geom, const ParamBox& box);

// Exact component-wise range of the map over a box: a multilinear
// function attains its extrema at box corners.
ParamBox map_range(const ElementGeom& geom, const ParamBox& box);

struct Root {
  Vec3 xi;
  double detj = 0.0;
  int sign = 0;           // +1 or -1 from the sign of detj
  bool ambiguous = false; // |detj| within the fold-surface tolerance band
};

struct RootSet {
  Vec3 target = Vec3::Zero();
  std::vector<Root> roots; // sorted lexicographically by xi

  int n_plus() const;
  int n_minus() const;
  bool any_ambiguous() const;
};

// All reference-space preimages of p under the element map, found by
// recursive box subdivision with exact range exclusion and damped
// Newton polish, deduplicated at 1e-8 reference distance.  tol is the
// physical acceptance tolerance on |x(root) - p|.
RootSet invert_trilinear(const ElementGeom& geom, const Vec3& p, double tol);

inline RootSet invert_trilinear(const ElementGeom& geom, const Vec3& p) {
  return invert_trilinear(geom, p, 1e-9 * geom.scale);
}

// Same search restricted to the given boxes.  Sound whenever the boxes
// jointly cover every preimage of p (the region quadrature maintains
// such covers per octree cell to keep inversion local).
RootSet invert_trilinear_boxes(const ElementGeom& geom, const Vec3& p,
                               double tol, const std::vector<ParamBox>& boxes);

// As invert_trilinear_boxes, but straddling leaves get two seeds along
// the Jacobian null direction instead of the eight corners.  A merging
// pair separates along exactly that axis, so the cover stays reliable
// while the per-point cost drops; the hot quadrature loops use this.
RootSet invert_trilinear_boxes_light(const ElementGeom& geom, const Vec3& p,
                                     double tol,
                                     const std::vector<ParamBox>& boxes);

// Damped Newton from a caller-supplied seed; empty unless it converges
// to |x(root) - p| <= tol inside the reference cube.  Tracks one known
// branch across nearby points without the box search; callers must
// check the branch sign themselves.
std::optional<Vec3> polish_root(const ElementGeom& geom, const Vec3& p,
                                const Vec3& seed, double tol);

// Same, but accepts roots of the map's smooth extension up to |xi| 1.5.
// Where the root lands relative to the cube tells inside from outside
// for points near the element skin on a single branch.
std::optional<Vec3> polish_root_extended(const ElementGeom& geom,
                                         const Vec3& p, const Vec3& seed,
                                         double tol);

// Per-element (positive, negative) root counts at p and their oriented
// net sum over the mesh.  net = 1 characterizes points covered exactly
// once after fold cancellation.
struct OrientedCount {
  std::vector<std::pair<int, int>> per_element;
  int net = 0;
  bool ambiguous = false;
};

OrientedCount oriented_count(const Mesh& mesh, const Vec3& p);

} // namespace tfem

#endif
