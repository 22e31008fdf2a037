#include "tfem/classify.hpp"

#include "tfem/errors.hpp"

#include <cmath>

namespace tfem {

namespace {

struct LatticeScan {
  Vec3 best_plus, best_minus;
  double max_detj = -1e300;
  double min_detj = 1e300;
  Vec3 min_abs_at;
  double min_abs = 1e300;
};

LatticeScan scan(const ElementGeom& geom, const Vec3& lo, const Vec3& hi,
                 int grid) {
  LatticeScan s;
  for (int k = 0; k < grid; ++k)
    for (int j = 0; j < grid; ++j)
      for (int i = 0; i < grid; ++i) {
        const Vec3 f(i / double(grid - 1), j / double(grid - 1),
                     k / double(grid - 1));
        const Vec3 xi = lo + f.cwiseProduct(hi - lo);
        const double dj = jacobian(geom, xi).detJ;
        if (dj > s.max_detj) {
          s.max_detj = dj;
          s.best_plus = xi;
        }
        if (dj < s.min_detj) {
          s.min_detj = dj;
          s.best_minus = xi;
        }
        if (std::abs(dj) < s.min_abs) {
          s.min_abs = std::abs(dj);
          s.min_abs_at = xi;
        }
      }
  return s;
}

} // namespace

ElementClass classify_element(const ElementGeom& geom, int grid,
                              int refine_depth) {
  if (grid < 3) throw ValidationError("classify_element: grid must be >= 3");
  const double s3 = geom.scale * geom.scale * geom.scale;
  const double zero_band = 1e-12 * s3;

  // Degeneracy probe: det J identically ~0 on a full lattice face means
  // the element is squashed and sign classification is meaningless.
  for (int axis = 0; axis < 3; ++axis)
    for (double fixed : {-1.0, 1.0}) {
      bool all_zero = true;
      for (int j = 0; j < grid && all_zero; ++j)
        for (int i = 0; i < grid && all_zero; ++i) {
          Vec3 xi;
          xi[axis] = fixed;
          xi[(axis + 1) % 3] = -1.0 + 2.0 * i / (grid - 1);
          xi[(axis + 2) % 3] = -1.0 + 2.0 * j / (grid - 1);
          all_zero = std::abs(jacobian(geom, xi).detJ) <= zero_band;
        }
      if (all_zero)
        throw GeometryError(
            "classify_element: det J vanishes on a reference face "
            "(degenerate element)");
    }

  Vec3 lo(-1, -1, -1), hi(1, 1, 1);
  LatticeScan first = scan(geom, lo, hi, grid);
  if (first.max_detj > 0.0 && first.min_detj < 0.0)
    return {ElementKind::Concave, first.best_plus, first.best_minus};

  // No sign change on the coarse lattice: zoom in around the smallest
  // |det J| in case a thin inverted pocket slipped between samples.
  LatticeScan cur = first;
  for (int r = 0; r < refine_depth; ++r) {
    const Vec3 half = (hi - lo) / double(grid - 1); // one lattice spacing
    lo = (cur.min_abs_at - half).cwiseMax(Vec3(-1, -1, -1));
    hi = (cur.min_abs_at + half).cwiseMin(Vec3(1, 1, 1));
    const LatticeScan fine = scan(geom, lo, hi, grid);
    const double max_dj = std::max(first.max_detj, fine.max_detj);
    const double min_dj = std::min(first.min_detj, fine.min_detj);
    if (max_dj > 0.0 && min_dj < 0.0) {
      const Vec3 wp =
          first.max_detj >= fine.max_detj ? first.best_plus : fine.best_plus;
      const Vec3 wm =
          first.min_detj <= fine.min_detj ? first.best_minus : fine.best_minus;
      return {ElementKind::Concave, wp, wm};
    }
    cur = fine;
  }
  return {ElementKind::Convex, first.best_plus, first.best_plus};
}

} // namespace tfem
