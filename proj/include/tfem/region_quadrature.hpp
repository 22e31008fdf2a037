#ifndef TFEM_REGION_QUADRATURE_HPP
#define TFEM_REGION_QUADRATURE_HPP

#include "tfem/hex_basis.hpp"
#include "tfem/mesh.hpp"

#include <vector>

namespace tfem {

// One physical quadrature point of the concave-element region with its
// positive-branch reference coordinates.
struct RQPoint {
  Vec3 x;
  double w; // physical volume weight
  Vec3 xi_plus;
};

struct RegionQuadrature {
  int elem = -1; // element position in the mesh
  std::vector<RQPoint> points;
  int depth = 0;
};

// Quadrature over the region enclosed by a concave element's physical
// boundary minus its fold: an adaptive octree over the element bounding
// box.  Cells whose preimage candidates are safely away from both the
// det J = 0 surface and the reference-cube skin have uniform membership
// and are settled by one center test; membership means inversion yields
// exactly one positive-branch root and no negative one.  Member cells
// subdivide to depth-2 for integrand accuracy and then carry a tensor
// Gauss rule of order cell_order; cells still risky at max depth are
// resolved by 27 individually tested subcell centers with fractional
// weights.  Deterministic for fixed inputs.
RegionQuadrature concave_region_quadrature(const Mesh& mesh, int elem,
                                           int depth, int cell_order = 2);

} // namespace tfem

#endif
