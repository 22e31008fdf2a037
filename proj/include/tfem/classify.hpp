#ifndef TFEM_CLASSIFY_HPP
#define TFEM_CLASSIFY_HPP

#include "tfem/hex_basis.hpp"

namespace tfem {

enum class ElementKind { Convex, Concave };

// Classification result.  For Concave elements the witnesses are
// reference points with det J of both signs.
struct ElementClass {
  ElementKind kind = ElementKind::Convex;
  Vec3 witness_plus = Vec3::Zero();
  Vec3 witness_minus = Vec3::Zero();
};

// Samples det J on a grid^3 lattice (corners included); a sign change
// is conclusive Concave.  Otherwise the lattice cell around the
// smallest |det J| is re-sampled at the same density up to refine_depth
// times before declaring Convex.  Throws GeometryError when det J
// vanishes identically on a lattice face (degenerate element).
ElementClass classify_element(const ElementGeom& geom, int grid = 6,
                              int refine_depth = 3);

} // namespace tfem

#endif
