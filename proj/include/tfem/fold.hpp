#ifndef TFEM_FOLD_HPP
#define TFEM_FOLD_HPP

#include "tfem/hex_basis.hpp"
#include "tfem/mesh.hpp"

#include <vector>

namespace tfem {

// One physical fold point with its two reference-space branches.
struct FoldSample {
  Vec3 p;
  Vec3 xi_plus;  // det J > 0 branch
  Vec3 xi_minus; // det J < 0 branch
};

struct FoldSamples {
  int elem = -1; // element position in the mesh
  std::vector<FoldSample> samples;
  bool complete = true; // false when the attempt budget ran out early
};

// Draws >= target_count points strictly inside the fold of a concave
// element: low-discrepancy (Halton 2/3/5) points in the negative-det J
// reference region, mapped forward and kept only when inversion
// confirms exactly one branch of each sign, none ambiguous.  seed
// offsets the Halton sequence so independent runs decorrelate while one
// (mesh, elem, seed) triple stays deterministic.  Throws GeometryError
// for convex elements.
FoldSamples fold_sample_points(const Mesh& mesh, int elem, int target_count,
                               unsigned seed = 0);

} // namespace tfem

#endif
