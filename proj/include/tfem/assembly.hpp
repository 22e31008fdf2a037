#ifndef TFEM_ASSEMBLY_HPP
#define TFEM_ASSEMBLY_HPP

#include "tfem/fold.hpp"
#include "tfem/hex_basis.hpp"
#include "tfem/mesh.hpp"
#include "tfem/region_quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace tfem {

enum class JacobianMode { Signed, Absolute };

// Load assembly flavor: Tfem restricts folded boundary faces to the
// face region (the overlapping element's face covers the fold);
// Conventional is what an unaware solver computes: the prescribed
// outward flux integrated with the positive geometric area measure over
// the whole face, which disagrees with the signed stiffness wherever a
// face folds over.  The two coincide on untangled faces.
enum class LoadMode { Tfem, Conventional };

// Symmetric stiffness kept as deterministic (row, col, value) triplets.
struct GlobalStiffness {
  int n = 0;
  std::vector<Eigen::Triplet<double>> triplets;

  void add(int r, int c, double v) { triplets.emplace_back(r, c, v); }
  Eigen::MatrixXd dense() const;
};

// Conventional Galerkin stiffness with a full tensor Gauss rule on each
// element.  Signed mode keeps det J as-is (the erroneous baseline on
// tangled meshes); Absolute flips its sign where negative.  elements
// empty means all; the TFEM path passes the convex subset.  A
// quadrature point with |det J| below the singularity tolerance stops
// assembly with the element named.
GlobalStiffness assemble_standard(const Mesh& mesh, int order,
                                  JacobianMode mode,
                                  const std::vector<int>& elements = {});

// Stiffness block of one concave element integrated over its region
// quadrature, with physical gradients taken on the positive branch.
struct ElementContribution {
  int elem = -1;
  std::array<int, 8> nodes{};
  Eigen::Matrix<double, 8, 8> K;
};

ElementContribution assemble_concave(const Mesh& mesh, int elem,
                                     const RegionQuadrature& rq);

void scatter(GlobalStiffness& K, const ElementContribution& c);

// Fold-point equality constraints: raw row r scatters
// N(xi_plus_r) - N(xi_minus_r) over the owning element's nodes, then a
// rank-revealing QR at relative tolerance rank_tol keeps a maximal
// independent subset.  retained maps kept rows back to raw sample
// indices (ascending).
struct ConstraintMatrix {
  int n = 0;
  Eigen::MatrixXd rows;       // retained rows, m x n
  std::vector<int> retained;
  int raw_count = 0;

  int m() const { return static_cast<int>(rows.rows()); }
};

ConstraintMatrix assemble_constraints(const Mesh& mesh,
                                      const std::vector<FoldSamples>& samples,
                                      double rank_tol);

// Neumann load from the exact solution's flux g.n over every face set
// in bc.neumann_sets.  In Tfem mode folded faces use the face region
// quadrature at depth face_depth; untangled faces reduce to the full
// tensor rule in both modes.
Eigen::VectorXd assemble_load(const Mesh& mesh, const BoundarySpec& bc,
                              const ExactSolution& exact, int face_depth,
                              LoadMode mode);

// Dirichlet elimination: fixed nodes are every node on a face of the
// Dirichlet set, with values from the exact solution.  Their columns
// fold into the right-hand sides of both the primal block and the
// constraint block.
struct ReducedSystem {
  Eigen::MatrixXd K; // free x free
  Eigen::MatrixXd C; // m x free
  Eigen::VectorXd f; // free
  Eigen::VectorXd d; // m, constraint right-hand side
  std::vector<int> free_nodes, fixed_nodes;
  Eigen::VectorXd fixed_values;
  int n_total = 0;
};

ReducedSystem apply_dirichlet(const GlobalStiffness& K,
                              const ConstraintMatrix& C,
                              const Eigen::VectorXd& f, const Mesh& mesh,
                              const BoundarySpec& bc,
                              const ExactSolution& exact);

} // namespace tfem

#endif
