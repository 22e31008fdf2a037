#ifndef TFEM_SOLVE_HPP
#define TFEM_SOLVE_HPP

#include "tfem/assembly.hpp"
#include "tfem/mesh.hpp"

#include <Eigen/Dense>

namespace tfem {

struct SaddleSolution {
  Eigen::VectorXd u_hat; // full-length nodal field, fixed values reinserted
  Eigen::VectorXd mu;    // multipliers of the retained constraint rows
  double residual_primal = 0.0;
  double residual_constraint = 0.0;
  bool flagged = false; // residual above 1e-9 * |f|
};

// Direct pivoted factorization of the bordered system
// [K Ct; C 0] [u; mu] = [f; d].  With no constraint rows this is a
// plain solve of K u = f.  Rank deficiency raises SolveError.
SaddleSolution solve_saddle(const ReducedSystem& rs);

// Field value by the oriented sum over every component covering p:
// positive-branch contributions minus negative-branch ones.  Points
// whose net cover is not exactly one (outside the domain, or on a
// seam) raise GeometryError.
double field_at_point(const Mesh& mesh, const Eigen::VectorXd& u_hat,
                      const Vec3& p);

} // namespace tfem

#endif
