#include "tfem/solve.hpp"

#include "tfem/errors.hpp"
#include "tfem/invert.hpp"

#include <cmath>
#include <sstream>

namespace tfem {

SaddleSolution solve_saddle(const ReducedSystem& rs) {
  const int nf = static_cast<int>(rs.free_nodes.size());
  const int m = static_cast<int>(rs.C.rows());

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf + m, nf + m);
  A.topLeftCorner(nf, nf) = rs.K;
  if (m > 0) {
    A.bottomLeftCorner(m, nf) = rs.C;
    A.topRightCorner(nf, m) = rs.C.transpose();
  }
  Eigen::VectorXd rhs(nf + m);
  rhs.head(nf) = rs.f;
  rhs.tail(m) = rs.d;

  Eigen::VectorXd sol;
  if (nf + m > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < nf + m) {
      std::ostringstream os;
      os << "solve_saddle: bordered matrix is rank deficient (rank "
         << lu.rank() << " of " << nf + m << ")";
      throw SolveError(os.str());
    }
    sol = lu.solve(rhs);
  } else {
    sol = Eigen::VectorXd(0);
  }

  SaddleSolution out;
  out.u_hat = Eigen::VectorXd::Zero(rs.n_total);
  for (int a = 0; a < nf; ++a) out.u_hat[rs.free_nodes[a]] = sol[a];
  for (std::size_t k = 0; k < rs.fixed_nodes.size(); ++k)
    out.u_hat[rs.fixed_nodes[k]] = rs.fixed_values[k];
  out.mu = sol.tail(m);

  const Eigen::VectorXd uf = sol.head(nf);
  out.residual_primal =
      (rs.K * uf + (m > 0 ? (rs.C.transpose() * out.mu).eval()
                          : Eigen::VectorXd::Zero(nf).eval()) -
       rs.f)
          .norm();
  out.residual_constraint = m > 0 ? (rs.C * uf - rs.d).norm() : 0.0;
  const double fscale = std::max(rs.f.norm(), 1e-300);
  out.flagged = out.residual_primal > 1e-9 * fscale ||
                out.residual_constraint > 1e-9 * fscale;
  return out;
}

double field_at_point(const Mesh& mesh, const Eigen::VectorXd& u_hat,
                      const Vec3& p) {
  if (u_hat.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
    throw ValidationError("field_at_point: field length != node count");

  double value = 0.0;
  int net = 0;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const ElementGeom g = element_geom(mesh, e);
    const double m = 1e-12 * std::max(g.scale, 1.0);
    if ((p.array() < g.bbox_lo.array() - m).any() ||
        (p.array() > g.bbox_hi.array() + m).any())
      continue;
    const RootSet rs = invert_trilinear(g, p);
    const auto& nodes = mesh.elements[e].nodes;
    for (const Root& r : rs.roots) {
      const ShapeEval se = shape_eval(r.xi);
      double local = 0.0;
      for (int i = 0; i < 8; ++i) local += se.N[i] * u_hat[nodes[i]];
      value += r.sign * local;
      net += r.sign;
    }
  }
  if (net != 1) {
    std::ostringstream os;
    os << "field_at_point: net oriented cover is " << net
       << " (point outside the domain or on a seam)";
    throw GeometryError(os.str());
  }
  return value;
}

} // namespace tfem
