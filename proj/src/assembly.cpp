#include "tfem/assembly.hpp"

#include "tfem/errors.hpp"
#include "tfem/face_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tfem {

Eigen::MatrixXd GlobalStiffness::dense() const {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : triplets) K(t.row(), t.col()) += t.value();
  return K;
}

GlobalStiffness assemble_standard(const Mesh& mesh, int order,
                                  JacobianMode mode,
                                  const std::vector<int>& elements) {
  if (order < 2)
    throw ValidationError("assemble_standard: order must be >= 2");

  std::vector<int> elems = elements;
  if (elems.empty())
    for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e)
      elems.push_back(e);

  GlobalStiffness K;
  K.n = static_cast<int>(mesh.nodes.size());
  const auto rule = tensor_rule3(order);

  for (int e : elems) {
    const ElementGeom geom = element_geom(mesh, e);
    const double s = geom.scale;
    const double sing = 1e-14 * s * s * s;
    Eigen::Matrix<double, 8, 8> Ke = Eigen::Matrix<double, 8, 8>::Zero();
    for (const QuadPoint3& q : rule) {
      const JacobianEval je = jacobian(geom, q.xi);
      if (std::abs(je.detJ) <= sing) {
        std::ostringstream os;
        os << "assemble_standard: singular Jacobian at a quadrature point "
              "of element "
           << mesh.elements[e].id
           << (mode == JacobianMode::Absolute ? " (absolute mode)"
                                              : " (signed mode)");
        throw SolveError(os.str());
      }
      const double dj =
          mode == JacobianMode::Absolute ? std::abs(je.detJ) : je.detJ;
      const ShapeEval se = shape_eval(q.xi);
      std::array<Vec3, 8> grad;
      for (int i = 0; i < 8; ++i) grad[i] = je.inv_T * se.dN[i];
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          Ke(i, j) += q.w * dj * grad[i].dot(grad[j]);
    }
    const auto& nodes = mesh.elements[e].nodes;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) K.add(nodes[i], nodes[j], Ke(i, j));
  }
  return K;
}

ElementContribution assemble_concave(const Mesh& mesh, int elem,
                                     const RegionQuadrature& rq) {
  if (rq.elem != elem)
    throw ValidationError(
        "assemble_concave: quadrature belongs to a different element");
  const ElementGeom geom = element_geom(mesh, elem);
  ElementContribution c;
  c.elem = elem;
  c.nodes = mesh.elements[elem].nodes;
  c.K.setZero();
  for (const RQPoint& q : rq.points) {
    const JacobianEval je = jacobian(geom, q.xi_plus);
    if (!je.invertible) {
      std::ostringstream os;
      os << "assemble_concave: non-invertible Jacobian at a region point "
            "of element "
         << mesh.elements[elem].id;
      throw SolveError(os.str());
    }
    const ShapeEval se = shape_eval(q.xi_plus);
    std::array<Vec3, 8> grad;
    for (int i = 0; i < 8; ++i) grad[i] = je.inv_T * se.dN[i];
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) c.K(i, j) += q.w * grad[i].dot(grad[j]);
  }
  return c;
}

void scatter(GlobalStiffness& K, const ElementContribution& c) {
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) K.add(c.nodes[i], c.nodes[j], c.K(i, j));
}

ConstraintMatrix assemble_constraints(const Mesh& mesh,
                                      const std::vector<FoldSamples>& samples,
                                      double rank_tol) {
  ConstraintMatrix cm;
  cm.n = static_cast<int>(mesh.nodes.size());

  std::vector<Eigen::VectorXd> raw;
  for (const FoldSamples& fs : samples) {
    if (fs.samples.empty())
      throw ValidationError(
          "assemble_constraints: empty sample set for an element");
    const auto& nodes = mesh.elements[fs.elem].nodes;
    for (const FoldSample& smp : fs.samples) {
      const ShapeEval plus = shape_eval(smp.xi_plus);
      const ShapeEval minus = shape_eval(smp.xi_minus);
      Eigen::VectorXd row = Eigen::VectorXd::Zero(cm.n);
      for (int i = 0; i < 8; ++i)
        row[nodes[i]] += plus.N[i] - minus.N[i];
      raw.push_back(row);
    }
  }
  cm.raw_count = static_cast<int>(raw.size());
  if (raw.empty()) return cm;

  // Column-pivoted QR of the transposed row stack picks a maximal
  // independent subset of rows; pivot order maps back to sample index.
  Eigen::MatrixXd At(cm.n, cm.raw_count);
  for (int j = 0; j < cm.raw_count; ++j) At.col(j) = raw[j];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
  qr.setThreshold(rank_tol);
  const int rank = static_cast<int>(qr.rank());
  if (rank == 0) return cm; // fold degenerate; caller sees m() == 0

  const auto& perm = qr.colsPermutation().indices();
  cm.retained.assign(perm.data(), perm.data() + rank);
  std::sort(cm.retained.begin(), cm.retained.end());
  cm.rows.resize(rank, cm.n);
  for (int r = 0; r < rank; ++r) cm.rows.row(r) = raw[cm.retained[r]];
  return cm;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const BoundarySpec& bc,
                              const ExactSolution& exact, int face_depth,
                              LoadMode mode) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.nodes.size());
  const Vec3 g = exact.gradient;

  for (const std::string& set_name : bc.neumann_sets) {
    const auto it = mesh.face_sets.find(set_name);
    if (it == mesh.face_sets.end())
      throw ValidationError("assemble_load: no face set '" + set_name + "'");
    for (const FaceRef& fr : it->second) {
      const auto& nodes = mesh.elements[fr.elem].nodes;
      if (mode == LoadMode::Conventional) {
        // On a valid face the prescribed outward flux times the
        // geometric area element equals g . (dx/ds x dx/dt) exactly.
        // On a folded face the cross flips where the element inverts
        // while the prescribed flux keeps the face's outward direction,
        // so the integrand becomes (g . n) |cross|; that mismatch with
        // the signed stiffness is the conventional solver's error.
        const FaceGeom fg = face_geom(mesh, fr.elem, fr.face);
        const bool folded = face_tangled(fg);
        for (const QuadPoint2& q : tensor_rule2(2)) {
          const Vec3 cr = face_cross(fg, q.s, q.t);
          const double flux_da =
              (folded ? g.dot(fg.unit_normal) * cr.norm() : g.dot(cr)) * q.w;
          const ShapeEval se =
              shape_eval(face_param(fr.face, q.s, q.t));
          for (int i = 0; i < 8; ++i)
            f[nodes[i]] += flux_da * se.N[i];
        }
        continue;
      }
      const FaceRegionQuadrature fq =
          face_region_quadrature(mesh, fr.elem, fr.face, face_depth);
      const FaceGeom fg = face_geom(mesh, fr.elem, fr.face);
      for (const FQPoint& q : fq.points) {
        Vec3 normal = fq.unit_normal;
        if (!fg.planar)
          normal = face_cross(fg, q.s_plus, q.t_plus).normalized();
        const double flux = g.dot(normal);
        const ShapeEval se =
            shape_eval(face_param(fr.face, q.s_plus, q.t_plus));
        for (int i = 0; i < 8; ++i) f[nodes[i]] += q.w * flux * se.N[i];
      }
    }
  }
  return f;
}

ReducedSystem apply_dirichlet(const GlobalStiffness& K,
                              const ConstraintMatrix& C,
                              const Eigen::VectorXd& f, const Mesh& mesh,
                              const BoundarySpec& bc,
                              const ExactSolution& exact) {
  const int n = static_cast<int>(mesh.nodes.size());
  if (K.n != n || f.size() != n || (C.m() > 0 && C.n != n))
    throw ValidationError("apply_dirichlet: dimension mismatch");

  const auto it = mesh.face_sets.find(bc.dirichlet_set);
  if (it == mesh.face_sets.end() || it->second.empty())
    throw ValidationError("apply_dirichlet: empty Dirichlet set '" +
                          bc.dirichlet_set + "'");

  std::set<int> fixed;
  for (const FaceRef& fr : it->second)
    for (int idx : face_node_indices(mesh, fr.elem, fr.face))
      fixed.insert(idx);

  ReducedSystem rs;
  rs.n_total = n;
  rs.fixed_nodes.assign(fixed.begin(), fixed.end());
  for (int i = 0; i < n; ++i)
    if (!fixed.count(i)) rs.free_nodes.push_back(i);

  rs.fixed_values.resize(rs.fixed_nodes.size());
  for (std::size_t k = 0; k < rs.fixed_nodes.size(); ++k)
    rs.fixed_values[k] = exact.value(mesh.nodes[rs.fixed_nodes[k]].coords);

  const Eigen::MatrixXd Kd = K.dense();
  const int nf = static_cast<int>(rs.free_nodes.size());
  const int nx = static_cast<int>(rs.fixed_nodes.size());
  const int m = C.m();

  rs.K.resize(nf, nf);
  rs.f.resize(nf);
  Eigen::MatrixXd Kfx(nf, nx);
  for (int a = 0; a < nf; ++a) {
    const int i = rs.free_nodes[a];
    for (int b = 0; b < nf; ++b) rs.K(a, b) = Kd(i, rs.free_nodes[b]);
    for (int b = 0; b < nx; ++b) Kfx(a, b) = Kd(i, rs.fixed_nodes[b]);
  }
  for (int a = 0; a < nf; ++a) rs.f[a] = f[rs.free_nodes[a]];
  rs.f -= Kfx * rs.fixed_values;

  rs.C.resize(m, nf);
  rs.d = Eigen::VectorXd::Zero(m);
  if (m > 0) {
    for (int a = 0; a < nf; ++a) rs.C.col(a) = C.rows.col(rs.free_nodes[a]);
    Eigen::MatrixXd Cfx(m, nx);
    for (int b = 0; b < nx; ++b) Cfx.col(b) = C.rows.col(rs.fixed_nodes[b]);
    rs.d = -Cfx * rs.fixed_values;

    // Rows independent over all nodes can become dependent once the
    // fixed columns are stripped (a fold touching the Dirichlet face),
    // which would make the bordered matrix singular.  Re-filter on the
    // free columns; a dropped row is a combination of the kept ones and
    // its right-hand side is consistent by construction.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rs.C.transpose());
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < m) {
      std::vector<int> keep(qr.colsPermutation().indices().data(),
                            qr.colsPermutation().indices().data() + rank);
      std::sort(keep.begin(), keep.end());
      Eigen::MatrixXd Ck(rank, nf);
      Eigen::VectorXd dk(rank);
      for (int r = 0; r < rank; ++r) {
        Ck.row(r) = rs.C.row(keep[r]);
        dk[r] = rs.d[keep[r]];
      }
      rs.C = std::move(Ck);
      rs.d = std::move(dk);
    }
  }
  return rs;
}

} // namespace tfem
