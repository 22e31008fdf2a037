#include "tfem/hex_basis.hpp"

#include "tfem/errors.hpp"

#include <cmath>

namespace tfem {

Vec3 face_param(int face, double s, double t) {
  switch (face) {
  case 0: return {t, s, -1.0};
  case 1: return {s, t, +1.0};
  case 2: return {s, -1.0, t};
  case 3: return {+1.0, s, t};
  case 4: return {t, +1.0, s};
  case 5: return {-1.0, t, s};
  default: throw ValidationError("face_param: face index out of range");
  }
}

ShapeEval shape_eval(const Vec3& xi) {
  ShapeEval out;
  for (int i = 0; i < 8; ++i) {
    const double s1 = kCornerSign[i][0];
    const double s2 = kCornerSign[i][1];
    const double s3 = kCornerSign[i][2];
    const double f1 = 1.0 + s1 * xi[0];
    const double f2 = 1.0 + s2 * xi[1];
    const double f3 = 1.0 + s3 * xi[2];
    out.N[i] = 0.125 * f1 * f2 * f3;
    out.dN[i] = 0.125 * Vec3(s1 * f2 * f3, f1 * s2 * f3, f1 * f2 * s3);
  }
  return out;
}

ElementGeom ElementGeom::from_corners(const std::array<Vec3, 8>& x) {
  ElementGeom g;
  g.corner = x;
  for (int b = 0; b < 8; ++b) {
    const int b1 = b & 1, b2 = (b >> 1) & 1, b3 = (b >> 2) & 1;
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < 8; ++i) {
      double f = 1.0;
      if (b1) f *= kCornerSign[i][0];
      if (b2) f *= kCornerSign[i][1];
      if (b3) f *= kCornerSign[i][2];
      c += f * x[i];
    }
    g.coef[b] = 0.125 * c;
  }
  g.bbox_lo = x[0];
  g.bbox_hi = x[0];
  for (int i = 1; i < 8; ++i) {
    g.bbox_lo = g.bbox_lo.cwiseMin(x[i]);
    g.bbox_hi = g.bbox_hi.cwiseMax(x[i]);
  }
  g.scale = (g.bbox_hi - g.bbox_lo).norm();
  return g;
}

Vec3 map_to_physical(const ElementGeom& geom, const Vec3& xi) {
  const auto& c = geom.coef;
  const double x1 = xi[0], x2 = xi[1], x3 = xi[2];
  return c[0] + c[1] * x1 + c[2] * x2 + c[3] * (x1 * x2) + c[4] * x3 +
         c[5] * (x1 * x3) + c[6] * (x2 * x3) + c[7] * (x1 * x2 * x3);
}

JacobianEval jacobian(const ElementGeom& geom, const Vec3& xi) {
  const auto& c = geom.coef;
  const double x1 = xi[0], x2 = xi[1], x3 = xi[2];
  JacobianEval out;
  out.J.col(0) = c[1] + c[3] * x2 + c[5] * x3 + c[7] * (x2 * x3);
  out.J.col(1) = c[2] + c[3] * x1 + c[6] * x3 + c[7] * (x1 * x3);
  out.J.col(2) = c[4] + c[5] * x1 + c[6] * x2 + c[7] * (x1 * x2);
  out.detJ = out.J.determinant();
  const double s = geom.scale;
  out.invertible = std::abs(out.detJ) > 1e-14 * s * s * s;
  if (out.invertible) out.inv_T = out.J.inverse().transpose();
  return out;
}

GaussRule gauss_rule(int n) {
  GaussRule r;
  switch (n) {
  case 1:
    r.x = {0.0};
    r.w = {2.0};
    break;
  case 2: {
    const double a = 0.5773502691896257645091488;
    r.x = {-a, a};
    r.w = {1.0, 1.0};
    break;
  }
  case 3: {
    const double a = 0.7745966692414833770358531;
    r.x = {-a, 0.0, a};
    r.w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    break;
  }
  case 4: {
    const double a = 0.3399810435848562648026658;
    const double b = 0.8611363115940525752239465;
    const double wa = 0.6521451548625461426269361;
    const double wb = 0.3478548451374538573730639;
    r.x = {-b, -a, a, b};
    r.w = {wb, wa, wa, wb};
    break;
  }
  case 5: {
    const double a = 0.5384693101056830910363144;
    const double b = 0.9061798459386639927976269;
    const double wa = 0.4786286704993664680412915;
    const double wb = 0.2369268850561890875142640;
    const double w0 = 0.5688888888888888888888889;
    r.x = {-b, -a, 0.0, a, b};
    r.w = {wb, wa, w0, wa, wb};
    break;
  }
  default:
    throw ValidationError("gauss_rule: order must be in [1,5]");
  }
  return r;
}

std::vector<QuadPoint3> tensor_rule3(int n) {
  const GaussRule r = gauss_rule(n);
  std::vector<QuadPoint3> pts;
  pts.reserve(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        pts.push_back({Vec3(r.x[i], r.x[j], r.x[k]), r.w[i] * r.w[j] * r.w[k]});
  return pts;
}

std::vector<QuadPoint2> tensor_rule2(int n) {
  const GaussRule r = gauss_rule(n);
  std::vector<QuadPoint2> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      pts.push_back({r.x[i], r.x[j], r.w[i] * r.w[j]});
  return pts;
}

double signed_volume(const ElementGeom& geom, int n) {
  double v = 0.0;
  for (const auto& q : tensor_rule3(n)) v += q.w * jacobian(geom, q.xi).detJ;
  return v;
}

} // namespace tfem
