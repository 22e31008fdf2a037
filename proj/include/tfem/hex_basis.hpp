#ifndef TFEM_HEX_BASIS_HPP
#define TFEM_HEX_BASIS_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace tfem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Reference corner i sits at (sign[i][0], sign[i][1], sign[i][2]).
// Bottom face xi3 = -1 counterclockwise, then top face xi3 = +1.
inline constexpr std::array<std::array<double, 3>, 8> kCornerSign = {{
    {-1, -1, -1},
    {+1, -1, -1},
    {+1, +1, -1},
    {-1, +1, -1},
    {-1, -1, +1},
    {+1, -1, +1},
    {+1, +1, +1},
    {-1, +1, +1},
}};

// Local face f -> 4 corner indices ordered so that, with the face
// parametrization below, d x/ds x d x/dt points out of the element.
// 0: xi3=-1  1: xi3=+1  2: xi2=-1  3: xi1=+1  4: xi2=+1  5: xi1=-1
inline constexpr std::array<std::array<int, 4>, 6> kFaceCorner = {{
    {0, 3, 2, 1},
    {4, 5, 6, 7},
    {0, 1, 5, 4},
    {1, 2, 6, 5},
    {3, 7, 6, 2},
    {0, 4, 7, 3},
}};

// Embeds face coordinates (s,t) in [-1,1]^2 into the reference cube.
// Consistent with kFaceCorner: corner k of face f is at
// (s,t) = (-1,-1), (1,-1), (1,1), (-1,1) for k = 0..3.
Vec3 face_param(int face, double s, double t);

// Trilinear shape functions and their reference gradients at xi.
struct ShapeEval {
  std::array<double, 8> N;
  std::array<Vec3, 8> dN; // d N_i / d xi
};

ShapeEval shape_eval(const Vec3& xi);

// Geometry of one hexahedral element.  coef stores the map in monomial
// form x(xi) = sum_b coef[b] xi1^b1 xi2^b2 xi3^b3 with b in {0,1}^3 and
// b = b1 + 2*b2 + 4*b3, which makes Jacobian evaluation and the interval
// bounds used by point inversion cheap.
struct ElementGeom {
  std::array<Vec3, 8> corner;   // physical corner coordinates
  std::array<Vec3, 8> coef;     // monomial coefficients of the map
  Vec3 bbox_lo, bbox_hi;        // axis-aligned bounds of the corners
  double scale = 0.0;           // bbox diagonal length

  static ElementGeom from_corners(const std::array<Vec3, 8>& x);
};

Vec3 map_to_physical(const ElementGeom& geom, const Vec3& xi);

// Jacobian of the map at xi.  invertible is false when |det J| falls
// below 1e-14 * scale^3; inv_T is only valid when invertible.
struct JacobianEval {
  Mat3 J;
  double detJ = 0.0;
  bool invertible = false;
  Mat3 inv_T; // J^{-T}, for pushing reference gradients forward
};

JacobianEval jacobian(const ElementGeom& geom, const Vec3& xi);

// Gauss-Legendre rule with n points on [-1,1], n in [1,5].
// Weights sum to 2.
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

GaussRule gauss_rule(int n);

struct QuadPoint3 {
  Vec3 xi;
  double w;
};

struct QuadPoint2 {
  double s, t, w;
};

// Tensor products of gauss_rule(n) over the cube / square.
std::vector<QuadPoint3> tensor_rule3(int n);
std::vector<QuadPoint2> tensor_rule2(int n);

// Signed volume int det J d xi via an order-n tensor rule.  det J has
// degree <= 2 per variable, so n >= 2 integrates it exactly.
double signed_volume(const ElementGeom& geom, int n);

} // namespace tfem

#endif
