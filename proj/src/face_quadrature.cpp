#include "tfem/face_quadrature.hpp"

#include "tfem/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tfem {

FaceGeom face_geom(const Mesh& mesh, int e, int f) {
  const std::array<int, 4> idx = face_node_indices(mesh, e, f);
  FaceGeom fg;
  for (int k = 0; k < 4; ++k) fg.corner[k] = mesh.nodes[idx[k]].coords;
  const auto& P = fg.corner;
  fg.coef[0] = 0.25 * (P[0] + P[1] + P[2] + P[3]);
  fg.coef[1] = 0.25 * (-P[0] + P[1] + P[2] - P[3]);
  fg.coef[2] = 0.25 * (-P[0] - P[1] + P[2] + P[3]);
  fg.coef[3] = 0.25 * (P[0] - P[1] + P[2] - P[3]);

  Vec3 lo = P[0], hi = P[0];
  for (int k = 1; k < 4; ++k) {
    lo = lo.cwiseMin(P[k]);
    hi = hi.cwiseMax(P[k]);
  }
  fg.scale = (hi - lo).norm();

  // Center cross works even on folded faces (net orientation stays
  // outward); the corner diagonals are the fallback for darts whose
  // center happens to sit on the density zero line.
  Vec3 n = fg.coef[1].cross(fg.coef[2]);
  if (n.norm() < 1e-12 * fg.scale * fg.scale)
    n = (P[2] - P[0]).cross(P[3] - P[1]);
  if (n.norm() < 1e-12 * fg.scale * fg.scale)
    throw GeometryError("face_geom: degenerate face (vanishing area)");
  fg.unit_normal = n.normalized();

  fg.planar = true;
  for (int k = 0; k < 4; ++k)
    if (std::abs((P[k] - fg.coef[0]).dot(fg.unit_normal)) >
        1e-9 * fg.scale)
      fg.planar = false;
  return fg;
}

Vec3 face_map(const FaceGeom& fg, double s, double t) {
  return fg.coef[0] + fg.coef[1] * s + fg.coef[2] * t + fg.coef[3] * (s * t);
}

Vec3 face_cross(const FaceGeom& fg, double s, double t) {
  return (fg.coef[1] + fg.coef[3] * t).cross(fg.coef[2] + fg.coef[3] * s);
}

namespace {

using Vec2 = Eigen::Vector2d;

// In-plane view of a planar face: 2D bilinear map u(s,t) = b s + c t +
// d s t relative to the centroid, in units of the face scale.
struct PlanarFrame {
  Vec3 origin, e1, e2;
  Vec2 b, c, d;
  double len; // normalization length

  Vec2 project(const Vec3& x) const {
    const Vec3 r = x - origin;
    return Vec2(r.dot(e1) / len, r.dot(e2) / len);
  }

  Vec2 eval(double s, double t) const { return b * s + c * t + d * (s * t); }

  // Area density relative to the outward normal, affine in (s,t).
  double j(double s, double t) const {
    const Vec2 ds = b + d * t, dt = c + d * s;
    return ds[0] * dt[1] - ds[1] * dt[0];
  }
};

PlanarFrame make_frame(const FaceGeom& fg) {
  PlanarFrame fr;
  fr.origin = fg.coef[0];
  fr.len = std::max(fg.scale, 1e-300);
  Vec3 a = fg.corner[1] - fg.corner[0];
  if (a.norm() < 1e-12 * fr.len) a = fg.corner[2] - fg.corner[0];
  fr.e1 = (a - a.dot(fg.unit_normal) * fg.unit_normal).normalized();
  fr.e2 = fg.unit_normal.cross(fr.e1);
  auto flat = [&fr](const Vec3& v) {
    return Vec2(v.dot(fr.e1) / fr.len, v.dot(fr.e2) / fr.len);
  };
  fr.b = flat(fg.coef[1]);
  fr.c = flat(fg.coef[2]);
  fr.d = flat(fg.coef[3]);
  return fr;
}

void polish_2d(const PlanarFrame& fr, const Vec2& r, double& s, double& t) {
  for (int it = 0; it < 3; ++it) {
    const Vec2 res = fr.eval(s, t) - r;
    const Vec2 ds = fr.b + fr.d * t, dt = fr.c + fr.d * s;
    const double det = ds[0] * dt[1] - ds[1] * dt[0];
    if (std::abs(det) < 1e-300) return;
    s -= (res[0] * dt[1] - res[1] * dt[0]) / det;
    t -= (ds[0] * res[1] - ds[1] * res[0]) / det;
  }
}

} // namespace

std::vector<FaceRoot> invert_bilinear_face(const FaceGeom& fg, const Vec3& p,
                                           double tol) {
  if (!fg.planar)
    throw GeometryError("invert_bilinear_face: face is not planar");
  std::vector<FaceRoot> out;
  if (std::abs((p - fg.coef[0]).dot(fg.unit_normal)) > tol) return out;

  const PlanarFrame fr = make_frame(fg);
  const Vec2 r = fr.project(p);

  // Eliminating t leaves a quadratic in s.
  const double A = fr.b[1] * fr.d[0] - fr.b[0] * fr.d[1];
  const double B = fr.b[1] * fr.c[0] - fr.b[0] * fr.c[1] + fr.d[1] * r[0] -
                   fr.d[0] * r[1];
  const double C = fr.c[1] * r[0] - fr.c[0] * r[1];

  double s_candidates[2];
  int n_s = 0;
  if (std::abs(A) <= 1e-12) {
    if (std::abs(B) > 1e-12) s_candidates[n_s++] = -C / B;
  } else {
    double D = B * B - 4.0 * A * C;
    if (D >= -1e-12 * std::max(B * B, std::abs(4.0 * A * C))) {
      D = std::max(D, 0.0);
      const double q = -0.5 * (B + std::copysign(std::sqrt(D), B));
      if (std::abs(q) > 1e-300) {
        s_candidates[n_s++] = q / A;
        s_candidates[n_s++] = C / q;
      } else {
        s_candidates[n_s++] = 0.0; // B ~ 0 and D ~ 0: double root at origin
      }
    }
  }

  const double band = 1e-8; // on normalized j; scale^2 already divided out
  for (int i = 0; i < n_s; ++i) {
    double s = s_candidates[i];
    const double den1 = fr.c[0] + fr.d[0] * s;
    const double den2 = fr.c[1] + fr.d[1] * s;
    double t;
    if (std::abs(den1) >= std::abs(den2)) {
      if (std::abs(den1) < 1e-300) continue;
      t = (r[0] - fr.b[0] * s) / den1;
    } else {
      t = (r[1] - fr.b[1] * s) / den2;
    }
    polish_2d(fr, r, s, t);
    if (s < -1.0 - 1e-12 || s > 1.0 + 1e-12 || t < -1.0 - 1e-12 ||
        t > 1.0 + 1e-12)
      continue;
    if ((face_map(fg, s, t) - p).norm() > std::max(tol, 1e-12 * fr.len))
      continue;
    bool dup = false;
    for (const FaceRoot& fr0 : out)
      if (std::hypot(fr0.s - s, fr0.t - t) <= 1e-8) dup = true;
    if (dup) continue;
    FaceRoot root;
    root.s = s;
    root.t = t;
    const double jn = fr.j(s, t); // normalized by len^2
    root.j = jn * fr.len * fr.len;
    root.sign = jn >= 0.0 ? +1 : -1;
    root.ambiguous = std::abs(jn) < band;
    out.push_back(root);
  }
  std::sort(out.begin(), out.end(), [](const FaceRoot& a, const FaceRoot& b) {
    if (a.s != b.s) return a.s < b.s;
    return a.t < b.t;
  });
  return out;
}

namespace {

struct Rect {
  Vec2 lo, hi;
};

struct FaceBuilder {
  const FaceGeom& fg;
  PlanarFrame fr;
  int max_depth;
  std::vector<QuadPoint2> cell_rule;
  double tol;
  std::vector<FQPoint> out;

  bool member(const Vec2& uv, double* s_plus, double* t_plus) const {
    const Vec3 p = fr.origin + fr.len * (uv[0] * fr.e1 + uv[1] * fr.e2);
    const auto roots = invert_bilinear_face(fg, p, tol);
    int np = 0, nm = 0;
    for (const FaceRoot& r : roots) {
      if (r.ambiguous) return false;
      (r.sign > 0 ? np : nm)++;
      if (r.sign > 0) {
        *s_plus = r.s;
        *t_plus = r.t;
      }
    }
    return np == 1 && nm == 0;
  }

  // Exact per-component range of the in-plane map over a rect (bilinear:
  // extrema at corners), used to keep only rects that can reach a cell.
  Rect image_range(const Rect& r) const {
    Rect out;
    for (int c = 0; c < 4; ++c) {
      const double s = (c & 1) ? r.hi[0] : r.lo[0];
      const double t = (c & 2) ? r.hi[1] : r.lo[1];
      const Vec2 v = fr.eval(s, t);
      if (c == 0) {
        out.lo = v;
        out.hi = v;
      } else {
        out.lo = out.lo.cwiseMin(v);
        out.hi = out.hi.cwiseMax(v);
      }
    }
    return out;
  }

  std::vector<Rect> refine(const std::vector<Rect>& in, const Vec2& lo,
                           const Vec2& hi, int level) const {
    const double target =
        std::max(2.0 * std::pow(0.5, level), 2.0 / 128.0) * 1.0001;
    const double eps = 1e-12;
    std::vector<Rect> work = in, kept;
    while (!work.empty()) {
      Rect b = work.back();
      work.pop_back();
      const Rect img = image_range(b);
      if (img.hi[0] < lo[0] - eps || img.lo[0] > hi[0] + eps ||
          img.hi[1] < lo[1] - eps || img.lo[1] > hi[1] + eps)
        continue;
      const Vec2 side = b.hi - b.lo;
      const int axis = side[1] > side[0] ? 1 : 0;
      if (side[axis] <= target) {
        kept.push_back(b);
        continue;
      }
      const double mid = 0.5 * (b.lo[axis] + b.hi[axis]);
      Rect a = b, c = b;
      a.hi[axis] = mid;
      c.lo[axis] = mid;
      work.push_back(a);
      work.push_back(c);
    }
    return kept;
  }

  void recurse(const Vec2& lo, const Vec2& hi, int level,
               const std::vector<Rect>& rects_in) {
    const std::vector<Rect> rects = refine(rects_in, lo, hi, level);
    if (rects.empty()) return;

    bool fold_risk = false, skin = false;
    for (const Rect& b : rects) {
      // Affine density: corner values bound it exactly.
      double jmin = 1e300, jmax = -1e300;
      for (int c = 0; c < 4; ++c) {
        const double jv = fr.j((c & 1) ? b.hi[0] : b.lo[0],
                               (c & 2) ? b.hi[1] : b.lo[1]);
        jmin = std::min(jmin, jv);
        jmax = std::max(jmax, jv);
      }
      if (jmin <= 1e-12 && jmax >= -1e-12) fold_risk = true;
      if (b.lo[0] <= -1.0 + 1e-9 || b.hi[0] >= 1.0 - 1e-9 ||
          b.lo[1] <= -1.0 + 1e-9 || b.hi[1] >= 1.0 - 1e-9)
        skin = true;
      if (fold_risk && skin) break;
    }

    if (!fold_risk && !skin) {
      const Vec2 center = 0.5 * (lo + hi);
      double sp = 0.0, tp = 0.0;
      if (!member(center, &sp, &tp)) return;
      if (level < max_depth - 2) {
        subdivide(lo, hi, level, rects);
        return;
      }
      const Vec2 half = 0.5 * (hi - lo);
      const double area = (hi - lo).prod() * fr.len * fr.len;
      for (const QuadPoint2& q : cell_rule) {
        const Vec2 uv = center + Vec2(half[0] * q.s, half[1] * q.t);
        if (member(uv, &sp, &tp))
          out.push_back({fr.origin +
                             fr.len * (uv[0] * fr.e1 + uv[1] * fr.e2),
                         area * q.w / 4.0, sp, tp});
      }
      return;
    }

    if (level < max_depth) {
      subdivide(lo, hi, level, rects);
      return;
    }

    const Vec2 h = (hi - lo) / 3.0;
    const double w = (hi - lo).prod() * fr.len * fr.len / 9.0;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        const Vec2 uv = lo + Vec2(h[0] * (i + 0.5), h[1] * (j + 0.5));
        double sp = 0.0, tp = 0.0;
        if (member(uv, &sp, &tp))
          out.push_back({fr.origin + fr.len * (uv[0] * fr.e1 + uv[1] * fr.e2),
                         w, sp, tp});
      }
  }

  void subdivide(const Vec2& lo, const Vec2& hi, int level,
                 const std::vector<Rect>& rects) {
    const Vec2 mid = 0.5 * (lo + hi);
    for (int q = 0; q < 4; ++q) {
      Vec2 clo = lo, chi = hi;
      if (q & 1) clo[0] = mid[0];
      else chi[0] = mid[0];
      if (q & 2) clo[1] = mid[1];
      else chi[1] = mid[1];
      recurse(clo, chi, level + 1, rects);
    }
  }
};

} // namespace

bool face_tangled(const FaceGeom& fg) {
  double jmin = 1e300, jmax = -1e300;
  const double band = 1e-12 * fg.scale * fg.scale;
  for (int c = 0; c < 5; ++c) {
    const double s = c == 4 ? 0.0 : ((c & 1) ? 1.0 : -1.0);
    const double t = c == 4 ? 0.0 : ((c & 2) ? 1.0 : -1.0);
    const double jv = face_cross(fg, s, t).dot(fg.unit_normal);
    jmin = std::min(jmin, jv);
    jmax = std::max(jmax, jv);
  }
  return jmin < -band && jmax > band;
}

FaceRegionQuadrature face_region_quadrature(const Mesh& mesh, int e, int f,
                                            int depth, int cell_order) {
  if (!is_exterior_face(mesh, e, f))
    throw ValidationError("face_region_quadrature: face is not exterior");
  const FaceGeom fg = face_geom(mesh, e, f);

  FaceRegionQuadrature out;
  out.elem = e;
  out.face = f;
  out.depth = depth;
  out.unit_normal = fg.unit_normal;
  out.tangled = face_tangled(fg);

  if (!out.tangled) {
    // Untangled: plain tensor rule over the whole face.  Weight is the
    // area density (its projection on the fixed normal for planar
    // faces, which the rule integrates exactly).
    for (const QuadPoint2& q : tensor_rule2(std::max(cell_order, 2))) {
      const Vec3 cr = face_cross(fg, q.s, q.t);
      const double w = fg.planar ? cr.dot(fg.unit_normal) : cr.norm();
      out.points.push_back({face_map(fg, q.s, q.t), w * q.w, q.s, q.t});
    }
    return out;
  }

  if (!fg.planar)
    throw GeometryError(
        "face_region_quadrature: folded non-planar face is unsupported");
  if (depth < 2)
    throw ValidationError("face_region_quadrature: depth must be >= 2");

  FaceBuilder b{fg,
                make_frame(fg),
                depth,
                tensor_rule2(cell_order),
                1e-9 * fg.scale,
                {}};
  // In-plane bounding rectangle of the corners.
  Vec2 lo = b.fr.project(fg.corner[0]), hi = lo;
  for (int k = 1; k < 4; ++k) {
    const Vec2 v = b.fr.project(fg.corner[k]);
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  b.recurse(lo, hi, 0, {{Vec2(-1, -1), Vec2(1, 1)}});

  if (b.out.empty())
    throw GeometryError(
        "face_region_quadrature: no face region resolved at this depth");
  out.points = std::move(b.out);
  return out;
}

} // namespace tfem
