#include "tfem/invert.hpp"

#include "tfem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace tfem {

namespace {

// Relative tolerance constants.  All physical comparisons scale with
// the element bounding-box diagonal so behavior is mesh-size free.
constexpr double kDedupTol = 1e-8;     // reference-space root identity
constexpr double kAmbigRel = 1e-8;     // |detJ| band around the fold surface
constexpr double kOvershoot = 1e-12;   // allowed excursion outside [-1,1]
constexpr double kLeafSide = 2.0 / 32;   // box side that switches to Newton
constexpr double kTightLeaf = 2.0 / 128; // same threshold for light searches
constexpr int kMaxNewton = 50;

Interval mul(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi;
  const double p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {std::min(std::min(p1, p2), std::min(p3, p4)),
          std::max(std::max(p1, p2), std::max(p3, p4))};
}

Interval add(const Interval& a, const Interval& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}

Interval sub(const Interval& a, const Interval& b) {
  return {a.lo - b.hi, a.hi - b.lo};
}

// Range of one Jacobian column over the box.  Column k depends
// bilinearly on the two variables other than k, so evaluating at the
// four corners of that 2D face gives exact per-component bounds.
std::array<Interval, 3> column_range(const ElementGeom& g, int k,
                                     const ParamBox& box) {
  const auto& c = g.coef;
  const int u = (k + 1) % 3, v = (k + 2) % 3;
  std::array<Interval, 3> out;
  for (int corner = 0; corner < 4; ++corner) {
    Vec3 xi = Vec3::Zero();
    xi[u] = (corner & 1) ? box.hi[u] : box.lo[u];
    xi[v] = (corner & 2) ? box.hi[v] : box.lo[v];
    Vec3 col;
    switch (k) {
    case 0: col = c[1] + c[3] * xi[1] + c[5] * xi[2] + c[7] * (xi[1] * xi[2]); break;
    case 1: col = c[2] + c[3] * xi[0] + c[6] * xi[2] + c[7] * (xi[0] * xi[2]); break;
    default: col = c[4] + c[5] * xi[0] + c[6] * xi[1] + c[7] * (xi[0] * xi[1]); break;
    }
    for (int m = 0; m < 3; ++m) {
      if (corner == 0) {
        out[m] = {col[m], col[m]};
      } else {
        out[m].lo = std::min(out[m].lo, col[m]);
        out[m].hi = std::max(out[m].hi, col[m]);
      }
    }
  }
  return out;
}

} // namespace

Interval detj_interval(const ElementGeom& geom, const ParamBox& box) {
  const auto c0 = column_range(geom, 0, box);
  const auto c1 = column_range(geom, 1, box);
  const auto c2 = column_range(geom, 2, box);
  // det = c0 . (c1 x c2), expanded in interval arithmetic.
  const Interval cx = sub(mul(c1[1], c2[2]), mul(c1[2], c2[1]));
  const Interval cy = sub(mul(c1[2], c2[0]), mul(c1[0], c2[2]));
  const Interval cz = sub(mul(c1[0], c2[1]), mul(c1[1], c2[0]));
  return add(add(mul(c0[0], cx), mul(c0[1], cy)), mul(c0[2], cz));
}

ParamBox map_range(const ElementGeom& geom, const ParamBox& box) {
  ParamBox r;
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 xi((corner & 1) ? box.hi[0] : box.lo[0],
                  (corner & 2) ? box.hi[1] : box.lo[1],
                  (corner & 4) ? box.hi[2] : box.lo[2]);
    const Vec3 x = map_to_physical(geom, xi);
    if (corner == 0) {
      r.lo = x;
      r.hi = x;
    } else {
      r.lo = r.lo.cwiseMin(x);
      r.hi = r.hi.cwiseMax(x);
    }
  }
  return r;
}

int RootSet::n_plus() const {
  int n = 0;
  for (const auto& r : roots) n += (r.sign > 0);
  return n;
}

int RootSet::n_minus() const {
  int n = 0;
  for (const auto& r : roots) n += (r.sign < 0);
  return n;
}

bool RootSet::any_ambiguous() const {
  for (const auto& r : roots)
    if (r.ambiguous) return true;
  return false;
}

namespace {

std::optional<Vec3> newton_core(const ElementGeom& g, const Vec3& p, Vec3 xi,
                                double converge_tol, double accept_tol) {
  double res = (map_to_physical(g, xi) - p).norm();
  int stalls = 0;
  for (int it = 0; it < kMaxNewton && res > converge_tol; ++it) {
    const Vec3 r = map_to_physical(g, xi) - p;
    const Mat3 J = jacobian(g, xi).J;
    // Cramer solve; a singular J yields a non-finite step and we stop.
    const Vec3 c0 = J.col(0), c1 = J.col(1), c2 = J.col(2);
    const double det = c0.dot(c1.cross(c2));
    const Vec3 step(-r.dot(c1.cross(c2)) / det, -c0.dot(r.cross(c2)) / det,
                    -c0.dot(c1.cross(r)) / det);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    Vec3 next = xi + step;
    double next_res = (map_to_physical(g, next) - p).norm();
    // Halve the step while it makes things worse.
    while (next_res > res && lambda > 1.0 / 512.0) {
      lambda *= 0.5;
      next = xi + lambda * step;
      next_res = (map_to_physical(g, next) - p).norm();
    }
    if (next_res >= res) break; // stagnated
    // Starved progress means a residual local minimum, not a root.
    stalls = (next_res > 0.99 * res) ? stalls + 1 : 0;
    xi = next;
    res = next_res;
    if (stalls >= 3) break;
  }
  if (res > accept_tol) return std::nullopt;
  return xi;
}

std::optional<Vec3> newton_polish(const ElementGeom& g, const Vec3& p,
                                  Vec3 xi, double converge_tol,
                                  double accept_tol) {
  auto r = newton_core(g, p, xi, converge_tol, accept_tol);
  if (!r) return std::nullopt;
  for (int k = 0; k < 3; ++k)
    if ((*r)[k] < -1.0 - kOvershoot || (*r)[k] > 1.0 + kOvershoot)
      return std::nullopt;
  return r;
}

void search_box(const ElementGeom& g, const Vec3& p, double accept_tol,
                double converge_tol, ParamBox box, bool light,
                std::vector<Vec3>& found) {
  // Exclusion: exact multilinear range test per component.
  const double cushion = 1e-13 * std::max(g.scale, 1.0);
  const ParamBox range = map_range(g, box);
  for (int k = 0; k < 3; ++k)
    if (p[k] < range.lo[k] - cushion || p[k] > range.hi[k] + cushion) return;

  const Vec3 side = box.hi - box.lo;
  int axis = 0;
  if (side[1] > side[axis]) axis = 1;
  if (side[2] > side[axis]) axis = 2;

  // Light mode trades Newton attempts for range bisection: boxes keep
  // splitting until the exclusion test has real resolution, which
  // discards most empty boxes near the fold for the cost of a few range
  // evaluations instead of a stalled iteration.
  const double leaf = light ? kTightLeaf : kLeafSide;
  if (side[axis] <= leaf) {
    // Seed Newton from the center; near the fold surface two roots can
    // share a leaf, so straddling boxes get extra seeds.  Light mode
    // places them along the Jacobian null direction, where a merging
    // pair separates; the full pattern tries every corner.
    const Vec3 center = 0.5 * (box.lo + box.hi);
    std::vector<Vec3> seeds = {center};
    const Interval dj = detj_interval(g, box);
    if (dj.lo <= 0.0 && dj.hi >= 0.0) {
      bool targeted = false;
      if (light) {
        const Mat3 J = jacobian(g, center).J;
        Vec3 v = J.col(1).cross(J.col(2));
        const Vec3 a1 = J.col(2).cross(J.col(0));
        const Vec3 a2 = J.col(0).cross(J.col(1));
        if (a1.squaredNorm() > v.squaredNorm()) v = a1;
        if (a2.squaredNorm() > v.squaredNorm()) v = a2;
        const double vn = v.norm();
        if (vn > 0.0) {
          v /= vn;
          const Vec3 off = 0.4 * side.cwiseProduct(v);
          seeds.push_back(center + off);
          seeds.push_back(center - off);
          targeted = true;
        }
      }
      if (!targeted) {
        for (int corner = 0; corner < 8; ++corner)
          seeds.emplace_back((corner & 1) ? box.hi[0] : box.lo[0],
                             (corner & 2) ? box.hi[1] : box.lo[1],
                             (corner & 4) ? box.hi[2] : box.lo[2]);
      }
    }
    for (const Vec3& s : seeds)
      if (auto r = newton_polish(g, p, s, converge_tol, accept_tol))
        found.push_back(*r);
    return;
  }

  const double mid = 0.5 * (box.lo[axis] + box.hi[axis]);
  ParamBox a = box, b = box;
  a.hi[axis] = mid;
  b.lo[axis] = mid;
  search_box(g, p, accept_tol, converge_tol, a, light, found);
  search_box(g, p, accept_tol, converge_tol, b, light, found);
}

RootSet finish_roots(const ElementGeom& g, const Vec3& p,
                     std::vector<Vec3> candidates) {
  // Dedup at kDedupTol in reference space, preferring the candidate
  // with the smaller forward residual.
  std::vector<Vec3> unique;
  for (const Vec3& c : candidates) {
    bool merged = false;
    for (Vec3& u : unique) {
      if ((c - u).norm() <= kDedupTol) {
        if ((map_to_physical(g, c) - p).norm() <
            (map_to_physical(g, u) - p).norm())
          u = c;
        merged = true;
        break;
      }
    }
    if (!merged) unique.push_back(c);
  }

  std::sort(unique.begin(), unique.end(), [](const Vec3& a, const Vec3& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
  });

  RootSet rs;
  rs.target = p;
  const double s = g.scale;
  const double band = kAmbigRel * s * s * s;
  for (const Vec3& xi : unique) {
    Root r;
    r.xi = xi;
    r.detj = jacobian(g, xi).detJ;
    r.sign = (r.detj >= 0.0) ? +1 : -1;
    r.ambiguous = std::abs(r.detj) < band;
    rs.roots.push_back(r);
  }
  return rs;
}

} // namespace

RootSet invert_trilinear(const ElementGeom& geom, const Vec3& p, double tol) {
  if (!(tol > 0.0)) throw ValidationError("invert_trilinear: tol must be > 0");
  std::vector<Vec3> candidates;
  search_box(geom, p, tol, 1e-12 * geom.scale,
             {Vec3(-1, -1, -1), Vec3(1, 1, 1)}, false, candidates);
  return finish_roots(geom, p, std::move(candidates));
}

RootSet invert_trilinear_boxes(const ElementGeom& geom, const Vec3& p,
                               double tol,
                               const std::vector<ParamBox>& boxes) {
  if (!(tol > 0.0)) throw ValidationError("invert_trilinear: tol must be > 0");
  std::vector<Vec3> candidates;
  for (const ParamBox& b : boxes)
    search_box(geom, p, tol, 1e-12 * geom.scale, b, false, candidates);
  return finish_roots(geom, p, std::move(candidates));
}

RootSet invert_trilinear_boxes_light(const ElementGeom& geom, const Vec3& p,
                                     double tol,
                                     const std::vector<ParamBox>& boxes) {
  if (!(tol > 0.0)) throw ValidationError("invert_trilinear: tol must be > 0");
  std::vector<Vec3> candidates;
  for (const ParamBox& b : boxes)
    search_box(geom, p, tol, 1e-12 * geom.scale, b, true, candidates);
  return finish_roots(geom, p, std::move(candidates));
}

std::optional<Vec3> polish_root(const ElementGeom& geom, const Vec3& p,
                                const Vec3& seed, double tol) {
  if (!(tol > 0.0)) throw ValidationError("polish_root: tol must be > 0");
  return newton_polish(geom, p, seed, 1e-12 * geom.scale, tol);
}

std::optional<Vec3> polish_root_extended(const ElementGeom& geom,
                                         const Vec3& p, const Vec3& seed,
                                         double tol) {
  if (!(tol > 0.0))
    throw ValidationError("polish_root_extended: tol must be > 0");
  auto r = newton_core(geom, p, seed, 1e-12 * geom.scale, tol);
  if (r && r->cwiseAbs().maxCoeff() <= 1.5) return r;
  return std::nullopt;
}

OrientedCount oriented_count(const Mesh& mesh, const Vec3& p) {
  OrientedCount oc;
  oc.per_element.reserve(mesh.elements.size());
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const ElementGeom g = element_geom(mesh, e);
    const double m = 1e-12 * std::max(g.scale, 1.0);
    if ((p.array() < g.bbox_lo.array() - m).any() ||
        (p.array() > g.bbox_hi.array() + m).any()) {
      oc.per_element.emplace_back(0, 0);
      continue;
    }
    const RootSet rs = invert_trilinear(g, p, 1e-9 * g.scale);
    oc.per_element.emplace_back(rs.n_plus(), rs.n_minus());
    oc.net += rs.n_plus() - rs.n_minus();
    oc.ambiguous = oc.ambiguous || rs.any_ambiguous();
  }
  return oc;
}

} // namespace tfem
