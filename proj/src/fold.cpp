#include "tfem/fold.hpp"

#include "tfem/classify.hpp"
#include "tfem/errors.hpp"
#include "tfem/invert.hpp"

#include <cmath>

namespace tfem {

namespace {

double radical_inverse(unsigned long long i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

} // namespace

FoldSamples fold_sample_points(const Mesh& mesh, int elem, int target_count,
                               unsigned seed) {
  if (target_count <= 0)
    throw ValidationError("fold_sample_points: target_count must be > 0");
  const ElementGeom geom = element_geom(mesh, elem);
  const ElementClass cls = classify_element(geom);
  if (cls.kind != ElementKind::Concave)
    throw GeometryError("fold_sample_points: element has no fold (convex)");

  const double s = geom.scale;
  const double band = 1e-8 * s * s * s;
  const double tol = 1e-9 * s;

  FoldSamples out;
  out.elem = elem;
  const long long budget =
      std::max<long long>(200LL * target_count, 20000LL);
  // Prime stride keeps distinct seeds on distinct subsequences.
  unsigned long long idx = 1 + static_cast<unsigned long long>(seed) * 7919ULL;

  for (long long attempt = 0;
       attempt < budget && static_cast<int>(out.samples.size()) < target_count;
       ++attempt, ++idx) {
    const Vec3 xi(2.0 * radical_inverse(idx, 2) - 1.0,
                  2.0 * radical_inverse(idx, 3) - 1.0,
                  2.0 * radical_inverse(idx, 5) - 1.0);
    if (jacobian(geom, xi).detJ >= -band) continue; // want safely negative

    const Vec3 p = map_to_physical(geom, xi);
    const RootSet rs = invert_trilinear(geom, p, tol);
    if (rs.roots.size() != 2 || rs.n_plus() != 1 || rs.n_minus() != 1 ||
        rs.any_ambiguous())
      continue;

    FoldSample fs;
    fs.p = p;
    for (const Root& r : rs.roots)
      (r.sign > 0 ? fs.xi_plus : fs.xi_minus) = r.xi;
    out.samples.push_back(fs);
  }

  if (out.samples.empty())
    throw GeometryError(
        "fold_sample_points: found no fold points (fold empty or "
        "unreachable at this sampling budget)");
  out.complete = static_cast<int>(out.samples.size()) >= target_count;
  return out;
}

} // namespace tfem
