#include "tfem/fold_surface.hpp"

#include "tfem/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace tfem {

namespace {

#include "mc_tables.inc"

// Cell corner layout matching the tables: ring 0-1-2-3 at the low end
// of axis 1, ring 4-5-6-7 at the high end, edges 0-7 around the rings
// and 8-11 vertical.
constexpr int kCubeOffset[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1},
    {0, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1},
};

constexpr int kEdgeEnds[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

Vec3 bisect_edge(const ElementGeom& g, Vec3 a, Vec3 b, double fa) {
  // fa < 0 on the "a" side by construction of the sign mask.
  if (fa > 0.0) std::swap(a, b);
  for (int it = 0; it < 60; ++it) {
    const Vec3 m = 0.5 * (a + b);
    if (jacobian(g, m).detJ < 0.0) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

} // namespace

FoldSurface extract_fold_surface(const ElementGeom& geom, int resolution) {
  if (resolution < 2)
    throw ValidationError("extract_fold_surface: resolution must be >= 2");

  FoldSurface fs;
  fs.resolution = resolution;

  const int n = resolution;
  const int np = n + 1;
  std::vector<double> detj(static_cast<std::size_t>(np) * np * np);
  auto at = [np](int i, int j, int k) {
    return (static_cast<std::size_t>(k) * np + j) * np + i;
  };
  auto lattice = [n](int i, int j, int k) {
    return Vec3(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n, -1.0 + 2.0 * k / n);
  };
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        detj[at(i, j, k)] = jacobian(geom, lattice(i, j, k)).detJ;

  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double value[8];
        Vec3 corner[8];
        int mask = 0;
        for (int v = 0; v < 8; ++v) {
          const int ci = i + kCubeOffset[v][0];
          const int cj = j + kCubeOffset[v][1];
          const int ck = k + kCubeOffset[v][2];
          value[v] = detj[at(ci, cj, ck)];
          corner[v] = lattice(ci, cj, ck);
          if (value[v] < 0.0) mask |= 1 << v;
        }
        const int edges = kEdgeTable[mask];
        if (!edges) continue;

        Vec3 on_edge[12];
        for (int e = 0; e < 12; ++e)
          if (edges & (1 << e))
            on_edge[e] = bisect_edge(geom, corner[kEdgeEnds[e][0]],
                                     corner[kEdgeEnds[e][1]],
                                     value[kEdgeEnds[e][0]]);

        for (int t = 0; kTriTable[mask][t] != -1; t += 3) {
          FoldTriangle tri;
          for (int v = 0; v < 3; ++v) {
            tri.xi[v] = on_edge[kTriTable[mask][t + v]];
            tri.x[v] = map_to_physical(geom, tri.xi[v]);
          }
          fs.triangles.push_back(tri);
        }
      }
  return fs;
}

void save_fold_surface(const FoldSurface& fs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  char buf[64];
  for (const FoldTriangle& tri : fs.triangles) {
    std::string line;
    for (int v = 0; v < 3; ++v)
      for (int k = 0; k < 3; ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", tri.x[v][k]);
        if (!line.empty()) line += ' ';
        line += buf;
      }
    out << line << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

} // namespace tfem
