#include "tfem/errors.hpp"
#include "tfem/mesh.hpp"

namespace tfem {

Mesh gen_two_element(double d) {
  if (!(d > 0.0 && d < 0.5))
    throw ValidationError("gen_two_element: d must satisfy 0 < d < 0.5");

  Mesh m;
  const Vec3 coords[10] = {
      {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
      {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
      {0.5 - d, 0.48 - d, 0.0},  // bottom interface node, re-entrant on E1
      {0.45, 0.4, 1.0},          // top interface node, re-entrant on E1
  };
  for (int i = 0; i < 10; ++i) m.nodes.push_back({i + 1, coords[i]});

  // E1 wraps around the interface nodes and is concave; E2 fills the
  // remaining wedge.  They share the two faces through nodes 9 and 10.
  m.elements.push_back({1, {0, 1, 8, 3, 4, 5, 9, 7}});
  m.elements.push_back({2, {1, 2, 3, 8, 5, 6, 7, 9}});

  m.face_sets["left"] = {{0, 5}};
  m.face_sets["right"] = {{1, 2}};
  m.face_sets["front"] = {{0, 2}};
  m.face_sets["back"] = {{1, 3}};
  m.face_sets["bottom"] = {{0, 0}, {1, 0}};
  m.face_sets["top"] = {{0, 1}, {1, 1}};
  return m;
}

Mesh gen_eight_element(double d) {
  if (!(d > 0.0 && d <= 1.0))
    throw ValidationError("gen_eight_element: d must satisfy 0 < d <= 1");

  Mesh m;
  auto idx = [](int ix, int iy, int iz) { return ix + 3 * iy + 9 * iz; };
  for (int iz = 0; iz < 3; ++iz)
    for (int iy = 0; iy < 3; ++iy)
      for (int ix = 0; ix < 3; ++ix) {
        Vec3 x(0.5 * ix, 0.5 * iy, 0.5 * iz);
        if (ix == 1 && iy == 1 && iz == 1) x = d * Vec3(0.5, 0.45, 0.4);
        m.nodes.push_back({idx(ix, iy, iz) + 1, x});
      }

  for (int ez = 0; ez < 2; ++ez)
    for (int ey = 0; ey < 2; ++ey)
      for (int ex = 0; ex < 2; ++ex) {
        HexElement el;
        el.id = 1 + ex + 2 * ey + 4 * ez;
        el.nodes = {idx(ex, ey, ez),         idx(ex + 1, ey, ez),
                    idx(ex + 1, ey + 1, ez), idx(ex, ey + 1, ez),
                    idx(ex, ey, ez + 1),     idx(ex + 1, ey, ez + 1),
                    idx(ex + 1, ey + 1, ez + 1), idx(ex, ey + 1, ez + 1)};
        m.elements.push_back(el);

        const int e = static_cast<int>(m.elements.size()) - 1;
        if (ex == 0) m.face_sets["left"].push_back({e, 5});
        if (ex == 1) m.face_sets["right"].push_back({e, 3});
        if (ey == 0) m.face_sets["front"].push_back({e, 2});
        if (ey == 1) m.face_sets["back"].push_back({e, 4});
        if (ez == 0) m.face_sets["bottom"].push_back({e, 0});
        if (ez == 1) m.face_sets["top"].push_back({e, 1});
      }
  return m;
}

} // namespace tfem
