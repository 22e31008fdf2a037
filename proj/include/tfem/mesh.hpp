#ifndef TFEM_MESH_HPP
#define TFEM_MESH_HPP

#include "tfem/hex_basis.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace tfem {

// id is the identifier as written in mesh files (generated meshes use
// 1-based contiguous ids).  Everything else in the library addresses
// nodes by their position in Mesh::nodes.
struct Node {
  int id = 0;
  Vec3 coords = Vec3::Zero();

  bool operator==(const Node& o) const {
    return id == o.id && coords == o.coords;
  }
};

// nodes holds positions into Mesh::nodes, in the reference corner order
// of kCornerSign (bottom quad counterclockwise, then top quad).
struct HexElement {
  int id = 0;
  std::array<int, 8> nodes{};

  bool operator==(const HexElement& o) const = default;
};

// elem is a position into Mesh::elements; face is a local face index,
// numbered as in kFaceCorner.
struct FaceRef {
  int elem = 0;
  int face = 0;

  bool operator==(const FaceRef& o) const = default;
};

struct Mesh {
  std::vector<Node> nodes;
  std::vector<HexElement> elements;
  std::map<std::string, std::vector<FaceRef>> face_sets;

  bool operator==(const Mesh& o) const {
    return nodes == o.nodes && elements == o.elements &&
           face_sets == o.face_sets;
  }
};

// Exact linear field u(x) = gradient . x + offset used by the benchmark
// experiments for boundary data and error measurement.
struct ExactSolution {
  Vec3 gradient{0.579, 0.246, 0.482};
  double offset = -0.374;

  double value(const Vec3& x) const { return gradient.dot(x) + offset; }
};

// Which face sets carry Dirichlet values and which carry Neumann flux.
// Both are evaluated from an ExactSolution.
struct BoundarySpec {
  std::string dirichlet_set = "left";
  std::vector<std::string> neumann_sets;

  // Dirichlet on dirichlet_set, Neumann on every other face set.
  static BoundarySpec standard(const Mesh& mesh,
                               const std::string& dirichlet = "left");
};

struct ValidationReport {
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
};

// Collects every invariant violation instead of stopping at the first:
// duplicate ids or coordinates, bad connectivity, degenerate hexes,
// face-set entries that are out of range or not exterior.
ValidationReport validate_mesh(const Mesh& mesh);

// JSON mesh files; node and element ids in files are arbitrary unique
// integers (1-based for files we write).  load_mesh validates and
// throws; save_mesh refuses to write an invalid mesh.
Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

// Two-hex unit-cube mesh whose first element is concave, with the
// interface bottom node at (0.5-d, 0.48-d, 0) and top node at
// (0.45, 0.4, 1).  Valid for 0 < d < 0.5.
Mesh gen_two_element(double d);

// 2x2x2 hex grid on the unit cube with the central node pulled to
// d*(0.5, 0.45, 0.4); exactly one element is concave for d in the
// benchmark sweep, while d = 1 is near-regular and fully convex.
// Valid for 0 < d <= 1.
Mesh gen_eight_element(double d);

// Geometry of element e (position index).
ElementGeom element_geom(const Mesh& mesh, int e);

// Global node positions of local face f of element e, in face corner
// order (consistent with face_param / kFaceCorner).
std::array<int, 4> face_node_indices(const Mesh& mesh, int e, int f);

// Positions of faces shared by exactly one element.
bool is_exterior_face(const Mesh& mesh, int e, int f);

} // namespace tfem

#endif
