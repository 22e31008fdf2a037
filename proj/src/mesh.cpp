#include "tfem/mesh.hpp"

#include "tfem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace tfem {

BoundarySpec BoundarySpec::standard(const Mesh& mesh,
                                    const std::string& dirichlet) {
  if (!mesh.face_sets.count(dirichlet))
    throw ValidationError("boundary spec: mesh has no face set '" + dirichlet +
                          "'");
  BoundarySpec bc;
  bc.dirichlet_set = dirichlet;
  for (const auto& [name, faces] : mesh.face_sets) {
    (void)faces;
    if (name != dirichlet) bc.neumann_sets.push_back(name);
  }
  return bc;
}

ElementGeom element_geom(const Mesh& mesh, int e) {
  if (e < 0 || e >= static_cast<int>(mesh.elements.size()))
    throw ValidationError("element_geom: element position out of range");
  std::array<Vec3, 8> x;
  for (int i = 0; i < 8; ++i)
    x[i] = mesh.nodes[mesh.elements[e].nodes[i]].coords;
  return ElementGeom::from_corners(x);
}

std::array<int, 4> face_node_indices(const Mesh& mesh, int e, int f) {
  if (e < 0 || e >= static_cast<int>(mesh.elements.size()))
    throw ValidationError("face_node_indices: element position out of range");
  if (f < 0 || f > 5)
    throw ValidationError("face_node_indices: face index out of range");
  std::array<int, 4> out;
  for (int k = 0; k < 4; ++k)
    out[k] = mesh.elements[e].nodes[kFaceCorner[f][k]];
  return out;
}

namespace {

using FaceKey = std::array<int, 4>;

FaceKey face_key(const Mesh& mesh, int e, int f) {
  FaceKey k = face_node_indices(mesh, e, f);
  std::sort(k.begin(), k.end());
  return k;
}

std::map<FaceKey, int> face_use_counts(const Mesh& mesh) {
  std::map<FaceKey, int> counts;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e)
    for (int f = 0; f < 6; ++f) ++counts[face_key(mesh, e, f)];
  return counts;
}

} // namespace

bool is_exterior_face(const Mesh& mesh, int e, int f) {
  const FaceKey key = face_key(mesh, e, f);
  int count = 0;
  for (int e2 = 0; e2 < static_cast<int>(mesh.elements.size()); ++e2)
    for (int f2 = 0; f2 < 6; ++f2)
      if (face_key(mesh, e2, f2) == key) ++count;
  return count == 1;
}

ValidationReport validate_mesh(const Mesh& mesh) {
  ValidationReport rep;
  auto add = [&rep](const std::string& msg) { rep.problems.push_back(msg); };

  if (mesh.nodes.empty()) add("mesh has no nodes");
  if (mesh.elements.empty()) add("mesh has no elements");

  std::set<int> node_ids;
  std::map<std::array<double, 3>, int> coord_seen;
  for (const auto& n : mesh.nodes) {
    if (!node_ids.insert(n.id).second) {
      std::ostringstream os;
      os << "duplicate node id " << n.id;
      add(os.str());
    }
    if (!n.coords.allFinite()) {
      std::ostringstream os;
      os << "node " << n.id << " has non-finite coordinates";
      add(os.str());
    } else {
      std::array<double, 3> key{n.coords[0], n.coords[1], n.coords[2]};
      auto [it, fresh] = coord_seen.emplace(key, n.id);
      if (!fresh) {
        std::ostringstream os;
        os << "nodes " << it->second << " and " << n.id
           << " share identical coordinates";
        add(os.str());
      }
    }
  }

  const int nn = static_cast<int>(mesh.nodes.size());
  std::set<int> elem_ids;
  bool connectivity_ok = true;
  for (const auto& el : mesh.elements) {
    if (!elem_ids.insert(el.id).second) {
      std::ostringstream os;
      os << "duplicate element id " << el.id;
      add(os.str());
    }
    std::set<int> distinct(el.nodes.begin(), el.nodes.end());
    if (distinct.size() != 8) {
      std::ostringstream os;
      os << "element " << el.id << " repeats a node";
      add(os.str());
      connectivity_ok = false;
    }
    for (int idx : el.nodes)
      if (idx < 0 || idx >= nn) {
        std::ostringstream os;
        os << "element " << el.id << " references a missing node";
        add(os.str());
        connectivity_ok = false;
        break;
      }
  }

  // Face-set checks need well-formed connectivity to build face keys.
  if (connectivity_ok && !mesh.elements.empty()) {
    const auto counts = face_use_counts(mesh);
    const int ne = static_cast<int>(mesh.elements.size());
    for (const auto& [name, faces] : mesh.face_sets) {
      if (faces.empty()) add("face set '" + name + "' is empty");
      for (const auto& fr : faces) {
        if (fr.elem < 0 || fr.elem >= ne) {
          add("face set '" + name + "' references a missing element");
          continue;
        }
        if (fr.face < 0 || fr.face > 5) {
          add("face set '" + name + "' uses a face index outside 0..5");
          continue;
        }
        if (counts.at(face_key(mesh, fr.elem, fr.face)) != 1) {
          std::ostringstream os;
          os << "face set '" << name << "': face " << fr.face << " of element "
             << mesh.elements[fr.elem].id << " is not exterior";
          add(os.str());
        }
      }
    }
  }

  return rep;
}

} // namespace tfem
