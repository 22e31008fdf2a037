#include "tfem/errors.hpp"
#include "tfem/mesh.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace tfem {

using nlohmann::json;

namespace {

std::string join_problems(const ValidationReport& rep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < rep.problems.size(); ++i) {
    if (i) os << "; ";
    os << rep.problems[i];
  }
  return os.str();
}

} // namespace

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);

  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("mesh file " + path + ": " + e.what());
  }

  Mesh mesh;
  std::map<int, int> node_pos;  // file id -> position
  std::map<int, int> elem_pos;
  try {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("hexes"))
      throw ParseError("mesh file " + path +
                       ": expected object with 'nodes' and 'hexes'");

    for (const auto& row : j.at("nodes")) {
      if (!row.is_array() || row.size() != 4)
        throw ParseError("mesh file " + path + ": node rows are [id, x, y, z]");
      Node n;
      n.id = row[0].get<int>();
      n.coords = Vec3(row[1].get<double>(), row[2].get<double>(),
                      row[3].get<double>());
      node_pos[n.id] = static_cast<int>(mesh.nodes.size());
      mesh.nodes.push_back(n);
    }

    for (const auto& row : j.at("hexes")) {
      if (!row.is_array() || row.size() != 9)
        throw ParseError("mesh file " + path + ": hex rows are [id, n1..n8]");
      HexElement el;
      el.id = row[0].get<int>();
      for (int k = 0; k < 8; ++k) {
        const int nid = row[k + 1].get<int>();
        auto it = node_pos.find(nid);
        if (it == node_pos.end()) {
          std::ostringstream os;
          os << "mesh file " << path << ": element " << el.id
             << " references unknown node id " << nid;
          throw ValidationError(os.str());
        }
        el.nodes[k] = it->second;
      }
      elem_pos[el.id] = static_cast<int>(mesh.elements.size());
      mesh.elements.push_back(el);
    }

    if (j.contains("face_sets")) {
      if (!j.at("face_sets").is_object())
        throw ParseError("mesh file " + path + ": 'face_sets' must be an object");
      for (const auto& [name, rows] : j.at("face_sets").items()) {
        std::vector<FaceRef>& faces = mesh.face_sets[name];
        for (const auto& row : rows) {
          if (!row.is_array() || row.size() != 2)
            throw ParseError("mesh file " + path +
                             ": face set rows are [elem_id, face]");
          const int eid = row[0].get<int>();
          auto it = elem_pos.find(eid);
          if (it == elem_pos.end()) {
            std::ostringstream os;
            os << "mesh file " << path << ": face set '" << name
               << "' references unknown element id " << eid;
            throw ValidationError(os.str());
          }
          faces.push_back({it->second, row[1].get<int>()});
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParseError("mesh file " + path + ": " + e.what());
  }

  const ValidationReport rep = validate_mesh(mesh);
  if (!rep.ok())
    throw ValidationError("mesh file " + path + ": " + join_problems(rep));
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  const ValidationReport rep = validate_mesh(mesh);
  if (!rep.ok())
    throw ValidationError("save_mesh: refusing invalid mesh: " +
                          join_problems(rep));

  json j;
  j["nodes"] = json::array();
  for (const auto& n : mesh.nodes)
    j["nodes"].push_back({n.id, n.coords[0], n.coords[1], n.coords[2]});

  j["hexes"] = json::array();
  for (const auto& el : mesh.elements) {
    json row = {el.id};
    for (int idx : el.nodes) row.push_back(mesh.nodes[idx].id);
    j["hexes"].push_back(row);
  }

  j["face_sets"] = json::object();
  for (const auto& [name, faces] : mesh.face_sets) {
    json rows = json::array();
    for (const auto& fr : faces)
      rows.push_back({mesh.elements[fr.elem].id, fr.face});
    j["face_sets"][name] = rows;
  }

  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw Error("write failed: " + path);
}

} // namespace tfem
