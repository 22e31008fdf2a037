// Command-line driver: benchmark sweeps, mesh generation and checks,
// fold-surface extraction, and raw system dumps.

#include "tfem/classify.hpp"
#include "tfem/errors.hpp"
#include "tfem/experiment.hpp"
#include "tfem/fold_surface.hpp"
#include "tfem/mesh.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace tfem;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "a:b:step" sweeps inclusively; otherwise a comma list of values.
std::vector<double> parse_d_spec(const std::string& spec) {
  std::vector<double> out;
  if (std::count(spec.begin(), spec.end(), ':') == 2) {
    double a = 0, b = 0, step = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
        step <= 0)
      throw ValidationError("bad d range '" + spec + "' (want a:b:step)");
    for (int i = 0;; ++i) {
      const double v = a + i * step;
      if (v > b + 1e-9 * step) break;
      out.push_back(v);
    }
  } else {
    for (const std::string& tok : split_commas(spec)) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw ValidationError("empty d specification");
  return out;
}

Family parse_family(const std::string& name) {
  if (name == "two-elem") return Family::TwoElem;
  if (name == "eight-elem") return Family::EightElem;
  if (name == "file") return Family::File;
  throw ValidationError("unknown family '" + name +
                        "' (expected two-elem, eight-elem or file)");
}

Mesh family_mesh(Family fam, double d, const std::string& mesh_file) {
  switch (fam) {
    case Family::TwoElem: return gen_two_element(d);
    case Family::EightElem: return gen_eight_element(d);
    case Family::File: return load_mesh(mesh_file);
  }
  throw ValidationError("unknown mesh family");
}

struct RunArgs {
  std::string family = "two-elem";
  std::string mesh_file;
  std::string d_spec = "0.3";
  std::string methods = "fem_signed,tfem";
  std::string out = "results.csv";
  std::string plot_prefix;
  int depth = 7, samples = 32, gauss = 2;
  unsigned seed = 7;
};

int cmd_run(const RunArgs& a) {
  ExperimentConfig cfg;
  cfg.family = parse_family(a.family);
  cfg.mesh_file = a.mesh_file;
  if (cfg.family != Family::File) cfg.d_values = parse_d_spec(a.d_spec);
  cfg.methods.clear();
  for (const std::string& m : split_commas(a.methods))
    cfg.methods.push_back(parse_method(m));
  cfg.options.depth = a.depth;
  cfg.options.constraint_samples = a.samples;
  cfg.options.gauss_order = a.gauss;
  cfg.options.seed = a.seed;
  cfg.output = a.out;

  const std::vector<ErrorReport> reports = run_experiment(cfg);
  if (!a.plot_prefix.empty()) emit_plot_data(reports, a.plot_prefix);

  std::printf("%-10s %-6s %-10s %12s %12s %s\n", "family", "d", "method",
              "max_rel_err", "residual", "status");
  bool any_failed = false;
  for (const ErrorReport& r : reports) {
    std::printf("%-10s %-6.3g %-10s %12.3e %12.3e %s\n", r.family.c_str(),
                r.d, r.method.c_str(), r.max_rel_error, r.solve_residual,
                r.error_code.empty() ? "ok" : r.error_code.c_str());
    if (!r.error_code.empty()) any_failed = true;
  }
  std::printf("wrote %s (%zu rows)\n", cfg.output.c_str(), reports.size());
  return any_failed ? 3 : 0;
}

int cmd_mesh_gen(const std::string& family, double d, const std::string& out) {
  const Mesh mesh = family_mesh(parse_family(family), d, "");
  save_mesh(mesh, out);
  std::printf("wrote %s: %zu nodes, %zu elements, %zu face sets\n",
              out.c_str(), mesh.nodes.size(), mesh.elements.size(),
              mesh.face_sets.size());
  return 0;
}

int cmd_mesh_validate(const std::string& in) {
  const Mesh mesh = load_mesh(in); // throws on structural problems
  const ValidationReport rep = validate_mesh(mesh);
  if (!rep.ok()) {
    for (const std::string& p : rep.problems)
      std::fprintf(stderr, "problem: %s\n", p.c_str());
    return 2;
  }
  int concave = 0;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e)
    if (classify_element(element_geom(mesh, e)).kind == ElementKind::Concave)
      ++concave;
  std::printf("ok: %zu nodes, %zu elements (%d concave), %zu face sets\n",
              mesh.nodes.size(), mesh.elements.size(), concave,
              mesh.face_sets.size());
  return 0;
}

int cmd_mesh_fold_surface(const std::string& in, int elem_id, int resolution,
                          const std::string& out) {
  const Mesh mesh = load_mesh(in);
  FoldSurface all;
  all.resolution = resolution;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    if (elem_id >= 0 && mesh.elements[e].id != elem_id) continue;
    const FoldSurface fs =
        extract_fold_surface(element_geom(mesh, e), resolution);
    if (!fs.triangles.empty())
      std::printf("element %d: %zu triangles\n", mesh.elements[e].id,
                  fs.triangles.size());
    all.triangles.insert(all.triangles.end(), fs.triangles.begin(),
                         fs.triangles.end());
  }
  if (elem_id >= 0 &&
      std::none_of(mesh.elements.begin(), mesh.elements.end(),
                   [&](const HexElement& h) { return h.id == elem_id; }))
    throw ValidationError("no element with id " + std::to_string(elem_id));
  save_fold_surface(all, out);
  std::printf("wrote %s (%zu triangles)\n", out.c_str(),
              all.triangles.size());
  return 0;
}

struct DumpArgs {
  std::string family = "two-elem";
  std::string mesh_file;
  std::string method = "tfem";
  double d = 0.3;
  int depth = 7, samples = 32, gauss = 2;
  unsigned seed = 7;
  std::string out = "system.txt";
};

int cmd_dump_system(const DumpArgs& a) {
  const Family fam = parse_family(a.family);
  const Mesh mesh = family_mesh(fam, a.d, a.mesh_file);
  const BoundarySpec bc = BoundarySpec::standard(mesh);
  const ExactSolution exact;

  const Method method = parse_method(a.method);
  TfemOptions opt;
  opt.depth = a.depth;
  opt.constraint_samples = a.samples;
  opt.gauss_order = a.gauss;
  opt.seed = a.seed;

  const AssembledSystem sys =
      method == Method::Tfem
          ? assemble_tfem_system(mesh, bc, exact, opt)
          : assemble_fem_system(mesh, bc, exact,
                                method == Method::FemAbs
                                    ? JacobianMode::Absolute
                                    : JacobianMode::Signed,
                                a.gauss);

  std::ofstream os(a.out);
  if (!os) throw Error("cannot open '" + a.out + "' for writing");
  char buf[64];
  const Eigen::MatrixXd K = sys.K.dense();
  os << "# method " << a.method << " nodes " << mesh.nodes.size()
     << " constraints " << sys.C.m() << "\n";
  for (int r = 0; r < K.rows(); ++r)
    for (int c = 0; c < K.cols(); ++c)
      if (K(r, c) != 0.0) {
        std::snprintf(buf, sizeof buf, "%.17g", K(r, c));
        os << "K " << r << ' ' << c << ' ' << buf << '\n';
      }
  for (int r = 0; r < sys.C.m(); ++r)
    for (int c = 0; c < sys.C.n; ++c)
      if (sys.C.rows(r, c) != 0.0) {
        std::snprintf(buf, sizeof buf, "%.17g", sys.C.rows(r, c));
        os << "C " << r << ' ' << c << ' ' << buf << '\n';
      }
  for (int i = 0; i < sys.f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", sys.f[i]);
    os << "f " << i << ' ' << buf << '\n';
  }
  if (!os.flush()) throw Error("short write to '" + a.out + "'");
  std::printf("wrote %s\n", a.out.c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laplace solver for hex meshes with partially inverted "
               "elements"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* c_run = app.add_subcommand(
      "run", "Sweep d over a mesh family and report nodal errors");
  c_run->add_option("--family", run.family,
                    "two-elem, eight-elem or file");
  c_run->add_option("--mesh-file", run.mesh_file,
                    "mesh path when --family file");
  c_run->add_option("--d", run.d_spec, "sweep a:b:step or comma list");
  c_run->add_option("--methods", run.methods,
                    "comma list of fem_signed, fem_abs, tfem");
  c_run->add_option("--depth", run.depth, "octree depth (3..9)");
  c_run->add_option("--samples", run.samples,
                    "fold samples per concave element");
  c_run->add_option("--gauss", run.gauss, "tensor rule order (1..5)");
  c_run->add_option("--seed", run.seed, "fold sampling offset");
  c_run->add_option("--out", run.out, "CSV output path");
  c_run->add_option("--plot-data", run.plot_prefix,
                    "also write <prefix>.<family>.dat series");

  CLI::App* c_mesh = app.add_subcommand("mesh", "Mesh utilities");
  c_mesh->require_subcommand(1);

  std::string gen_family = "two-elem", gen_out = "mesh.json";
  double gen_d = 0.3;
  CLI::App* c_gen =
      c_mesh->add_subcommand("gen", "Generate a benchmark mesh file");
  c_gen->add_option("--family", gen_family, "two-elem or eight-elem");
  c_gen->add_option("--d", gen_d, "tangling parameter");
  c_gen->add_option("--out", gen_out, "output path");

  std::string val_in;
  CLI::App* c_val =
      c_mesh->add_subcommand("validate", "Check a mesh file's invariants");
  c_val->add_option("--in", val_in, "mesh path")->required();

  std::string fs_in, fs_out = "fold.tri";
  int fs_elem = -1, fs_res = 48;
  CLI::App* c_fs = c_mesh->add_subcommand(
      "fold-surface", "Extract det J = 0 triangles of concave elements");
  c_fs->add_option("--in", fs_in, "mesh path")->required();
  c_fs->add_option("--elem", fs_elem, "restrict to one element id");
  c_fs->add_option("--resolution", fs_res, "lattice resolution (>= 2)");
  c_fs->add_option("--out", fs_out, "output path");

  DumpArgs dump;
  CLI::App* c_dump = app.add_subcommand(
      "dump-system", "Write assembled K, constraints and load as text");
  c_dump->add_option("--family", dump.family, "two-elem, eight-elem or file");
  c_dump->add_option("--mesh-file", dump.mesh_file,
                     "mesh path when --family file");
  c_dump->add_option("--method", dump.method,
                     "fem_signed, fem_abs or tfem");
  c_dump->add_option("--d", dump.d, "tangling parameter");
  c_dump->add_option("--depth", dump.depth, "octree depth (3..9)");
  c_dump->add_option("--samples", dump.samples,
                     "fold samples per concave element");
  c_dump->add_option("--gauss", dump.gauss, "tensor rule order (1..5)");
  c_dump->add_option("--seed", dump.seed, "fold sampling offset");
  c_dump->add_option("--out", dump.out, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(c_run)) return cmd_run(run);
    if (app.got_subcommand(c_mesh)) {
      if (c_mesh->got_subcommand(c_gen))
        return cmd_mesh_gen(gen_family, gen_d, gen_out);
      if (c_mesh->got_subcommand(c_val)) return cmd_mesh_validate(val_in);
      if (c_mesh->got_subcommand(c_fs))
        return cmd_mesh_fold_surface(fs_in, fs_elem, fs_res, fs_out);
    }
    if (app.got_subcommand(c_dump)) return cmd_dump_system(dump);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 1;
}
