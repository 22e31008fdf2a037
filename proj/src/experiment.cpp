#include "tfem/experiment.hpp"

#include "tfem/classify.hpp"
#include "tfem/errors.hpp"
#include "tfem/fold.hpp"
#include "tfem/region_quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace tfem {

std::string method_name(Method m) {
  switch (m) {
    case Method::FemSigned: return "fem_signed";
    case Method::FemAbs: return "fem_abs";
    case Method::Tfem: return "tfem";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "fem_signed") return Method::FemSigned;
  if (name == "fem_abs") return Method::FemAbs;
  if (name == "tfem") return Method::Tfem;
  throw ValidationError("unknown method '" + name +
                        "' (expected fem_signed, fem_abs or tfem)");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::TwoElem: return "two-elem";
    case Family::EightElem: return "eight-elem";
    case Family::File: return "file";
  }
  return "?";
}

namespace {

void check_options(const TfemOptions& opt) {
  if (opt.depth < 3 || opt.depth > 9)
    throw ValidationError("depth must be in [3, 9]");
  if (opt.gauss_order < 1 || opt.gauss_order > 5)
    throw ValidationError("gauss order must be in [1, 5]");
  if (opt.cell_order < 1 || opt.cell_order > 5)
    throw ValidationError("cell order must be in [1, 5]");
  if (opt.constraint_samples < 1)
    throw ValidationError("constraint sample count must be >= 1");
  if (!(opt.rank_tol > 0.0))
    throw ValidationError("rank tolerance must be positive");
}

SolveResult finish(const ReducedSystem& rs) {
  const SaddleSolution sol = solve_saddle(rs);
  SolveResult out;
  out.u_hat = sol.u_hat;
  out.dofs = static_cast<int>(rs.free_nodes.size());
  out.constraints = static_cast<int>(rs.C.rows());
  out.solve_residual = std::hypot(sol.residual_primal, sol.residual_constraint);
  out.flagged = sol.flagged;
  return out;
}

} // namespace

AssembledSystem assemble_tfem_system(const Mesh& mesh, const BoundarySpec& bc,
                                     const ExactSolution& exact,
                                     const TfemOptions& opt) {
  check_options(opt);

  std::vector<int> convex, concave;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const ElementClass cls = classify_element(element_geom(mesh, e));
    (cls.kind == ElementKind::Concave ? concave : convex).push_back(e);
  }

  AssembledSystem sys;
  // An empty subset means "all" to assemble_standard, so an all-concave
  // mesh must start from a blank stiffness instead.
  if (convex.empty())
    sys.K.n = static_cast<int>(mesh.nodes.size());
  else
    sys.K = assemble_standard(mesh, opt.gauss_order, JacobianMode::Signed,
                              convex);
  for (int e : concave) {
    const RegionQuadrature rq =
        concave_region_quadrature(mesh, e, opt.depth, opt.cell_order);
    scatter(sys.K, assemble_concave(mesh, e, rq));
  }

  std::vector<FoldSamples> samples;
  samples.reserve(concave.size());
  for (int e : concave)
    samples.push_back(
        fold_sample_points(mesh, e, opt.constraint_samples, opt.seed));
  sys.C = assemble_constraints(mesh, samples, opt.rank_tol);

  sys.f = assemble_load(mesh, bc, exact, opt.depth + 3, LoadMode::Tfem);
  return sys;
}

AssembledSystem assemble_fem_system(const Mesh& mesh, const BoundarySpec& bc,
                                    const ExactSolution& exact,
                                    JacobianMode mode, int gauss_order) {
  if (gauss_order < 1 || gauss_order > 5)
    throw ValidationError("gauss order must be in [1, 5]");
  AssembledSystem sys;
  sys.K = assemble_standard(mesh, gauss_order, mode);
  sys.C.n = static_cast<int>(mesh.nodes.size());
  sys.f = assemble_load(mesh, bc, exact, 2, LoadMode::Conventional);
  return sys;
}

SolveResult solve_tfem(const Mesh& mesh, const BoundarySpec& bc,
                       const ExactSolution& exact, const TfemOptions& opt) {
  const AssembledSystem sys = assemble_tfem_system(mesh, bc, exact, opt);
  return finish(apply_dirichlet(sys.K, sys.C, sys.f, mesh, bc, exact));
}

SolveResult solve_fem(const Mesh& mesh, const BoundarySpec& bc,
                      const ExactSolution& exact, JacobianMode mode,
                      int gauss_order) {
  const AssembledSystem sys =
      assemble_fem_system(mesh, bc, exact, mode, gauss_order);
  return finish(apply_dirichlet(sys.K, sys.C, sys.f, mesh, bc, exact));
}

std::pair<double, double> compute_error(const Eigen::VectorXd& u_hat,
                                        const Mesh& mesh,
                                        const ExactSolution& exact) {
  if (u_hat.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
    throw ValidationError("compute_error: field length != node count");
  double mx = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const double ue = exact.value(mesh.nodes[i].coords);
    const double e =
        std::abs(ue - u_hat[static_cast<Eigen::Index>(i)]) /
        std::max(std::abs(ue), 1e-12);
    mx = std::max(mx, e);
    sum += e;
  }
  return {mx, sum / static_cast<double>(mesh.nodes.size())};
}

namespace {

Mesh make_mesh(const ExperimentConfig& cfg, double d) {
  switch (cfg.family) {
    case Family::TwoElem: return gen_two_element(d);
    case Family::EightElem: return gen_eight_element(d);
    case Family::File: return load_mesh(cfg.mesh_file);
  }
  throw ValidationError("unknown mesh family");
}

std::string classify_failure(const std::exception& ex) {
  if (dynamic_cast<const ParseError*>(&ex)) return "parse_error";
  if (dynamic_cast<const ValidationError*>(&ex)) return "validation_error";
  if (dynamic_cast<const GeometryError*>(&ex)) return "geometry_error";
  if (dynamic_cast<const SolveError*>(&ex)) return "solve_error";
  return "error";
}

void check_config(const ExperimentConfig& cfg) {
  check_options(cfg.options);
  if (cfg.methods.empty()) throw ValidationError("no methods selected");
  if (cfg.family == Family::File) {
    if (cfg.mesh_file.empty())
      throw ValidationError("family 'file' needs a mesh path");
    if (!cfg.d_values.empty())
      throw ValidationError("family 'file' takes no d values");
    return;
  }
  if (cfg.d_values.empty()) throw ValidationError("no d values given");
  for (double d : cfg.d_values) {
    if (cfg.family == Family::TwoElem && !(d > 0.0 && d < 0.5))
      throw ValidationError("two-elem family needs 0 < d < 0.5");
    if (cfg.family == Family::EightElem && !(d > 0.0 && d <= 1.0))
      throw ValidationError("eight-elem family needs 0 < d <= 1");
  }
}

} // namespace

std::vector<ErrorReport> run_experiment(const ExperimentConfig& cfg) {
  check_config(cfg);

  const std::vector<double> ds =
      cfg.family == Family::File ? std::vector<double>{0.0} : cfg.d_values;

  std::vector<ErrorReport> reports;
  for (double d : ds) {
    for (Method m : cfg.methods) {
      ErrorReport r;
      r.family = family_name(cfg.family);
      r.d = d;
      r.method = method_name(m);
      r.depth = cfg.options.depth;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Mesh mesh = make_mesh(cfg, d);
        const BoundarySpec bc = BoundarySpec::standard(mesh);
        const ExactSolution exact;
        const SolveResult sr =
            m == Method::Tfem
                ? solve_tfem(mesh, bc, exact, cfg.options)
                : solve_fem(mesh, bc, exact,
                            m == Method::FemAbs ? JacobianMode::Absolute
                                                : JacobianMode::Signed,
                            cfg.options.gauss_order);
        r.dofs = sr.dofs;
        r.constraints = sr.constraints;
        r.solve_residual = sr.solve_residual;
        std::tie(r.max_rel_error, r.mean_rel_error) =
            compute_error(sr.u_hat, mesh, exact);
      } catch (const std::exception& ex) {
        r.error_code = classify_failure(ex);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.max_rel_error = r.mean_rel_error = r.solve_residual = nan;
      }
      const auto t1 = std::chrono::steady_clock::now();
      r.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
      reports.push_back(std::move(r));
    }
  }

  if (!cfg.output.empty()) write_csv(reports, cfg.output);
  return reports;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

} // namespace

std::string csv_header() {
  return "family,d,method,depth,dofs,constraints,max_rel_error,"
         "mean_rel_error,solve_residual,wall_time_s,error_code";
}

std::string csv_row(const ErrorReport& r) {
  std::ostringstream os;
  os << r.family << ',' << fmt("%.10g", r.d) << ',' << r.method << ','
     << r.depth << ',' << r.dofs << ',' << r.constraints << ','
     << fmt("%.17g", r.max_rel_error) << ',' << fmt("%.17g", r.mean_rel_error)
     << ',' << fmt("%.17g", r.solve_residual) << ','
     << fmt("%.6f", r.wall_time_s) << ',' << r.error_code;
  return os.str();
}

void write_csv(const std::vector<ErrorReport>& reports,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << csv_header() << '\n';
  for (const ErrorReport& r : reports) out << csv_row(r) << '\n';
  if (!out.flush()) throw Error("short write to '" + path + "'");
}

void emit_plot_data(const std::vector<ErrorReport>& reports,
                    const std::string& prefix) {
  if (reports.empty())
    throw ValidationError("emit_plot_data: no reports to plot");

  // Family order follows first appearance; methods likewise per family.
  std::vector<std::string> families;
  for (const ErrorReport& r : reports)
    if (std::find(families.begin(), families.end(), r.family) ==
        families.end())
      families.push_back(r.family);

  for (const std::string& fam : families) {
    std::vector<std::string> methods;
    for (const ErrorReport& r : reports)
      if (r.family == fam &&
          std::find(methods.begin(), methods.end(), r.method) == methods.end())
        methods.push_back(r.method);

    const std::string path = prefix + "." + fam + ".dat";
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "# family: " << fam << '\n';
    bool first = true;
    for (const std::string& meth : methods) {
      std::vector<std::pair<double, double>> series;
      for (const ErrorReport& r : reports)
        if (r.family == fam && r.method == meth && r.error_code.empty())
          series.emplace_back(r.d, r.max_rel_error);
      std::sort(series.begin(), series.end());
      if (!first) out << '\n';
      first = false;
      out << "# method: " << meth << '\n';
      for (const auto& [d, err] : series)
        out << fmt("%.10g", d) << ' ' << fmt("%.17g", err) << '\n';
    }
    if (!out.flush()) throw Error("short write to '" + path + "'");
  }
}

} // namespace tfem
