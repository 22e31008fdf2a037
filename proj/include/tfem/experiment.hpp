#ifndef TFEM_EXPERIMENT_HPP
#define TFEM_EXPERIMENT_HPP

#include "tfem/assembly.hpp"
#include "tfem/mesh.hpp"
#include "tfem/solve.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tfem {

// Solver variants exposed by the driver.  FemSigned is the conventional
// assembly that silently trusts det J; FemAbs flips negative det J in
// the stiffness; Tfem is the constrained formulation.
enum class Method { FemSigned, FemAbs, Tfem };

std::string method_name(Method m);
Method parse_method(const std::string& name);

// Knobs of the constrained solve.  Defaults match the benchmark runs.
struct TfemOptions {
  int depth = 7;             // octree depth for the concave region rule
  int gauss_order = 2;       // rule on convex elements
  int cell_order = 2;        // rule on settled octree cells
  int constraint_samples = 32; // fold samples per concave element
  double rank_tol = 1e-10;   // constraint rank filter
  unsigned seed = 7;         // fold sampling sequence offset
};

struct SolveResult {
  Eigen::VectorXd u_hat;   // full-length nodal field, fixed values included
  int dofs = 0;            // free unknowns after Dirichlet elimination
  int constraints = 0;     // retained constraint rows
  double solve_residual = 0.0;
  bool flagged = false;    // residual above the direct-solve watermark
};

// Pre-elimination global system: stiffness triplets, retained
// constraint rows, Neumann load.
struct AssembledSystem {
  GlobalStiffness K;
  ConstraintMatrix C;
  Eigen::VectorXd f;
};

// Constrained assembly: convex elements by the standard rule, concave
// ones by region quadrature at opt.depth, fold constraints sampled and
// rank-filtered, loads with folded boundary faces region-restricted.
AssembledSystem assemble_tfem_system(const Mesh& mesh, const BoundarySpec& bc,
                                     const ExactSolution& exact,
                                     const TfemOptions& opt);

// Conventional assembly over all elements; C is empty.
AssembledSystem assemble_fem_system(const Mesh& mesh, const BoundarySpec& bc,
                                    const ExactSolution& exact,
                                    JacobianMode mode, int gauss_order = 2);

// Constrained solve via the saddle system.  With zero concave elements
// this degenerates to solve_fem(Signed) exactly.
SolveResult solve_tfem(const Mesh& mesh, const BoundarySpec& bc,
                       const ExactSolution& exact,
                       const TfemOptions& opt = {});

// Unconstrained baseline over all elements.
SolveResult solve_fem(const Mesh& mesh, const BoundarySpec& bc,
                      const ExactSolution& exact, JacobianMode mode,
                      int gauss_order = 2);

// Per-node relative error |u_exact(x_i) - u_hat_i| / max(|u_exact(x_i)|,
// 1e-12); returns (max, mean) over all nodes, Dirichlet nodes included.
std::pair<double, double> compute_error(const Eigen::VectorXd& u_hat,
                                        const Mesh& mesh,
                                        const ExactSolution& exact);

enum class Family { TwoElem, EightElem, File };

std::string family_name(Family f);

struct ExperimentConfig {
  Family family = Family::TwoElem;
  std::string mesh_file;        // Family::File only
  std::vector<double> d_values; // must be empty for Family::File
  std::vector<Method> methods{Method::FemSigned, Method::Tfem};
  TfemOptions options;
  std::string output; // CSV path; empty writes no file
};

// One CSV row.  error_code is empty on success; on failure it names the
// failing stage and the numeric error fields are NaN.
struct ErrorReport {
  std::string family;
  double d = 0.0;
  std::string method;
  int depth = 0;
  int dofs = 0;
  int constraints = 0;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  double solve_residual = 0.0;
  double wall_time_s = 0.0;
  std::string error_code;
};

// Runs every (d, method) pair in config order.  A failing run records
// its error code and the sweep continues.  Output is byte-deterministic
// for a fixed config except for the wall_time_s column.
std::vector<ErrorReport> run_experiment(const ExperimentConfig& config);

std::string csv_header();
std::string csv_row(const ErrorReport& r);
void write_csv(const std::vector<ErrorReport>& reports,
               const std::string& path);

// Per-family files "<prefix>.<family>.dat" holding one (d,
// max_rel_error) series per method, d ascending, blank line between
// series.  Errored rows are skipped; empty input is an error.
void emit_plot_data(const std::vector<ErrorReport>& reports,
                    const std::string& prefix);

} // namespace tfem

#endif
