#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace bessched {

/// Strictly convex quadratic program
///   minimize    sum_i w_i x_i^2 + c' x
///   subject to  l <= A x <= u
/// with diagonal Hessian weights w > 0 (unique minimizer) and two-sided row
/// bounds; equality rows are expressed as l_i == u_i, one-sided rows use
/// +-infinity.
struct QuadraticProgram {
  struct Triplet {
    int row;
    int col;
    double value;
  };

  std::vector<double> hessian_diag;  // w, one per variable
  std::vector<double> linear_cost;   // c
  std::vector<Triplet> coefficients; // sparse A
  std::vector<double> lower;         // l, one per row
  std::vector<double> upper;         // u

  int num_vars() const { return static_cast<int>(hessian_diag.size()); }
  int num_rows() const { return static_cast<int>(lower.size()); }

  int add_variable(double hessian_weight, double linear_cost_term = 0.0);
  int add_row(double lo, double hi);
  void coeff(int row, int col, double value);
};

enum class QpStatus { Solved, MaxIterations, Infeasible };

const char* to_string(QpStatus status);

struct QpSolution {
  std::vector<double> x;
  std::vector<double> duals;  // one multiplier per row, >0 at upper, <0 at lower bounds
  QpStatus status = QpStatus::MaxIterations;
  double primal_residual = 0.0;  // max violation of l <= Ax <= u
  double dual_residual = 0.0;    // ||2 diag(w) x + c + A' dual||_inf
  int iterations = 0;
  double objective = 0.0;
};

struct QpSettings {
  double tol_abs = 1e-6;
  double tol_rel = 1e-6;
  int max_iter = 100000;
  double rho = 0.1;              // dual step size (equality rows get 1e3x)
  double sigma = 1e-6;           // proximal regularization
  double alpha = 1.6;            // over-relaxation
  bool adaptive_rho = true;
  int check_interval = 25;       // iterations between convergence checks
  bool polish = true;
  double infeasibility_tol = 1e-7;
  int scaling_iters = 10;        // Ruiz equilibration sweeps, 0 disables
};

/// Operator-splitting (ADMM) solve. Deterministic: fixed iteration order, no
/// randomization; identical inputs yield identical iterates on one platform.
/// Returns the first iterate satisfying both residual tests, the best iterate
/// seen when the iteration budget runs out, or an infeasibility certificate.
QpSolution solve(const QuadraticProgram& problem, const QpSettings& settings = {});

/// Residual pair at an arbitrary point:
///   primal = max violation of l <= Ax <= u (0 when feasible)
///   dual   = ||2 diag(w) x + c + A' duals||_inf
std::pair<double, double> kkt_residuals(const QuadraticProgram& problem, std::span<const double> x,
                                        std::span<const double> duals);

double objective_value(const QuadraticProgram& problem, std::span<const double> x);

/// Text dump (dimensions, triplets, bounds) for offline inspection.
void dump_problem(const QuadraticProgram& problem, std::ostream& out);

}  // namespace bessched
