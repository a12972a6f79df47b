#include "bessched/qp.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace bessched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoEqualityFactor = 1e3;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double inf_norm(const Vec& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

void validate(const QuadraticProgram& p) {
  const int n = p.num_vars();
  const int m = p.num_rows();
  if (static_cast<int>(p.linear_cost.size()) != n)
    throw std::invalid_argument("qp: linear_cost size mismatch");
  if (static_cast<int>(p.upper.size()) != m)
    throw std::invalid_argument("qp: bound vector size mismatch");
  for (double w : p.hessian_diag)
    if (!(w > 0.0)) throw std::invalid_argument("qp: hessian weights must be > 0");
  for (int i = 0; i < m; ++i)
    if (!(p.lower[i] <= p.upper[i])) throw std::invalid_argument("qp: lower > upper on row " + std::to_string(i));
  for (const auto& t : p.coefficients)
    if (t.row < 0 || t.row >= m || t.col < 0 || t.col >= n)
      throw std::invalid_argument("qp: triplet out of range");
}

struct Workspace {
  int n = 0, m = 0;
  Vec p_diag;  // scaled 2w
  Vec q;       // scaled c
  SpMat a;     // scaled A
  SpMat at;
  Vec lower, upper;  // scaled
  Vec d_scale, e_scale;
  double cost_scale = 1.0;
  Vec rho;  // per row
  Eigen::SimplicialLDLT<SpMat> kkt;

  void factor(double sigma) {
    SpMat m_mat = at * rho.asDiagonal() * a;
    for (int i = 0; i < n; ++i) m_mat.coeffRef(i, i) += p_diag[i] + sigma;
    kkt.compute(m_mat);
    if (kkt.info() != Eigen::Success) throw std::runtime_error("qp: KKT factorization failed");
  }
};

// Modified Ruiz equilibration of the stacked KKT matrix, with cost scaling.
void equilibrate(Workspace& w, int iters) {
  w.d_scale = Vec::Ones(w.n);
  w.e_scale = Vec::Ones(w.m);
  w.cost_scale = 1.0;
  if (iters <= 0) return;

  for (int it = 0; it < iters; ++it) {
    Vec col_norm = Vec::Zero(w.n);
    Vec row_norm = Vec::Zero(w.m);
    for (int k = 0; k < w.a.outerSize(); ++k)
      for (SpMat::InnerIterator jt(w.a, k); jt; ++jt) {
        col_norm[jt.col()] = std::max(col_norm[jt.col()], std::abs(jt.value()));
        row_norm[jt.row()] = std::max(row_norm[jt.row()], std::abs(jt.value()));
      }
    for (int j = 0; j < w.n; ++j) col_norm[j] = std::max(col_norm[j], std::abs(w.p_diag[j]));

    Vec dj(w.n), ei(w.m);
    for (int j = 0; j < w.n; ++j)
      dj[j] = col_norm[j] > 0 ? std::clamp(1.0 / std::sqrt(col_norm[j]), kMinScale, kMaxScale) : 1.0;
    for (int i = 0; i < w.m; ++i)
      ei[i] = row_norm[i] > 0 ? std::clamp(1.0 / std::sqrt(row_norm[i]), kMinScale, kMaxScale) : 1.0;

    w.p_diag = w.p_diag.cwiseProduct(dj.cwiseProduct(dj));
    w.q = w.q.cwiseProduct(dj);
    w.a = ei.asDiagonal() * w.a * dj.asDiagonal();
    for (int i = 0; i < w.m; ++i) {
      if (std::isfinite(w.lower[i])) w.lower[i] *= ei[i];
      if (std::isfinite(w.upper[i])) w.upper[i] *= ei[i];
    }
    w.d_scale = w.d_scale.cwiseProduct(dj);
    w.e_scale = w.e_scale.cwiseProduct(ei);

    // Cost normalization, as in standard Ruiz-with-cost schemes.
    const double p_mean = w.p_diag.size() ? w.p_diag.cwiseAbs().mean() : 0.0;
    const double gamma_inv = std::max(p_mean, inf_norm(w.q));
    if (gamma_inv > 0) {
      const double gamma = std::clamp(1.0 / gamma_inv, kMinScale, kMaxScale);
      w.p_diag *= gamma;
      w.q *= gamma;
      w.cost_scale *= gamma;
    }
  }
  w.at = SpMat(w.a.transpose());
}

struct Residuals {
  double prim = 0.0, dual = 0.0;
  double prim_scale = 0.0, dual_scale = 0.0;
  double eps_prim = 0.0, eps_dual = 0.0;
  bool converged() const { return prim <= eps_prim && dual <= eps_dual; }
};

Residuals unscaled_residuals(const Workspace& w, const Vec& x, const Vec& z, const Vec& y,
                             double tol_abs, double tol_rel) {
  const Vec ax = w.a * x;
  const Vec ax_u = w.e_scale.cwiseInverse().cwiseProduct(ax);
  const Vec z_u = w.e_scale.cwiseInverse().cwiseProduct(z);
  const Vec px = w.p_diag.cwiseProduct(x);
  const Vec aty = w.at * y;
  const Vec d_inv = w.d_scale.cwiseInverse();
  const double ci = 1.0 / w.cost_scale;

  Residuals r;
  r.prim = inf_norm(ax_u - z_u);
  r.dual = ci * inf_norm(d_inv.cwiseProduct(px + w.q + aty));
  r.prim_scale = std::max(inf_norm(ax_u), inf_norm(z_u));
  r.dual_scale = ci * std::max({inf_norm(d_inv.cwiseProduct(px)), inf_norm(d_inv.cwiseProduct(w.q)),
                                inf_norm(d_inv.cwiseProduct(aty))});
  r.eps_prim = tol_abs + tol_rel * r.prim_scale;
  r.eps_dual = tol_abs + tol_rel * r.dual_scale;
  return r;
}

bool primal_infeasibility_certificate(const Workspace& w, const Vec& dy, double tol) {
  // Unscale the dual direction, then test the Farkas-type certificate.
  Vec dy_u = w.e_scale.cwiseProduct(dy) / w.cost_scale;
  const double norm = inf_norm(dy_u);
  if (norm < 1e-14) return false;
  dy_u /= norm;
  // Unscaled A = E^{-1} A_s D^{-1}, hence A' v = D^{-1} A_s' E^{-1} v.
  const Vec atv = w.d_scale.cwiseInverse().cwiseProduct(w.at * w.e_scale.cwiseInverse().cwiseProduct(dy_u));
  if (inf_norm(atv) > tol) return false;
  double support = 0.0;
  for (int i = 0; i < w.m; ++i) {
    const double li = std::isfinite(w.lower[i]) ? w.lower[i] / w.e_scale[i] : -kInf;
    const double ui = std::isfinite(w.upper[i]) ? w.upper[i] / w.e_scale[i] : kInf;
    if (dy_u[i] > 0) {
      if (!std::isfinite(ui)) return false;
      support += ui * dy_u[i];
    } else if (dy_u[i] < 0) {
      if (!std::isfinite(li)) return false;
      support += li * dy_u[i];
    }
  }
  return support < -tol;
}

// Solution polish: treat the near-active rows as equalities and solve the
// regularized reduced KKT system, with a few refinement sweeps. Falls back to
// the ADMM iterate when the polished point is not better.
bool polish(const Workspace& w, const QpSettings& st, Vec& x, Vec& z, Vec& y) {
  std::vector<int> active;
  std::vector<double> rhs_act;
  for (int i = 0; i < w.m; ++i) {
    if (y[i] < -1e-10 && std::isfinite(w.lower[i])) {
      active.push_back(i);
      rhs_act.push_back(w.lower[i]);
    } else if (y[i] > 1e-10 && std::isfinite(w.upper[i])) {
      active.push_back(i);
      rhs_act.push_back(w.upper[i]);
    }
  }
  const int na = static_cast<int>(active.size());
  const int dim = w.n + na;
  const double delta = 1e-8;

  std::vector<Eigen::Triplet<double>> trips;
  for (int j = 0; j < w.n; ++j) trips.emplace_back(j, j, w.p_diag[j] + delta);
  for (int k = 0; k < na; ++k) {
    trips.emplace_back(w.n + k, w.n + k, -delta);
    for (SpMat::InnerIterator jt(w.at, active[k]); jt; ++jt)
      trips.emplace_back(jt.row(), w.n + k, jt.value());
    for (SpMat::InnerIterator jt(w.at, active[k]); jt; ++jt)
      trips.emplace_back(w.n + k, jt.row(), jt.value());
  }
  SpMat kkt(dim, dim);
  kkt.setFromTriplets(trips.begin(), trips.end());

  Eigen::SparseLU<SpMat> lu;
  lu.compute(kkt);
  if (lu.info() != Eigen::Success) return false;

  Vec rhs(dim);
  rhs.head(w.n) = -w.q;
  for (int k = 0; k < na; ++k) rhs[w.n + k] = rhs_act[k];

  Vec sol = lu.solve(rhs);
  // Iterative refinement against the unregularized system.
  for (int it = 0; it < 3; ++it) {
    Vec resid = rhs;
    resid.head(w.n) -= w.p_diag.cwiseProduct(sol.head(w.n));
    for (int k = 0; k < na; ++k) {
      double dot = 0.0;
      for (SpMat::InnerIterator jt(w.at, active[k]); jt; ++jt) {
        resid[jt.row()] -= jt.value() * sol[w.n + k];
        dot += jt.value() * sol[jt.row()];
      }
      resid[w.n + k] -= dot;
    }
    sol += lu.solve(resid);
  }

  Vec x_new = sol.head(w.n);
  Vec y_new = Vec::Zero(w.m);
  for (int k = 0; k < na; ++k) y_new[active[k]] = sol[w.n + k];
  Vec z_new = w.a * x_new;
  for (int i = 0; i < w.m; ++i) z_new[i] = std::clamp(z_new[i], w.lower[i], w.upper[i]);

  const Residuals before = unscaled_residuals(w, x, z, y, st.tol_abs, st.tol_rel);
  const Residuals after = unscaled_residuals(w, x_new, z_new, y_new, st.tol_abs, st.tol_rel);
  if (std::max(after.prim, after.dual) < std::max(before.prim, before.dual)) {
    x = x_new;
    z = z_new;
    y = y_new;
    return true;
  }
  return false;
}

}  // namespace

int QuadraticProgram::add_variable(double hessian_weight, double linear_cost_term) {
  hessian_diag.push_back(hessian_weight);
  linear_cost.push_back(linear_cost_term);
  return num_vars() - 1;
}

int QuadraticProgram::add_row(double lo, double hi) {
  lower.push_back(lo);
  upper.push_back(hi);
  return num_rows() - 1;
}

void QuadraticProgram::coeff(int row, int col, double value) {
  coefficients.push_back({row, col, value});
}

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Solved: return "solved";
    case QpStatus::MaxIterations: return "max_iter";
    case QpStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

QpSolution solve(const QuadraticProgram& problem, const QpSettings& st) {
  validate(problem);
  const int n = problem.num_vars();
  const int m = problem.num_rows();

  QpSolution result;
  if (n == 0) {
    result.status = QpStatus::Solved;
    return result;
  }

  // Unconstrained: closed form.
  if (m == 0) {
    result.x.resize(n);
    for (int j = 0; j < n; ++j) result.x[j] = -problem.linear_cost[j] / (2.0 * problem.hessian_diag[j]);
    result.status = QpStatus::Solved;
    result.objective = objective_value(problem, result.x);
    return result;
  }

  Workspace w;
  w.n = n;
  w.m = m;
  w.p_diag = Vec(n);
  w.q = Vec(n);
  for (int j = 0; j < n; ++j) {
    w.p_diag[j] = 2.0 * problem.hessian_diag[j];
    w.q[j] = problem.linear_cost[j];
  }
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(problem.coefficients.size());
    for (const auto& t : problem.coefficients) trips.emplace_back(t.row, t.col, t.value);
    w.a = SpMat(m, n);
    w.a.setFromTriplets(trips.begin(), trips.end());
  }
  w.lower = Eigen::Map<const Vec>(problem.lower.data(), m);
  w.upper = Eigen::Map<const Vec>(problem.upper.data(), m);
  w.at = SpMat(w.a.transpose());

  equilibrate(w, st.scaling_iters);

  double rho_bar = st.rho;
  auto set_rho = [&] {
    w.rho = Vec::Constant(m, rho_bar);
    for (int i = 0; i < m; ++i)
      if (w.lower[i] == w.upper[i]) w.rho[i] = std::clamp(rho_bar * kRhoEqualityFactor, kRhoMin, kRhoMax);
  };
  set_rho();
  w.factor(st.sigma);

  Vec x = Vec::Zero(n), z = Vec::Zero(m), y = Vec::Zero(m);
  Vec x_tilde(n), z_tilde(m), rhs(n);
  Vec y_prev(m);

  Vec best_x = x, best_z = z, best_y = y;
  double best_score = kInf;
  int iterations = 0;
  QpStatus status = QpStatus::MaxIterations;

  for (int k = 1; k <= st.max_iter; ++k) {
    iterations = k;
    y_prev = y;

    rhs = st.sigma * x - w.q + w.at * (w.rho.cwiseProduct(z) - y);
    x_tilde = w.kkt.solve(rhs);
    z_tilde = w.a * x_tilde;

    x = st.alpha * x_tilde + (1.0 - st.alpha) * x;
    const Vec z_relaxed = st.alpha * z_tilde + (1.0 - st.alpha) * z;
    const Vec z_pre = z_relaxed + w.rho.cwiseInverse().cwiseProduct(y);
    for (int i = 0; i < m; ++i) z[i] = std::clamp(z_pre[i], w.lower[i], w.upper[i]);
    y = y + w.rho.cwiseProduct(z_relaxed - z);

    if (k % st.check_interval != 0 && k != st.max_iter) continue;

    const Residuals res = unscaled_residuals(w, x, z, y, st.tol_abs, st.tol_rel);
    const double score = std::max(res.prim / std::max(res.eps_prim, 1e-30),
                                  res.dual / std::max(res.eps_dual, 1e-30));
    if (score < best_score) {
      best_score = score;
      best_x = x;
      best_z = z;
      best_y = y;
    }
    if (res.converged()) {
      status = QpStatus::Solved;
      break;
    }
    if (primal_infeasibility_certificate(w, y - y_prev, st.infeasibility_tol)) {
      status = QpStatus::Infeasible;
      break;
    }
    if (st.adaptive_rho && k % (st.check_interval * 4) == 0) {
      const double pr = res.prim / std::max(res.prim_scale, 1e-12);
      const double du = res.dual / std::max(res.dual_scale, 1e-12);
      if (pr > 0 && du > 0) {
        const double ratio = std::sqrt(pr / du);
        if (ratio > 5.0 || ratio < 0.2) {
          rho_bar = std::clamp(rho_bar * ratio, kRhoMin, kRhoMax);
          set_rho();
          w.factor(st.sigma);
        }
      }
    }
  }

  if (status == QpStatus::MaxIterations) {
    x = best_x;
    z = best_z;
    y = best_y;
  }
  if (status == QpStatus::Solved && st.polish) polish(w, st, x, z, y);

  result.x.resize(n);
  result.duals.resize(m);
  for (int j = 0; j < n; ++j) result.x[j] = w.d_scale[j] * x[j];
  for (int i = 0; i < m; ++i) result.duals[i] = w.e_scale[i] * y[i] / w.cost_scale;
  result.status = status;
  result.iterations = iterations;
  auto [pr, du] = kkt_residuals(problem, result.x, result.duals);
  result.primal_residual = pr;
  result.dual_residual = du;
  result.objective = objective_value(problem, result.x);
  return result;
}

std::pair<double, double> kkt_residuals(const QuadraticProgram& problem, std::span<const double> x,
                                        std::span<const double> duals) {
  const int n = problem.num_vars();
  const int m = problem.num_rows();
  if (static_cast<int>(x.size()) != n || static_cast<int>(duals.size()) != m)
    throw std::invalid_argument("kkt_residuals: dimension mismatch");

  std::vector<double> ax(m, 0.0), aty(n, 0.0);
  for (const auto& t : problem.coefficients) {
    ax[t.row] += t.value * x[t.col];
    aty[t.col] += t.value * duals[t.row];
  }
  double prim = 0.0;
  for (int i = 0; i < m; ++i) {
    if (std::isfinite(problem.lower[i])) prim = std::max(prim, problem.lower[i] - ax[i]);
    if (std::isfinite(problem.upper[i])) prim = std::max(prim, ax[i] - problem.upper[i]);
  }
  double dual = 0.0;
  for (int j = 0; j < n; ++j)
    dual = std::max(dual,
                    std::abs(2.0 * problem.hessian_diag[j] * x[j] + problem.linear_cost[j] + aty[j]));
  return {prim, dual};
}

double objective_value(const QuadraticProgram& problem, std::span<const double> x) {
  double obj = 0.0;
  for (int j = 0; j < problem.num_vars(); ++j)
    obj += problem.hessian_diag[j] * x[j] * x[j] + problem.linear_cost[j] * x[j];
  return obj;
}

void dump_problem(const QuadraticProgram& problem, std::ostream& out) {
  out << "qp n=" << problem.num_vars() << " m=" << problem.num_rows() << "\n";
  out << "hessian_diag:";
  for (double w : problem.hessian_diag) out << ' ' << w;
  out << "\nlinear_cost:";
  for (double c : problem.linear_cost) out << ' ' << c;
  out << "\ntriplets (row col value):\n";
  for (const auto& t : problem.coefficients)
    out << "  " << t.row << ' ' << t.col << ' ' << t.value << "\n";
  out << "bounds (lower upper):\n";
  for (int i = 0; i < problem.num_rows(); ++i)
    out << "  " << problem.lower[i] << ' ' << problem.upper[i] << "\n";
}

}  // namespace bessched
