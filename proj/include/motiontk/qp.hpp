#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace mtk {

// Sparse convex quadratic program
//   min  1/2 x' P x + c' x   s.t.  A x = b,  G x <= h
// solved with an augmented Lagrangian: the duals are updated outer-loop,
// each inner subproblem is minimized by a semismooth Newton method on the
// proximal-regularized system.  The sparsity pattern of the Newton matrix is
// fixed across active-set changes (inactive rows contribute structural
// zeros), so the symbolic factorization is computed once and reused, also
// across repeated solves of same-pattern problems.

struct QpProblem {
  int n = 0;
  Eigen::SparseMatrix<double> P;  // n x n, symmetric, PSD
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> A;  // m_eq x n
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> G;  // m_in x n
  Eigen::VectorXd h;

  int m_eq() const { return int(A.rows()); }
  int m_in() const { return int(G.rows()); }
  void validate() const;  // throws std::invalid_argument
};

struct QpSettings {
  double tol = 1e-8;        // primal/dual/complementarity tolerance
  int max_outer = 200;
  int max_inner = 100;
  double rho0 = 0.1;        // initial penalty
  double rho_growth = 10.0;
  double rho_cap = 1e7;
  double prox = 1e-9;       // proximal regularization of the Newton matrix
  bool polish = false;      // active-set KKT refinement after the AL loop
  Eigen::VectorXd warm_x, warm_y, warm_z;  // empty = cold start
};

enum class QpStatus { optimal, max_iter, infeasible };

const char* to_string(QpStatus s);

struct QpResiduals {
  double stationarity = 0.0;    // ||P x + c + A'y + G'z||_inf
  double primal_eq = 0.0;       // ||A x - b||_inf
  double primal_ineq = 0.0;     // ||max(G x - h, 0)||_inf
  double complementarity = 0.0; // max_i |z_i (G x - h)_i|
  double worst() const;
  bool within(double tol) const;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // equality duals
  Eigen::VectorXd z;  // inequality duals, >= 0
  QpStatus status = QpStatus::max_iter;
  QpResiduals residuals;
  int outer_iters = 0;
  int inner_iters = 0;
  int factorizations = 0;
  bool polished = false;  // polish step ran and improved the residuals
};

class QpSolver {
 public:
  QpSolution solve(const QpProblem& p, const QpSettings& s = QpSettings());

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  std::vector<int> pattern_;  // Newton matrix structure of the last analyze
  bool analyzed_ = false;
};

// One-shot convenience wrapper.
QpSolution solve_qp(const QpProblem& p, const QpSettings& s = QpSettings());

// Recomputes every KKT residual from scratch for a candidate solution.
QpResiduals kkt_residuals(const QpProblem& p, const QpSolution& sol);

// Plain-text triplet dump (matrix-market style) for external cross-checking.
void dump_problem(const QpProblem& p, const std::string& path);

}  // namespace mtk
