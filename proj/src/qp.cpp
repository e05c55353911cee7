#include "motiontk/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace mtk {

void QpProblem::validate() const {
  if (n <= 0) throw std::invalid_argument("qp: empty problem");
  if (P.rows() != n || P.cols() != n) throw std::invalid_argument("qp: P must be n x n");
  if (c.size() != n) throw std::invalid_argument("qp: c size mismatch");
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n)) {
    throw std::invalid_argument("qp: equality dimensions inconsistent");
  }
  if (G.rows() != h.size() || (G.rows() > 0 && G.cols() != n)) {
    throw std::invalid_argument("qp: inequality dimensions inconsistent");
  }
  Eigen::SparseMatrix<double> D = Eigen::SparseMatrix<double>(P.transpose()) - P;
  double asym = 0.0;
  for (int k = 0; k < D.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(D, k); it; ++it) {
      asym = std::max(asym, std::abs(it.value()));
    }
  }
  if (asym > 1e-12) throw std::invalid_argument("qp: P is not symmetric");
}

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::max_iter: return "max_iter";
    case QpStatus::infeasible: return "infeasible";
  }
  return "?";
}

double QpResiduals::worst() const {
  return std::max(std::max(stationarity, primal_eq),
                  std::max(primal_ineq, complementarity));
}

bool QpResiduals::within(double tol) const { return worst() <= tol; }

namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

std::vector<int> pattern_of(const Eigen::SparseMatrix<double>& H) {
  std::vector<int> sig;
  sig.reserve(H.cols() + H.nonZeros() + 1);
  for (int i = 0; i <= H.cols(); ++i) sig.push_back(H.outerIndexPtr()[i]);
  for (int i = 0; i < H.nonZeros(); ++i) sig.push_back(H.innerIndexPtr()[i]);
  return sig;
}

// Re-solves the KKT system restricted to the active set guessed from the
// dual vector, with iterative refinement against the unregularized system.
// Adopted only when it improves the worst residual, so a wrong guess is
// harmless.  Active rows end up satisfied to machine precision, which the
// penalty loop alone cannot deliver.
void try_polish(const QpProblem& p, const QpSettings& s, QpSolution& sol) {
  const int n = p.n, me = p.m_eq(), mi = p.m_in();
  std::vector<int> act;
  for (int i = 0; i < mi; ++i) {
    if (sol.z[i] > 0.0) act.push_back(i);
  }

  const Eigen::SparseMatrix<double> Gt = p.G.transpose();
  for (int round = 0; round < 3; ++round) {
    const int a = int(act.size());
    const int N = n + me + a;
    std::vector<Eigen::Triplet<double>> tp;
    tp.reserve(size_t(p.P.nonZeros()) + 2 * size_t(p.A.nonZeros()) +
               2 * size_t(p.G.nonZeros()) + N);
    for (int k = 0; k < p.P.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(p.P, k); it; ++it) {
        tp.emplace_back(int(it.row()), int(it.col()), it.value());
      }
    }
    for (int k = 0; k < p.A.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, k); it; ++it) {
        tp.emplace_back(n + int(it.row()), int(it.col()), it.value());
        tp.emplace_back(int(it.col()), n + int(it.row()), it.value());
      }
    }
    for (int k = 0; k < a; ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(Gt, act[k]); it; ++it) {
        tp.emplace_back(n + me + k, int(it.row()), it.value());
        tp.emplace_back(int(it.row()), n + me + k, it.value());
      }
    }
    Eigen::SparseMatrix<double> K0(N, N);
    K0.setFromTriplets(tp.begin(), tp.end());
    // Quasi-definite shift makes the unpivoted LDLT well defined.
    for (int i = 0; i < N; ++i) tp.emplace_back(i, i, i < n ? s.prox : -s.prox);
    Eigen::SparseMatrix<double> K(N, N);
    K.setFromTriplets(tp.begin(), tp.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    if (ldlt.info() != Eigen::Success) return;

    Eigen::VectorXd rhs(N);
    rhs.head(n) = -p.c;
    rhs.segment(n, me) = p.b;
    for (int k = 0; k < a; ++k) rhs[n + me + k] = p.h[act[k]];
    Eigen::VectorXd u = ldlt.solve(rhs);
    for (int pass = 0; pass < 3; ++pass) u += ldlt.solve(rhs - K0 * u);

    bool dropped = false;
    std::vector<int> keep;
    for (int k = 0; k < a; ++k) {
      if (u[n + me + k] < 0.0) {
        dropped = true;
      } else {
        keep.push_back(act[k]);
      }
    }
    if (dropped) {
      act = std::move(keep);
      continue;
    }

    QpSolution cand;
    cand.x = u.head(n);
    cand.y = u.segment(n, me);
    cand.z = Eigen::VectorXd::Zero(mi);
    for (int k = 0; k < a; ++k) cand.z[act[k]] = u[n + me + k];
    const QpResiduals res = kkt_residuals(p, cand);
    if (res.worst() <= sol.residuals.worst()) {
      sol.x = std::move(cand.x);
      sol.y = std::move(cand.y);
      sol.z = std::move(cand.z);
      sol.residuals = res;
      sol.polished = true;
      if (res.within(s.tol)) sol.status = QpStatus::optimal;
    }
    return;
  }
}

}  // namespace

QpSolution QpSolver::solve(const QpProblem& p, const QpSettings& s) {
  p.validate();
  const int n = p.n, me = p.m_eq(), mi = p.m_in();

  QpSolution sol;
  sol.x = s.warm_x.size() == n ? s.warm_x : Eigen::VectorXd::Zero(n);
  sol.y = s.warm_y.size() == me ? s.warm_y : Eigen::VectorXd::Zero(me);
  sol.z = s.warm_z.size() == mi ? Eigen::VectorXd(s.warm_z.cwiseMax(0.0))
                                : Eigen::VectorXd(Eigen::VectorXd::Zero(mi));

  const Eigen::SparseMatrix<double> At = p.A.transpose();
  const Eigen::SparseMatrix<double> Gt = p.G.transpose();
  const Eigen::SparseMatrix<double> AtA = At * p.A;
  Eigen::SparseMatrix<double> Id(n, n);
  Id.setIdentity();

  Eigen::VectorXd& x = sol.x;
  double rho = s.rho0;

  // Augmented Lagrangian value and gradient at the current duals.
  auto eval = [&](const Eigen::VectorXd& xv, Eigen::VectorXd* grad) {
    double val = 0.5 * xv.dot(p.P * xv) + p.c.dot(xv);
    Eigen::VectorXd rA, zh;
    if (me > 0) {
      rA = p.A * xv - p.b;
      val += sol.y.dot(rA) + 0.5 * rho * rA.squaredNorm();
    }
    if (mi > 0) {
      zh = (sol.z + rho * (p.G * xv - p.h)).cwiseMax(0.0);
      val += (zh.squaredNorm() - sol.z.squaredNorm()) / (2.0 * rho);
    }
    if (grad) {
      *grad = p.P * xv + p.c;
      if (me > 0) *grad += At * (sol.y + rho * rA);
      if (mi > 0) *grad += Gt * zh;
    }
    return val;
  };

  double factored_rho = -1.0;
  std::vector<char> active(mi, 0), factored_active;
  Eigen::SparseMatrix<double> H;

  auto refactor = [&]() {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(mi);
    for (int i = 0; i < mi; ++i) d[i] = active[i] ? rho : 0.0;
    // Inactive rows keep structural zeros, so the pattern never changes.
    if (mi > 0) {
      const Eigen::SparseMatrix<double> Gs = d.asDiagonal() * p.G;
      H = p.P + rho * AtA + Eigen::SparseMatrix<double>(Gt * Gs) + s.prox * Id;
    } else {
      H = p.P + rho * AtA + s.prox * Id;
    }
    H.makeCompressed();
    std::vector<int> sig = pattern_of(H);
    if (!analyzed_ || sig != pattern_) {
      ldlt_.analyzePattern(H);
      pattern_ = std::move(sig);
      analyzed_ = true;
    }
    ldlt_.factorize(H);
    if (ldlt_.info() != Eigen::Success) {
      throw std::runtime_error("qp: factorization failed");
    }
    ++sol.factorizations;
    factored_rho = rho;
    factored_active = active;
  };

  double prev_prim = std::numeric_limits<double>::infinity();
  double best_capped_prim = std::numeric_limits<double>::infinity();
  int capped_stall = 0;

  for (int outer = 0; outer < s.max_outer; ++outer) {
    ++sol.outer_iters;

    // Inner minimization of the augmented Lagrangian in x.
    for (int it = 0; it < s.max_inner; ++it) {
      Eigen::VectorXd grad;
      const double val = eval(x, &grad);
      if (inf_norm(grad) <= s.tol) break;
      ++sol.inner_iters;

      if (mi > 0) {
        const Eigen::VectorXd t = sol.z + rho * (p.G * x - p.h);
        for (int i = 0; i < mi; ++i) active[i] = t[i] > 0.0 ? 1 : 0;
      }
      if (factored_rho != rho || factored_active != active) refactor();

      Eigen::VectorXd dir = ldlt_.solve(-grad);
      dir += ldlt_.solve(-grad - H * dir);  // one refinement pass
      const double slope = grad.dot(dir);
      if (slope >= 0.0) break;  // numerically flat

      double step = 1.0;
      while (step > 1e-12 && eval(x + step * dir, nullptr) > val + 1e-4 * step * slope) {
        step *= 0.5;
      }
      x += step * dir;
    }

    // Dual updates and convergence bookkeeping.
    Eigen::VectorXd rA(me), rG(mi);
    if (me > 0) {
      rA = p.A * x - p.b;
      sol.y += rho * rA;
    }
    if (mi > 0) {
      rG = p.G * x - p.h;
      sol.z = (sol.z + rho * rG).cwiseMax(0.0);
    }

    QpResiduals& r = sol.residuals;
    Eigen::VectorXd stat = p.P * x + p.c;
    if (me > 0) stat += At * sol.y;
    if (mi > 0) stat += Gt * sol.z;
    r.stationarity = inf_norm(stat);
    r.primal_eq = inf_norm(rA);
    r.primal_ineq = mi > 0 ? inf_norm(rG.cwiseMax(0.0)) : 0.0;
    r.complementarity = mi > 0 ? inf_norm(sol.z.cwiseProduct(rG)) : 0.0;
    if (r.within(s.tol)) {
      sol.status = QpStatus::optimal;
      if (s.polish) try_polish(p, s, sol);
      return sol;
    }

    const double prim = std::max(r.primal_eq, r.primal_ineq);
    if (prim > 0.25 * prev_prim && rho < s.rho_cap) {
      rho = std::min(rho * s.rho_growth, s.rho_cap);
    }
    if (rho >= s.rho_cap) {
      if (prim < 0.9 * best_capped_prim) {
        best_capped_prim = prim;
        capped_stall = 0;
      } else if (++capped_stall >= 10) {
        sol.status = QpStatus::infeasible;
        return sol;
      }
    }
    prev_prim = prim;
  }

  sol.status = QpStatus::max_iter;
  if (s.polish) try_polish(p, s, sol);
  return sol;
}

QpSolution solve_qp(const QpProblem& p, const QpSettings& s) {
  QpSolver solver;
  return solver.solve(p, s);
}

QpResiduals kkt_residuals(const QpProblem& p, const QpSolution& sol) {
  QpResiduals r;
  Eigen::VectorXd stat = p.P * sol.x + p.c;
  if (p.m_eq() > 0) {
    stat += p.A.transpose() * sol.y;
    r.primal_eq = inf_norm(p.A * sol.x - p.b);
  }
  if (p.m_in() > 0) {
    stat += p.G.transpose() * sol.z;
    const Eigen::VectorXd rG = p.G * sol.x - p.h;
    r.primal_ineq = inf_norm(rG.cwiseMax(0.0));
    r.complementarity = inf_norm(sol.z.cwiseProduct(rG));
  }
  r.stationarity = inf_norm(stat);
  return r;
}

void dump_problem(const QpProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("qp dump: cannot open " + path);
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto matrix = [&](const char* name, const Eigen::SparseMatrix<double>& M) {
    out << name << " " << M.rows() << " " << M.cols() << " " << M.nonZeros() << "\n";
    for (int k = 0; k < M.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it) {
        out << it.row() << " " << it.col() << " " << num(it.value()) << "\n";
      }
    }
  };
  auto vector = [&](const char* name, const Eigen::VectorXd& v) {
    out << name << " " << v.size() << "\n";
    for (int i = 0; i < v.size(); ++i) out << num(v[i]) << "\n";
  };
  out << "qp " << p.n << " " << p.m_eq() << " " << p.m_in() << "\n";
  matrix("P", p.P);
  vector("c", p.c);
  matrix("A", p.A);
  vector("b", p.b);
  matrix("G", p.G);
  vector("h", p.h);
}

}  // namespace mtk
