#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "tileplate/fem.hpp"

namespace tileplate {

void SolverConfig::validate() const {
  if (!(tol > 0.0) || tol > 1e-4) throw SolverError(SolverError::Kind::Config, "solver tol must lie in (0, 1e-4]");
  if (maxiter < 0) throw SolverError(SolverError::Kind::Config, "solver maxiter must be nonnegative");
}

void sym_matvec(const SpMat& A, const Vec& x, Vec& y) {
  const int n = static_cast<int>(A.outerSize());
  y.resize(n);
  const int* outer = A.outerIndexPtr();
  const int* inner = A.innerIndexPtr();
  const double* val = A.valuePtr();
  const int chunks = n > 4096 ? thread_count() : 1;
  // Column j of a symmetric column-major matrix is row j.
  parallel_chunks(n, chunks, [&](int, int b, int e) {
    for (int j = b; j < e; ++j) {
      double s = 0.0;
      for (int k = outer[j]; k < outer[j + 1]; ++k) s += val[k] * x[inner[k]];
      y[j] = s;
    }
  });
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double rel_residual(const SpMat& A, const Vec& b, const Vec& x, double bnorm) {
  Vec Ax;
  sym_matvec(A, x, Ax);
  return (b - Ax).norm() / bnorm;
}

Vec solve_cg(const SpMat& A, const Vec& b, const SolverConfig& cfg, SolveStats* stats) {
  const int n = static_cast<int>(b.size());
  const int maxiter = cfg.maxiter > 0 ? cfg.maxiter : 20 * n + 100;
  const double bnorm = b.norm();
  Vec x = Vec::Zero(n);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }
  Vec dinv = Vec::Ones(n);
  if (cfg.preconditioner == Preconditioner::Jacobi) {
    const Vec d = A.diagonal();
    for (int i = 0; i < n; ++i) {
      if (!(d[i] > 0.0))
        throw SolverError(SolverError::Kind::Breakdown, "cg: non-positive diagonal entry (matrix not SPD)");
      dinv[i] = 1.0 / d[i];
    }
  }
  int it = 0;
  double res = 1.0;
  Vec r = b, z, p, Ap;
  // Restart from the true residual if the recursive one drifted below tol early.
  for (int restart = 0; restart < 8; ++restart) {
    if (restart > 0) {
      sym_matvec(A, x, Ap);
      r = b - Ap;
    }
    z = dinv.cwiseProduct(r);
    p = z;
    double rz = r.dot(z);
    while (it < maxiter) {
      if (r.norm() / bnorm <= cfg.tol) break;
      sym_matvec(A, p, Ap);
      const double pAp = p.dot(Ap);
      if (!(pAp > 0.0)) throw SolverError(SolverError::Kind::Breakdown, "cg breakdown: p'Ap <= 0 (matrix not SPD)");
      const double a = rz / pAp;
      x.noalias() += a * p;
      r.noalias() -= a * Ap;
      z = dinv.cwiseProduct(r);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
      ++it;
    }
    res = rel_residual(A, b, x, bnorm);
    if (res <= cfg.tol) break;
    if (it >= maxiter)
      throw SolverError(SolverError::Kind::MaxIter, "cg: maxiter exceeded (relative residual " + sci(res) + ")");
  }
  if (res > cfg.tol)
    throw SolverError(SolverError::Kind::MaxIter, "cg: residual stagnated at " + sci(res));
  if (stats) *stats = {it, res};
  return x;
}

Vec solve_direct(const SpMat& A, const Vec& b, const SolverConfig& cfg, SolveStats* stats) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return Vec::Zero(b.size());
  }
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw SolverError(SolverError::Kind::Breakdown, "direct: factorization failed");
  if (!(ldlt.vectorD().minCoeff() > 0.0))
    throw SolverError(SolverError::Kind::Breakdown, "direct: non-positive pivot (matrix not SPD)");
  Vec x = ldlt.solve(b);
  double res = rel_residual(A, b, x, bnorm);
  int it = 1;
  for (; it < 5 && res > cfg.tol; ++it) {
    Vec Ax;
    sym_matvec(A, x, Ax);
    x += ldlt.solve(b - Ax);
    res = rel_residual(A, b, x, bnorm);
  }
  if (res > cfg.tol) {
    // Refinement stagnates once the normwise backward error reaches roundoff;
    // for stiff Hermite blocks that floor can sit above tol * ||b||.
    Vec Ax;
    sym_matvec(A, x, Ax);
    const double anorm = (A.cwiseAbs() * Vec::Ones(A.cols())).maxCoeff();
    const double eta = (b - Ax).cwiseAbs().maxCoeff() / (anorm * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());
    if (!(eta <= 1e-14))
      throw SolverError(SolverError::Kind::MaxIter, "direct: residual " + sci(res) + " above tol after refinement");
  }
  if (stats) *stats = {it, res};
  return x;
}

}  // namespace

Vec solve_spd(const SpMat& A, const Vec& b, const SolverConfig& cfg, SolveStats* stats) {
  cfg.validate();
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw SolverError(SolverError::Kind::Config, "solve_spd: dimension mismatch");
  return cfg.method == SolverMethod::CG ? solve_cg(A, b, cfg, stats) : solve_direct(A, b, cfg, stats);
}

}  // namespace tileplate
