#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <chrono>
#include <string>
#include <unsupported/Eigen/IterativeSolvers>

#include "ladg/core.hpp"

namespace ladg {

using SpMat = Eigen::SparseMatrix<double>;

enum class SolveMethod { direct, cg_ic, gmres_ilu };

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::direct: return "direct";
    case SolveMethod::cg_ic: return "cg-ic";
    case SolveMethod::gmres_ilu: return "gmres-ilu";
  }
  return "?";
}

inline SolveMethod solve_method_from_string(const std::string& s) {
  if (s == "direct") return SolveMethod::direct;
  if (s == "cg-ic") return SolveMethod::cg_ic;
  if (s == "gmres-ilu") return SolveMethod::gmres_ilu;
  throw LadgError("unknown solver '" + s + "' (direct | cg-ic | gmres-ilu)");
}

struct SolveStats {
  SolveMethod method = SolveMethod::direct;
  int iterations = 0;      // 0 for the direct path
  double seconds = 0.0;
  double residual_norm = 0.0;  // ||b - A x||_2, recomputed explicitly
};

struct SolveFailure : LadgError {
  SolveStats stats;
  SolveFailure(const std::string& msg, SolveStats st)
      : LadgError(msg), stats(st) {}
};

struct SolveOptions {
  SolveMethod method = SolveMethod::direct;
  double rtol = 1e-10;
  int max_iter_factor = 10;  // cap = factor * n
  int gmres_restart = 50;
};

inline bool is_symmetric(const SpMat& A, double rel_tol = 1e-12) {
  SpMat D = SpMat(A.transpose()) - A;
  double scale = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  double worst = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SpMat::InnerIterator it(D, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst <= rel_tol * std::max(scale, 1e-300);
}

/// Solves A x = b by the requested method. Iterative paths stop at
/// ||b - A x|| <= rtol ||b|| and throw SolveFailure when the iteration cap
/// is hit without convergence.
inline std::pair<Eigen::VectorXd, SolveStats> solve(const SpMat& A,
                                                    const Eigen::VectorXd& b,
                                                    const SolveOptions& opt = {}) {
  LADG_REQUIRE(A.rows() == A.cols() && A.rows() == b.size(),
               "solve: shape mismatch");
  auto t0 = std::chrono::steady_clock::now();
  SolveStats st;
  st.method = opt.method;
  Eigen::VectorXd x;
  long max_it = std::max<long>(100, opt.max_iter_factor * long(A.rows()));

  switch (opt.method) {
    case SolveMethod::direct: {
      Eigen::SparseLU<SpMat> lu;
      lu.compute(A);
      if (lu.info() != Eigen::Success)
        throw SolveFailure("direct solve: factorization failed", st);
      x = lu.solve(b);
      break;
    }
    case SolveMethod::cg_ic: {
      if (!is_symmetric(A))
        throw SolveFailure("cg-ic: matrix is not symmetric", st);
      Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                               Eigen::IncompleteCholesky<double>> cg;
      cg.setTolerance(opt.rtol);
      cg.setMaxIterations(max_it);
      cg.compute(A);
      if (cg.info() != Eigen::Success)
        throw SolveFailure("cg-ic: preconditioner setup failed", st);
      x = cg.solve(b);
      st.iterations = int(cg.iterations());
      if (cg.info() != Eigen::Success) {
        st.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0).count();
        st.residual_norm = (b - A * x).norm();
        throw SolveFailure("cg-ic: no convergence within " +
                               std::to_string(st.iterations) + " iterations",
                           st);
      }
      break;
    }
    case SolveMethod::gmres_ilu: {
      Eigen::GMRES<SpMat, Eigen::IncompleteLUT<double>> gm;
      gm.set_restart(opt.gmres_restart);
      gm.setTolerance(opt.rtol);
      gm.setMaxIterations(max_it);
      gm.compute(A);
      if (gm.info() != Eigen::Success)
        throw SolveFailure("gmres-ilu: preconditioner setup failed", st);
      x = gm.solve(b);
      st.iterations = int(gm.iterations());
      if (gm.info() != Eigen::Success) {
        st.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0).count();
        st.residual_norm = (b - A * x).norm();
        throw SolveFailure("gmres-ilu: no convergence within " +
                               std::to_string(st.iterations) + " iterations",
                           st);
      }
      break;
    }
  }
  st.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  st.residual_norm = (b - A * x).norm();
  return {std::move(x), st};
}

}  // namespace ladg
