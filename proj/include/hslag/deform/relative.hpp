#pragma once

// Newton solver for the relative stationarity equation: find a potential h
// on L so that the residual d* a_H of the deformed immersion lies in the
// finite-dimensional obstruction space spanned by restrictions of ambient
// Killing potentials. The quartic operator box serves as the (pseudo-)
// inverse of the linearization; on backends where the analytic assembly is
// unavailable it is frozen at the seed under the reference structure.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hslag/geometry/perturbed.hpp"
#include "hslag/jacobi/box.hpp"
#include "hslag/lagrangian/deform.hpp"

namespace hslag {

/// Same parametrization, new ambient structure (shared symplectic form).
inline TorusImmersion rebase(const TorusImmersion& ell,
                             std::shared_ptr<const ChartedManifold> M) {
  return TorusImmersion(std::move(M), ell.gridPtr(), ell.winding(),
                        ell.periodicPart());
}

struct RelativeHslagProblem {
  std::shared_ptr<const ChartedManifold> structure;  // the (possibly
                                                     // perturbed) J
  TorusImmersion seed;
  std::vector<ScalarField> obstruction_potentials;  // basis of the complement
  double residual_tol = 1e-8;
  int max_iter = 25;
  double cond_max = 1e14;
  int box_m = -1;       // basis truncation for the inverse; -1 = N/2 - 1
  int flow_steps = 24;  // deformation integrator steps
};

struct RelativeSolution {
  VectorXd h;               // node samples of the solved potential
  TorusImmersion ell_h;     // deformed immersion under the new structure
  VectorXd obstruction;     // coefficients over obstruction_potentials
  VectorXd obstruction_nodes;
  std::vector<double> history;  // L2 norms of the projected residual
  int iterations = 0;
};

namespace detail {

/// Truncated-spectrum pseudoinverse applied to a coefficient vector.
inline VectorXd box_pinv_apply(const BoxOperator& op, const SpectralReport& rep,
                               const VectorXd& rhs, double cond_max) {
  const double lam_max = rep.eigenvalues.cwiseAbs().maxCoeff();
  double lam_min = 0.0;
  VectorXd out = VectorXd::Zero(rhs.size());
  MatrixXd A = 0.5 * (op.matrix + op.matrix.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(A, op.gram);
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()[i];
    if (std::abs(lam) < rep.kernel_tol) continue;
    if (lam_min == 0.0 || std::abs(lam) < lam_min) lam_min = std::abs(lam);
    VectorXd v = es.eigenvectors().col(i);
    out += v * (v.dot(rhs) / lam);
  }
  if (lam_min > 0 && lam_max / lam_min > cond_max)
    throw IllConditionedBox("spectral condition number " +
                            std::to_string(lam_max / lam_min));
  return out;
}

}  // namespace detail

inline RelativeSolution solve_relative_hslag(const RelativeHslagProblem& prob,
                                             const VectorXd* warm = nullptr) {
  const auto& grid = prob.seed.grid();
  const int sz = grid.size();
  TorusImmersion seed = rebase(prob.seed, prob.structure);

  // Frozen fallback operator when the structure is not integrable: the seed
  // under the perturbed metric's base would need the full almost-Kahler
  // linearization; the reference assembly is an adequate quasi-Newton map.
  const bool reassemble = prob.structure->integrable();
  BoxOperator op;
  SpectralReport rep;
  if (!reassemble) {
    auto pert = std::dynamic_pointer_cast<const PerturbedManifold>(
        prob.structure);
    TorusImmersion ref =
        pert ? TorusImmersion(
                   std::shared_ptr<const ChartedManifold>(pert, &pert->base()),
                   prob.seed.gridPtr(), prob.seed.winding(),
                   prob.seed.periodicPart())
             : prob.seed;
    op = assemble_box(ref, prob.box_m);
    rep = spectrum(op);
  }

  RelativeSolution sol;
  sol.h = warm ? *warm : VectorXd::Zero(sz);
  double rho = detail::tube_radius_estimate(seed);
  auto deformed = [&](const VectorXd& h) {
    HamiltonianDeformation d{h, rho, prob.flow_steps};
    return deform(seed, d);
  };
  sol.ell_h = deformed(sol.h);

  int stale = 0;
  for (int it = 0; it <= prob.max_iter; ++it) {
    MaslovData md = mean_curvature(sol.ell_h);
    const InducedGeometry& geo = md.geom;
    VectorXd mu = grid.cellWeight() * geo.sqrtdet;

    // project the residual onto the restricted obstruction space
    const int K = int(prob.obstruction_potentials.size());
    MatrixXd Q(sz, K);
    for (int k = 0; k < K; ++k)
      Q.col(k) = sol.ell_h.pullback(prob.obstruction_potentials[k]);
    VectorXd r = md.residual, rperp = r;
    sol.obstruction = VectorXd::Zero(K);
    sol.obstruction_nodes = VectorXd::Zero(sz);
    if (K > 0) {
      MatrixXd G = Q.transpose() * mu.asDiagonal() * Q;
      Eigen::SelfAdjointEigenSolver<MatrixXd> eg(G);
      if (eg.eigenvalues().minCoeff() <
          1e-10 * std::max(1.0, eg.eigenvalues().maxCoeff()))
        throw ObstructionRankLoss("restricted obstruction basis degenerated");
      sol.obstruction = G.ldlt().solve(Q.transpose() * (mu.cwiseProduct(r)));
      sol.obstruction_nodes = Q * sol.obstruction;
      rperp = r - sol.obstruction_nodes;
    }
    double rnorm = std::sqrt(
        grid.integrate(rperp.array().square().matrix().cwiseProduct(
            geo.sqrtdet)));
    sol.history.push_back(rnorm);
    sol.iterations = it;
    if (rnorm < prob.residual_tol) return sol;
    if (it == prob.max_iter) break;
    if (sol.history.size() > 1 && rnorm >= sol.history[sol.history.size() - 2]) {
      if (++stale >= 5) throw NewtonDiverged("residual stopped decreasing");
    } else {
      stale = 0;
    }

    if (reassemble) {
      op = assemble_box(sol.ell_h, prob.box_m);
      rep = spectrum(op);
    }
    // coefficients of the projected residual, then h <- h + box^+ rperp
    VectorXd rhs = op.gram.ldlt().solve(
        op.samples.transpose() * (op.weights.cwiseProduct(rperp)));
    VectorXd delta = detail::box_pinv_apply(op, rep, rhs, prob.cond_max);
    sol.h += op.samples * delta;
    sol.ell_h = deformed(sol.h);
  }
  throw NewtonDiverged("no convergence in " + std::to_string(prob.max_iter) +
                       " iterations");
}

}  // namespace hslag
