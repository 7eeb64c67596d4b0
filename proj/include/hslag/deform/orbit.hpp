#pragma once

// Modified-volume minimization over the ambient Hamiltonian isometry group:
// exponential parametrization through Killing-potential flows, stabilizer
// detection, finite-difference descent with Richardson-certified gradients,
// and warm-started continuation along a seed family of Lagrangians.

#include <cmath>
#include <random>
#include <functional>
#include <vector>

#include "hslag/deform/relative.hpp"
#include "hslag/lagrangian/harmonic.hpp"

namespace hslag {

struct GroupBasis {
  std::vector<ScalarField> potentials;  // reference Killing basis
  MatrixXd transverse;  // combos transverse to the stabilizer (cols)
  MatrixXd stabilizer;  // combos whose flows preserve ell(L) (cols)
};

/// Split the Killing potentials into the stabilizer of ell(L) and a
/// transverse complement, by the rank of their normal displacement fields.
inline GroupBasis orbit_group(const TorusImmersion& ell,
                              std::vector<ScalarField> pots, double tol = 1e-8) {
  GroupBasis gb;
  gb.potentials = std::move(pots);
  const int K = int(gb.potentials.size());
  const auto& grid = ell.grid();
  const int sz = grid.size(), cd = ell.chartDim();
  InducedGeometry geo = induced_geometry(ell);
  const ChartedManifold& M = ell.manifold();
  MatrixXd D(sz * cd, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < sz; ++j) {
      VectorXd p = ell.nodeValue(j);
      VectorXd X = hamiltonian_field(M, gb.potentials[k], p);
      // normal part of the generator along the immersion
      X -= geo.dl[j] * (geo.gLinv[j] * (geo.dl[j].transpose() *
                                        (M.metric(p) * X)));
      D.block(j * cd, k, cd, 1) = X;
    }
  Eigen::JacobiSVD<MatrixXd> svd(D, Eigen::ComputeThinV);
  const double smax =
      svd.singularValues().size() ? svd.singularValues().maxCoeff() : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol * std::max(1.0, smax)) ++rank;
  gb.transverse = svd.matrixV().leftCols(rank);
  gb.stabilizer = svd.matrixV().rightCols(K - rank);
  return gb;
}

inline GroupBasis orbit_group(const TorusImmersion& ell, double tol = 1e-8) {
  return orbit_group(ell, ell.manifold().killingPotentials(), tol);
}

namespace detail {

inline ScalarField combo_potential(const std::vector<ScalarField>& pots,
                                   const VectorXd& c) {
  ScalarField f;
  f.name = "combo";
  auto p2 = pots;  // captured copy
  f.value = [p2, c](const VectorXd& p) {
    double acc = 0.0;
    for (int k = 0; k < c.size(); ++k) acc += c[k] * p2[k].value(p);
    return acc;
  };
  bool grads = true;
  for (const auto& p : p2)
    if (!p.grad) grads = false;
  if (grads)
    f.grad = [p2, c](const VectorXd& p) {
      VectorXd acc = c[0] * p2[0].grad(p);
      for (int k = 1; k < c.size(); ++k) acc += c[k] * p2[k].grad(p);
      return acc;
    };
  return f;
}

/// Seed transported by the exponential of the group parameters.
inline TorusImmersion flow_seed(const TorusImmersion& seed,
                                const GroupBasis& gb, const VectorXd& u) {
  if (u.size() == 0 || u.norm() == 0.0) return seed;
  ScalarField kappa =
      combo_potential(gb.potentials, VectorXd(gb.transverse * u));
  auto M = seed.manifoldPtr();
  return TorusImmersion::fromFunction(
      M, seed.gridPtr(), seed.winding(), [&](const VectorXd& th) {
        return hamiltonian_flow(*M, kappa, 1.0, seed.value(th));
      });
}

}  // namespace detail

/// vol(L, ell_h^* g_J) after transporting the seed by u and re-solving.
inline double modified_volume(const RelativeHslagProblem& prob,
                              const GroupBasis& gb, const VectorXd& u,
                              VectorXd* warm = nullptr,
                              RelativeSolution* out = nullptr) {
  RelativeHslagProblem moved = prob;
  moved.seed = detail::flow_seed(prob.seed, gb, u);
  RelativeSolution sol = solve_relative_hslag(moved, warm);
  if (warm) *warm = sol.h;
  double v = induced_geometry(sol.ell_h).volume;
  if (out) *out = std::move(sol);
  return v;
}

struct OrbitOptions {
  double grad_step = 1e-3;
  double grad_tol = 1e-7;
  double hess_step = 1e-2;
  int max_iter = 60;
  double presearch_radius = 0.0;  // 0 = start at the identity
  int presearch_points = 0;
  double hslag_tol = 1e-6;
  unsigned seed = 20240817;
};

struct OrbitMinimum {
  VectorXd u;
  TorusImmersion ell;
  double volume = 0.0;
  double grad_norm = 0.0;
  VectorXd hessian_eigenvalues;
  bool nondegenerate = false;
  double residual_sup = 0.0;
  int evaluations = 0;
};

inline OrbitMinimum minimize_over_orbit(const RelativeHslagProblem& prob,
                                        const GroupBasis& gb,
                                        const OrbitOptions& opt = {},
                                        const VectorXd* u_start = nullptr) {
  const int r = int(gb.transverse.cols());
  VectorXd warm = VectorXd::Zero(prob.seed.grid().size());
  int evals = 0;
  auto F = [&](const VectorXd& u) {
    ++evals;
    VectorXd w = warm;
    return modified_volume(prob, gb, u, &w);
  };

  VectorXd u = u_start ? *u_start : VectorXd::Zero(r);
  OrbitMinimum best;
  if (r == 0) {
    // the whole group stabilizes the seed: every point is critical
    RelativeSolution sol;
    best.volume = modified_volume(prob, gb, u, &warm, &sol);
    best.u = u;
    best.ell = sol.ell_h;
    best.nondegenerate = true;
    best.residual_sup = mean_curvature(sol.ell_h).sup_residual;
    best.evaluations = evals;
    return best;
  }

  double fu = F(u);
  if (opt.presearch_points > 0 && opt.presearch_radius > 0) {
    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < opt.presearch_points; ++i) {
      VectorXd c(r);
      for (int a = 0; a < r; ++a) c[a] = gauss(rng);
      c *= opt.presearch_radius * std::pow((i + 1.0) / opt.presearch_points,
                                           1.0 / r) /
           c.norm();
      double fc = F(c);
      if (fc < fu) {
        fu = fc;
        u = c;
      }
    }
  }

  // gradient descent with backtracking
  double gnorm = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    VectorXd g(r);
    const double h = opt.grad_step;
    for (int a = 0; a < r; ++a) {
      VectorXd up = u, um = u;
      up[a] += h;
      um[a] -= h;
      g[a] = (F(up) - F(um)) / (2 * h);
    }
    gnorm = g.norm();
    if (gnorm < opt.grad_tol) break;
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      VectorXd cand = u - step * g;
      double fc = F(cand);
      if (fc < fu - 0.25 * step * gnorm * gnorm) {
        u = cand;
        fu = fc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // gradient is at finite-difference noise level; certify with a
      // Richardson re-estimate before declaring a failure
      VectorXd g2(r);
      for (int a = 0; a < r; ++a) {
        VectorXd up = u, um = u;
        up[a] += 2 * h;
        um[a] -= 2 * h;
        g2[a] = (F(up) - F(um)) / (4 * h);
      }
      VectorXd rich = (4.0 * g - g2) / 3.0;
      gnorm = rich.norm();
      if (gnorm < 10 * opt.grad_tol) break;
      throw DescentStalled("line search failed with gradient " +
                           std::to_string(gnorm));
    }
  }

  best.u = u;
  best.grad_norm = gnorm;
  RelativeSolution sol;
  best.volume = modified_volume(prob, gb, u, &warm, &sol);
  best.ell = sol.ell_h;
  best.residual_sup = mean_curvature(sol.ell_h).sup_residual;
  best.evaluations = evals;

  // parameter-space Hessian for the non-degeneracy verdict
  MatrixXd H(r, r);
  const double s = opt.hess_step;
  double f0 = best.volume;
  for (int a = 0; a < r; ++a) {
    VectorXd up = u, um = u;
    up[a] += s;
    um[a] -= s;
    H(a, a) = (F(up) + F(um) - 2 * f0) / (s * s);
    for (int b = a + 1; b < r; ++b) {
      VectorXd pp = u, pm = u, mp = u, mm = u;
      pp[a] += s; pp[b] += s;
      pm[a] += s; pm[b] -= s;
      mp[a] -= s; mp[b] += s;
      mm[a] -= s; mm[b] -= s;
      H(a, b) = (F(pp) - F(pm) - F(mp) + F(mm)) / (4 * s * s);
      H(b, a) = H(a, b);
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eh(H);
  best.hessian_eigenvalues = eh.eigenvalues();
  best.nondegenerate =
      best.hessian_eigenvalues.minCoeff() >
      1e-4 * std::max(1.0, best.hessian_eigenvalues.cwiseAbs().maxCoeff());
  best.evaluations = evals;
  return best;
}

/// Relative spread of the geodesic curvature magnitude along the immersion
/// (with a floor so near-minimal curves do not divide by zero).
inline double curvature_spread(const TorusImmersion& ell) {
  MaslovData md = mean_curvature(ell);
  const int sz = ell.grid().size();
  VectorXd kappa(sz);
  for (int j = 0; j < sz; ++j) {
    VectorXd H = md.H.row(j).transpose();
    kappa[j] = std::sqrt(H.dot(ell.manifold().metric(ell.nodeValue(j)) * H));
  }
  double mean = kappa.mean();
  return (kappa.maxCoeff() - kappa.minCoeff()) / std::max(mean, 0.01);
}

struct ContinuationResult {
  std::vector<VectorXd> t;
  std::vector<TorusImmersion> fibers;
  std::vector<VectorXd> u;
  std::vector<double> volume;
  std::vector<double> residual_sup;
  std::vector<double> spread;
  double delta = 0.0;       // achieved parameter radius
  std::string stop_reason;  // empty if the whole grid succeeded
};

/// March the relative solve + orbit minimization along a seed family.
/// The first grid entry must be the centre; a degenerate minimum there is a
/// hard error, later failures stop softly.
inline ContinuationResult continuation(
    std::shared_ptr<const ChartedManifold> structure,
    const LagrangianFamily& family, const std::vector<VectorXd>& t_grid,
    const std::vector<ScalarField>& obstruction_potentials,
    const OrbitOptions& opt = {}, double residual_tol = 1e-8,
    double max_step_factor = 10.0) {
  ContinuationResult res;
  VectorXd u_prev;
  double prev_norm = 0.0;
  for (size_t i = 0; i < t_grid.size(); ++i) {
    const VectorXd& t = t_grid[i];
    try {
      RelativeHslagProblem prob;
      prob.structure = structure;
      prob.seed = rebase(family.at(t), structure);
      prob.obstruction_potentials = obstruction_potentials;
      prob.residual_tol = residual_tol;
      GroupBasis gb = orbit_group(prob.seed);
      OrbitMinimum m = minimize_over_orbit(
          prob, gb, opt, (i > 0 && u_prev.size()) ? &u_prev : nullptr);
      if (i == 0 && !m.nondegenerate)
        throw DegenerateMinimum("degenerate minimum at the centre fiber");
      if (m.residual_sup >= opt.hslag_tol)
        throw Error("TaskFailed", "fiber residual above tolerance");
      if (i > 0 && u_prev.size() &&
          (m.u - u_prev).norm() >
              max_step_factor * std::max(1e-3, (t - t_grid[i - 1]).norm()))
        throw ContinuationStopped(t.norm(), "group parameter jumped between fibers");
      if (!m.nondegenerate && i > 0)
        throw ContinuationStopped(t.norm(), "non-degeneracy lost");
      u_prev = m.u;
      res.t.push_back(t);
      res.fibers.push_back(m.ell);
      res.u.push_back(m.u);
      res.volume.push_back(m.volume);
      res.residual_sup.push_back(m.residual_sup);
      res.spread.push_back(curvature_spread(m.ell));
      prev_norm = std::max(prev_norm, t.norm());
      res.delta = prev_norm;
    } catch (const DegenerateMinimum&) {
      if (i == 0) throw ContinuationStopped(0.0, "degenerate minimum");
      res.stop_reason = "degenerate minimum";
      break;
    } catch (const ContinuationStopped& e) {
      if (i == 0) throw;
      res.stop_reason = e.what();
      break;
    } catch (const Error& e) {
      if (i == 0) throw;
      res.stop_reason = e.what();
      break;
    }
  }
  return res;
}

}  // namespace hslag
