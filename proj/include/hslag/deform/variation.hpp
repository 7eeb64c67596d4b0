#pragma once

// Metric variations induced by ambient potentials, the positive
// perturbation path built from them, the quartic distance potential that
// seeds it, and the positivity experiment over one-parameter isometry
// subgroups.

#include <cmath>
#include <memory>
#include <vector>

#include "hslag/deform/orbit.hpp"
#include "hslag/geometry/perturbed.hpp"

namespace hslag {

namespace detail {

inline VectorXd fd_grad(const std::function<double(const VectorXd&)>& f,
                        const VectorXd& p, double h = 1e-4) {
  VectorXd g(p.size());
  for (int a = 0; a < p.size(); ++a) {
    auto slice = [&](double e) {
      VectorXd q = p;
      q[a] += e;
      return f(q);
    };
    g[a] = richardson([&](double e) { return slice(e); }, h);
  }
  return g;
}

inline MatrixXd fd_hessian(const std::function<double(const VectorXd&)>& f,
                           const VectorXd& p, double h = 1e-3) {
  const int d = int(p.size());
  MatrixXd H(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      auto val = [&](double ea, double eb) {
        VectorXd q = p;
        q[a] += ea;
        q[b] += eb;
        return f(q);
      };
      double s;
      if (a == b) {
        double f0 = val(0, 0);
        double c1 = (val(h, 0) + val(-h, 0) - 2 * f0) / (h * h);
        double c2 = (val(2 * h, 0) + val(-2 * h, 0) - 2 * f0) / (4 * h * h);
        s = (4 * c1 - c2) / 3.0;
      } else {
        double c1 = (val(h, h) - val(h, -h) - val(-h, h) + val(-h, -h)) /
                    (4 * h * h);
        double c2 = (val(2 * h, 2 * h) - val(2 * h, -2 * h) -
                     val(-2 * h, 2 * h) + val(-2 * h, -2 * h)) /
                    (16 * h * h);
        s = (4 * c1 - c2) / 3.0;
      }
      H(a, b) = s;
      H(b, a) = s;
    }
  return H;
}

/// J-anti-invariant part of a bilinear form: (B - J^T B J)/2.
inline MatrixXd anti_invariant(const MatrixXd& B, const MatrixXd& J) {
  return 0.5 * (B - J.transpose() * B * J);
}

}  // namespace detail

enum class VariationMode { A, B };

/// Metric variation induced by the potential phi: mode A is -2 D^- d^c phi
/// (the compatible projection of the Lie-transport of J along X_phi), mode B
/// is +2 D^- d phi.
inline MatrixXd metric_variation(const ChartedManifold& M,
                                 const ScalarField& phi, VariationMode mode,
                                 const VectorXd& p) {
  MatrixXd J = M.acs(p);
  Christoffel gamma = M.christoffel(p);
  const int d = M.dim();
  auto value = phi.value;
  auto grad = [&](const VectorXd& q) {
    return phi.grad ? phi.grad(q) : detail::fd_grad(value, q);
  };

  if (mode == VariationMode::B) {
    MatrixXd H = phi.grad ? MatrixXd() : detail::fd_hessian(value, p);
    if (phi.grad) {
      H.resize(d, d);
      const double h = 1e-4;
      for (int a = 0; a < d; ++a) {
        H.col(a) = detail::richardson(
            [&](double e) {
              VectorXd q = p;
              q[a] += e;
              return VectorXd(grad(q));
            },
            h);
      }
      H = 0.5 * (H + H.transpose()).eval();
    }
    VectorXd g = grad(p);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) H(a, b) -= gamma[c](a, b) * g[c];
    return 2.0 * detail::anti_invariant(H, J);
  }

  // mode A: covariant derivative of the 1-form d^c phi = dphi o J, then the
  // anti-invariant projection (which also symmetrizes)
  auto beta = [&](const VectorXd& q) -> VectorXd {
    return M.acs(q).transpose() * grad(q);
  };
  MatrixXd C(d, d);  // C(a,b) = d_a beta_b
  const double h = 1e-4;
  for (int a = 0; a < d; ++a) {
    VectorXd row = detail::richardson(
        [&](double e) {
          VectorXd q = p;
          q[a] += e;
          return VectorXd(beta(q));
        },
        h);
    C.row(a) = row.transpose();
  }
  VectorXd b0 = beta(p);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) C(a, b) -= gamma[c](a, b) * b0[c];
  return -2.0 * detail::anti_invariant(C, J);
}

struct PerturbationPath {
  std::shared_ptr<const ChartedManifold> base;
  ScalarField phi;
  double s_max = 0.1;
  /// Compatible structure at path parameter s (polar-retracted).
  std::function<std::shared_ptr<const ChartedManifold>(double)> at;
};

/// First-order metric path H_s = g0 + s gdot(phi) re-projected pointwise
/// onto the compatible structures by the polar retraction, so J_s^2 = -I
/// and g_s > 0 hold by construction at every evaluation.
inline PerturbationPath integrate_positive_path(
    std::shared_ptr<const ChartedManifold> base, ScalarField phi,
    double s_max = 0.1, VariationMode mode = VariationMode::A) {
  PerturbationPath path;
  path.base = base;
  path.phi = phi;
  path.s_max = s_max;
  path.at = [base, phi, mode,
             s_max](double s) -> std::shared_ptr<const ChartedManifold> {
    if (s == 0.0) return base;
    if (std::abs(s) > s_max)
      throw ConstraintDriftExceeded("path parameter beyond s_max");
    auto delta = [base, phi, mode, s](const VectorXd& p) -> MatrixXd {
      return s * metric_variation(*base, phi, mode, p);
    };
    return std::make_shared<PerturbedManifold>(base, delta, "PathStructure");
  };
  return path;
}

/// phi = -d^4 / (4 (n+2)) with d the (chart) distance to ell(L), cut off at
/// the tube radius; vanishes to third order on the image.
inline ScalarField bump_quartic_potential(const TorusImmersion& ell,
                                          double rho = 0.0) {
  if (rho <= 0.0) rho = detail::tube_radius_estimate(ell);
  if (rho < 1e-8) throw TubeTooSmall("bump_quartic_potential");
  const double denom = 4.0 * (ell.fiberDim() + 2);
  auto shared = std::make_shared<TorusImmersion>(ell);
  ScalarField phi;
  phi.name = "bump_quartic";
  phi.value = [shared, rho, denom](const VectorXd& p) {
    VectorXd th = detail::nearest_parameter(*shared, p,
                                            VectorXd::Zero(shared->fiberDim()));
    VectorXd q = shared->value(th);
    VectorXd diff = shared->manifold().wrapDisplacement(p - q);
    // distance measured in the footpoint metric: agrees with the geodesic
    // distance to O(d^3), which the expansion checks require
    double d2 = diff.dot(shared->manifold().metric(q) * diff);
    if (d2 >= rho * rho) return 0.0;
    double cut = detail::quintic_cut(d2 / (rho * rho));
    return -cut * d2 * d2 / denom;
  };
  return phi;
}

/// Ambient Laplacian of a potential by finite differences (for the quartic
/// expansion checks): Delta = d* d, nonnegative convention.
inline double ambient_laplacian(const ChartedManifold& M,
                                const ScalarField& phi, const VectorXd& p,
                                double h = 1e-3) {
  const int d = M.dim();
  auto flux = [&](const VectorXd& q) -> VectorXd {
    MatrixXd g = M.metric(q);
    double sq = std::sqrt(g.determinant());
    return sq * g.ldlt().solve(detail::fd_grad(phi.value, q));
  };
  double div = 0.0;
  for (int a = 0; a < d; ++a) {
    VectorXd qp = p, qm = p;
    qp[a] += h;
    qm[a] -= h;
    div += (flux(qp)[a] - flux(qm)[a]) / (2 * h);
  }
  return -div / std::sqrt(M.metric(p).determinant());
}

/// Sup over sample points of |g0^{-1} delta|: the mesh-norm size of a
/// metric perturbation.
inline double mesh_norm(const ChartedManifold& base,
                        const std::function<MatrixXd(const VectorXd&)>& delta,
                        const std::vector<VectorXd>& mesh) {
  double worst = 0.0;
  for (const auto& p : mesh) {
    MatrixXd rel = base.metric(p).ldlt().solve(delta(p));
    worst = std::max(worst, rel.cwiseAbs().maxCoeff());
  }
  return worst;
}

struct PositivityReport {
  std::vector<double> s;
  std::vector<double> second_derivative;
};

/// Second t-derivative at the identity of vol_{J_s}(u_t . ell) for the flow
/// u_t of the potential kappa, sampled along the path.
inline PositivityReport positivity_experiment(const TorusImmersion& ell,
                                              const PerturbationPath& path,
                                              const std::vector<double>& s_list,
                                              const ScalarField& kappa,
                                              double t_step = 5e-2) {
  // transversality gate: kappa must move ell(L)
  GroupBasis gb = orbit_group(ell);
  InducedGeometry geo = induced_geometry(ell);
  const ChartedManifold& M = ell.manifold();
  double normal_size = 0.0;
  for (int j = 0; j < ell.grid().size(); ++j) {
    VectorXd p = ell.nodeValue(j);
    VectorXd X = hamiltonian_field(M, kappa, p);
    X -= geo.dl[j] *
         (geo.gLinv[j] * (geo.dl[j].transpose() * (M.metric(p) * X)));
    normal_size = std::max(normal_size, X.norm());
  }
  if (normal_size < 1e-8)
    throw NonTransverseSubgroup("flow of the potential preserves ell(L)");

  auto Mptr = ell.manifoldPtr();
  auto flowed = [&](double t) {
    return TorusImmersion::fromFunction(
        Mptr, ell.gridPtr(), ell.winding(), [&](const VectorXd& th) {
          return hamiltonian_flow(*Mptr, kappa, t, ell.value(th));
        });
  };
  TorusImmersion plus = flowed(t_step), minus = flowed(-t_step);

  PositivityReport rep;
  for (double s : s_list) {
    auto Js = path.at(s);
    auto vol = [&](const TorusImmersion& im) {
      return induced_geometry(rebase(im, Js)).volume;
    };
    double dd =
        (vol(plus) + vol(minus) - 2.0 * vol(ell)) / (t_step * t_step);
    rep.s.push_back(s);
    rep.second_derivative.push_back(dd);
  }
  return rep;
}

/// Anisotropic rank-one stretch along a tilted ambient axis on a surface of
/// revolution: delta = eps d(psi) \otimes d(psi) with psi the squared height
/// along the tilted axis (conformal pieces would retract away).
inline std::function<MatrixXd(const VectorXd&)> tilted_stretch(
    std::shared_ptr<const SurfaceOfRevolution> M, double eps, double tilt) {
  return [M, eps, tilt](const VectorXd& p) -> MatrixXd {
    auto psi = [M, tilt](const VectorXd& q) {
      double u = q[0], th = q[1];
      // height-like coordinate mixed with the tilted transverse direction;
      // the tilt breaks the rotational symmetry
      double a = u * std::cos(tilt) +
                 M->profile().f(u) * std::cos(th) * std::sin(tilt);
      return a * a;
    };
    VectorXd g = detail::fd_grad(psi, p);
    return eps * (g * g.transpose());
  };
}

}  // namespace hslag
