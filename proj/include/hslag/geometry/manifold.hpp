#pragma once

// Evaluable almost-Kähler chart backends. A backend supplies the symplectic
// form and a compatible metric at chart points; the almost complex structure
// and all derived tensors (Christoffel, Ricci) are assembled generically
// unless a backend overrides them with closed forms.
//
// Conventions (fixed across the toolkit):
//   g(v,w) = omega(v, Jw)            =>  J = Omega^{-1} g
//   dv = iota_X omega                =>  X = -Omega^{-1} grad v
//   Laplacian = d*d, nonnegative on functions; d* = -divergence.
//   Mean curvature sign: delta vol = -int <H,V>.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hslag/errors.hpp"

namespace hslag {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Ambient scalar field with optional closed-form gradient.
struct ScalarField {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> grad;  // may be empty
  std::string name;
};

/// Christoffel symbols: gamma[a](b,c) = Gamma^a_{bc}.
using Christoffel = std::vector<MatrixXd>;

namespace detail {

/// Fourth-order (Richardson-extrapolated) central difference. The result is
/// materialized into the callable's value type so no Eigen expression can
/// outlive its operands.
template <typename F>
auto richardson(const F& f, double h) {
  using R = std::decay_t<decltype(f(h))>;
  R f1p = f(h), f1m = f(-h), f2p = f(2 * h), f2m = f(-2 * h);
  R out = (8.0 * (f1p - f1m) - (f2p - f2m)) / (12.0 * h);
  return out;
}

}  // namespace detail

class ChartedManifold {
public:
  virtual ~ChartedManifold() = default;

  virtual int dim() const = 0;  // real dimension 2n
  virtual std::string name() const = 0;

  virtual MatrixXd metric(const VectorXd& p) const = 0;
  virtual MatrixXd omega(const VectorXd& p) const = 0;

  /// Compatible almost complex structure J = Omega^{-1} g.
  virtual MatrixXd acs(const VectorXd& p) const {
    return omega(p).inverse() * metric(p);
  }

  /// Period of each chart coordinate (0 = non-periodic).
  virtual VectorXd periods() const { return VectorXd::Zero(dim()); }

  virtual bool contains(const VectorXd& p, double margin) const = 0;

  /// True when (g,J) is Kähler (integrable J). Surfaces always are.
  virtual bool integrable() const { return true; }

  /// d(metric)/dp_a; default is fourth-order finite differences.
  virtual MatrixXd metricDeriv(const VectorXd& p, int a) const {
    VectorXd q = p;
    return detail::richardson(
        [&](double h) {
          q[a] = p[a] + h;
          MatrixXd m = metric(q);
          q[a] = p[a];
          return m;
        },
        fdStep());
  }

  /// Levi-Civita symbols from metricDeriv.
  Christoffel christoffel(const VectorXd& p) const {
    const int d = dim();
    MatrixXd g = metric(p);
    std::vector<MatrixXd> dg(d);
    for (int a = 0; a < d; ++a) dg[a] = metricDeriv(p, a);
    Christoffel gamma(d, MatrixXd::Zero(d, d));
    MatrixXd gi = g.inverse();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = b; c < d; ++c) {
          double s = 0.0;
          for (int e = 0; e < d; ++e)
            s += gi(a, e) * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
          gamma[a](b, c) = 0.5 * s;
          gamma[a](c, b) = gamma[a](b, c);
        }
    return gamma;
  }

  /// d(christoffel)/dp_a by finite differences of christoffel().
  std::vector<Christoffel> christoffelDeriv(const VectorXd& p) const {
    const int d = dim();
    std::vector<Christoffel> out(d);
    for (int a = 0; a < d; ++a) {
      VectorXd q = p;
      double h = christoffelFdStep();
      auto at = [&](double dh) {
        q[a] = p[a] + dh;
        Christoffel g = christoffel(q);
        q[a] = p[a];
        return g;
      };
      Christoffel gp = at(h), gm = at(-h), gp2 = at(2 * h), gm2 = at(-2 * h);
      Christoffel der(d, MatrixXd::Zero(d, d));
      for (int i = 0; i < d; ++i)
        der[i] = (8.0 * (gp[i] - gm[i]) - (gp2[i] - gm2[i])) / (12.0 * h);
      out[a] = der;
    }
    return out;
  }

  /// Ricci tensor; generic path differentiates the Christoffel symbols.
  virtual MatrixXd ricci(const VectorXd& p) const { return ricciFd(p); }

  /// Generic finite-difference Ricci (kept callable on every backend so the
  /// analytic overrides can be cross-checked).
  MatrixXd ricciFd(const VectorXd& p) const {
    const int d = dim();
    Christoffel gamma = christoffel(p);
    std::vector<Christoffel> dgamma = christoffelDeriv(p);
    MatrixXd ric = MatrixXd::Zero(d, d);
    // Ric_{bd} = dGamma^a_{db}/dx_a - dGamma^a_{ab}/dx_d
    //            + Gamma^a_{ae} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{ab}
    for (int b = 0; b < d; ++b)
      for (int dd = 0; dd < d; ++dd) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
          s += dgamma[a][a](dd, b) - dgamma[dd][a](a, b);
          for (int e = 0; e < d; ++e)
            s += gamma[a](a, e) * gamma[e](dd, b) -
                 gamma[a](dd, e) * gamma[e](a, b);
        }
        ric(b, dd) = s;
      }
    return 0.5 * (ric + ric.transpose());
  }

  /// Basis of Killing potentials (Hamiltonian isometry generators).
  virtual std::vector<ScalarField> killingPotentials() const {
    throw UnsupportedBackend(name());
  }

  double fdStep() const { return fd_step_; }
  void setFdStep(double h) { fd_step_ = h; }
  double christoffelFdStep() const { return 10.0 * fd_step_; }

  /// Wrap a chart displacement into the fundamental domain (periodic coords).
  VectorXd wrapDisplacement(VectorXd delta) const {
    VectorXd per = periods();
    for (int a = 0; a < dim(); ++a)
      if (per[a] > 0)
        delta[a] -= per[a] * std::round(delta[a] / per[a]);
    return delta;
  }

private:
  double fd_step_ = 1e-4;
};

/// Pointwise tensor package at a chart point.
struct TensorEval {
  VectorXd point;
  MatrixXd omega, acs, metric;
  Christoffel christoffel;
  MatrixXd ricci;
};

inline TensorEval eval_tensors(const ChartedManifold& M, const VectorXd& p,
                               double fd_step = 0.0) {
  if (fd_step > 0 && !M.contains(p, 2 * fd_step))
    throw PointOutsideChart(M.name());
  if (!M.contains(p, 0.0)) throw PointOutsideChart(M.name());
  TensorEval ev;
  ev.point = p;
  ev.omega = M.omega(p);
  ev.metric = M.metric(p);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(ev.metric);
  if (es.eigenvalues().minCoeff() < 1e-12)
    throw DegenerateMetric(M.name());
  ev.acs = M.acs(p);
  ev.christoffel = M.christoffel(p);
  ev.ricci = M.ricci(p);
  return ev;
}

/// Gradient of a scalar field (closed form if provided, else Richardson FD).
inline VectorXd field_grad(const ChartedManifold& M, const ScalarField& v,
                           const VectorXd& p, double h = 1e-5) {
  if (v.grad) return v.grad(p);
  const int d = M.dim();
  VectorXd g(d);
  VectorXd q = p;
  for (int a = 0; a < d; ++a) {
    g[a] = detail::richardson(
        [&](double dh) {
          q[a] = p[a] + dh;
          double val = v.value(q);
          q[a] = p[a];
          return val;
        },
        h);
  }
  return g;
}

/// Hamiltonian vector field X_v = -Omega^{-1} dv.
inline VectorXd hamiltonian_field(const ChartedManifold& M,
                                  const ScalarField& v, const VectorXd& p) {
  return -M.omega(p).inverse() * field_grad(M, v, p);
}

/// Fixed-step RK4 flow of X_v for time t.
inline VectorXd hamiltonian_flow(const ChartedManifold& M,
                                 const ScalarField& v, double t,
                                 const VectorXd& p, int steps = 64) {
  VectorXd x = p;
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    if (!M.contains(x, 0.0)) throw FlowLeftAtlas(M.name());
    VectorXd k1 = hamiltonian_field(M, v, x);
    VectorXd k2 = hamiltonian_field(M, v, x + 0.5 * dt * k1);
    VectorXd k3 = hamiltonian_field(M, v, x + 0.5 * dt * k2);
    VectorXd k4 = hamiltonian_field(M, v, x + dt * k3);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  if (!M.contains(x, 0.0)) throw FlowLeftAtlas(M.name());
  return x;
}

/// Flow a point together with a tangent vector (variational equation, with
/// the field's differential taken by central differences).
inline std::pair<VectorXd, VectorXd> hamiltonian_flow_with_frame(
    const ChartedManifold& M, const ScalarField& v, double t,
    const VectorXd& p, const VectorXd& w, int steps = 64) {
  const int d = M.dim();
  auto rhs = [&](const VectorXd& x, const VectorXd& u) {
    VectorXd dx = hamiltonian_field(M, v, x);
    VectorXd du = VectorXd::Zero(d);
    const double h = 1e-5;
    for (int a = 0; a < d; ++a) {
      VectorXd xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      du += (hamiltonian_field(M, v, xp) - hamiltonian_field(M, v, xm)) /
            (2 * h) * u[a];
    }
    return std::make_pair(dx, du);
  };
  VectorXd x = p, u = w;
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    if (!M.contains(x, 0.0)) throw FlowLeftAtlas(M.name());
    auto [k1x, k1u] = rhs(x, u);
    auto [k2x, k2u] = rhs(x + 0.5 * dt * k1x, u + 0.5 * dt * k1u);
    auto [k3x, k3u] = rhs(x + 0.5 * dt * k2x, u + 0.5 * dt * k2u);
    auto [k4x, k4u] = rhs(x + dt * k3x, u + dt * k3u);
    x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    u += dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
  }
  return {x, u};
}

inline std::vector<ScalarField> killing_potentials(const ChartedManifold& M) {
  return M.killingPotentials();
}

/// Finite-difference exterior derivative of omega; zero for honest
/// symplectic backends.
inline double d_omega_norm(const ChartedManifold& M, const VectorXd& p,
                           double h = 1e-4) {
  const int d = M.dim();
  std::vector<MatrixXd> dOm(d);
  VectorXd q = p;
  for (int a = 0; a < d; ++a) {
    q[a] = p[a] + h;
    MatrixXd op = M.omega(q);
    q[a] = p[a] - h;
    MatrixXd om = M.omega(q);
    q[a] = p[a];
    dOm[a] = (op - om) / (2 * h);
  }
  double worst = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int c = b + 1; c < d; ++c)
        worst = std::max(worst, std::abs(dOm[a](b, c) + dOm[b](c, a) +
                                         dOm[c](a, b)));
  return worst;
}

}  // namespace hslag
