#pragma once

// Second-variation operator of volume at a Lagrangian torus:
//   box u = Lap^2 u + d* a_{Ric_perp(J grad u)} - 2 d* a_{B(JH, grad u)}
//           - JH.(JH.u)
// assembled as a quadratic form over a truncated real Fourier basis with
// the L^2(g_L) inner product, plus a finite-difference fallback that only
// needs volume evaluations.

#include <ostream>

#include <Eigen/Dense>
#include <json.hpp>

#include "hslag/errors.hpp"
#include "hslag/fourier.hpp"
#include "hslag/lagrangian/deform.hpp"
#include "hslag/lagrangian/immersion.hpp"

namespace hslag {

enum class BoxSource { AnalyticKahler, FiniteDifferenceVolume };

struct BoxOperator {
  std::shared_ptr<const PeriodicGrid> grid;
  std::shared_ptr<FourierBasis> basis;
  MatrixXd matrix;     // quadratic form of box in the normalized basis
  MatrixXd gram;       // L2(g_L) Gram of the normalized basis
  MatrixXd transport;  // -(JH.)^2 contribution alone (analytic source)
  MatrixXd samples;    // grid nodes x fields, L2-normalized basis values
  VectorXd weights;    // per-node quadrature weights (cell * sqrt det g_L)
  BoxSource source = BoxSource::AnalyticKahler;
  double div_jh_sup = 0.0;

  int size() const { return int(matrix.rows()); }
};

namespace detail {

inline MatrixXd diff_cols(const PeriodicGrid& g, const MatrixXd& X, int axis) {
  MatrixXd out(X.rows(), X.cols());
  for (int c = 0; c < X.cols(); ++c) out.col(c) = g.diff(X.col(c), axis);
  return out;
}

/// d* of a 1-form field batch: beta[a] holds component a of each column's
/// 1-form at every node. Returns -(1/sqrt g) d_a (sqrt g g^{ab} beta_b).
inline MatrixXd codiff_cols(const PeriodicGrid& grid, const InducedGeometry& geo,
                            const std::vector<MatrixXd>& beta) {
  const int n = grid.dim(), sz = grid.size();
  MatrixXd out = MatrixXd::Zero(sz, beta[0].cols());
  for (int a = 0; a < n; ++a) {
    MatrixXd flux = MatrixXd::Zero(sz, beta[0].cols());
    for (int b = 0; b < n; ++b) {
      VectorXd w(sz);
      for (int j = 0; j < sz; ++j) w[j] = geo.sqrtdet[j] * geo.gLinv[j](a, b);
      flux += w.asDiagonal() * beta[b];
    }
    out -= diff_cols(grid, flux, a);
  }
  return geo.sqrtdet.cwiseInverse().asDiagonal() * out;
}

inline MatrixXd laplacian_cols(const PeriodicGrid& grid,
                               const InducedGeometry& geo, const MatrixXd& X) {
  std::vector<MatrixXd> dX(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) dX[a] = diff_cols(grid, X, a);
  return codiff_cols(grid, geo, dX);
}

}  // namespace detail

/// Assemble box analytically on a Kahler backend. m < 0 picks N/2 - 1.
inline BoxOperator assemble_box(const TorusImmersion& ell, int m = -1) {
  const ChartedManifold& M = ell.manifold();
  if (!M.integrable())
    throw NonIntegrableBackend("assemble_box needs a Kahler backend; use box_fd");
  const PeriodicGrid& grid = ell.grid();
  const int n = ell.fiberDim(), cd = ell.chartDim(), sz = grid.size();
  if (m < 0) m = grid.pointsPerAxis() / 2 - 1;

  BoxOperator op;
  op.grid = ell.gridPtr();
  op.basis = std::make_shared<FourierBasis>(grid, m);
  const MatrixXd& S = op.basis->samples;
  const int F = op.basis->size();

  MaslovData md = mean_curvature(ell);
  const InducedGeometry& geo = md.geom;
  auto hess = ell.nodeHessians();

  std::vector<MatrixXd> dS(n);
  for (int a = 0; a < n; ++a) dS[a] = detail::diff_cols(grid, S, a);

  // Pointwise coefficients: beta = K du for the curvature terms, zeta for
  // the tangential transport field JH.
  std::vector<MatrixXd> K(sz);
  MatrixXd zeta(sz, n);
  for (int j = 0; j < sz; ++j) {
    VectorXd p = ell.nodeValue(j);
    MatrixXd g = M.metric(p);
    MatrixXd Om = M.omega(p);
    MatrixXd J = M.acs(p);
    const MatrixXd& dl = geo.dl[j];
    // Ric_perp as an endomorphism: Ric(x,y) = <Ric_perp(x), y>_g.
    MatrixXd rendo = g.ldlt().solve(M.ricci(p));
    MatrixXd K2 = -dl.transpose() * Om * rendo * J * dl * geo.gLinv[j];

    VectorXd JH = J * md.H.row(j).transpose();
    VectorXd zj = geo.gLinv[j] * (dl.transpose() * (g * JH));
    zeta.row(j) = zj.transpose();

    // B(JH, e_b) in the ambient chart; tangential parts drop out of alpha.
    Christoffel gamma = M.christoffel(p);
    MatrixXd BJH = MatrixXd::Zero(cd, n);
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        for (int c = 0; c < cd; ++c) {
          double gam = 0.0;
          for (int d = 0; d < cd; ++d)
            for (int e = 0; e < cd; ++e)
              gam += gamma[c](d, e) * dl(d, a) * dl(e, b);
          BJH(c, b) += zj[a] * (hess[j][c](a, b) + gam);
        }
      }
    MatrixXd K3 = -dl.transpose() * Om * BJH * geo.gLinv[j];
    K[j] = K2 - 2.0 * K3;
  }

  // Lap^2.
  MatrixXd lapS = detail::laplacian_cols(grid, geo, S);
  MatrixXd boxS = detail::laplacian_cols(grid, geo, lapS);

  // Curvature terms: beta_c = sum_b K(c,b) d_b u, then d*.
  std::vector<MatrixXd> beta(n, MatrixXd::Zero(sz, F));
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b) {
      VectorXd w(sz);
      for (int j = 0; j < sz; ++j) w[j] = K[j](c, b);
      beta[c] += w.asDiagonal() * dS[b];
    }
  boxS += detail::codiff_cols(grid, geo, beta);

  // Transport: -(JH.)^2.
  auto advect = [&](const MatrixXd& X) {
    MatrixXd out = MatrixXd::Zero(sz, X.cols());
    for (int a = 0; a < n; ++a)
      out += zeta.col(a).asDiagonal() * detail::diff_cols(grid, X, a);
    return out;
  };
  MatrixXd transS = -advect(advect(S));
  boxS += transS;

  // Discrete divergence of JH: (1/sqrt g) d_a (sqrt g zeta^a).
  VectorXd div = VectorXd::Zero(sz);
  for (int a = 0; a < n; ++a)
    div += grid.diff(geo.sqrtdet.cwiseProduct(zeta.col(a)), a);
  op.div_jh_sup = div.cwiseQuotient(geo.sqrtdet).cwiseAbs().maxCoeff();

  // Project with the L2(g_L) pairing and normalize the basis fields.
  op.weights = grid.cellWeight() * geo.sqrtdet;
  MatrixXd wS = op.weights.asDiagonal() * S;
  MatrixXd graw = S.transpose() * wS;
  VectorXd scale = graw.diagonal().cwiseSqrt().cwiseInverse();
  op.matrix = scale.asDiagonal() * (wS.transpose() * boxS) * scale.asDiagonal();
  op.transport =
      scale.asDiagonal() * (wS.transpose() * transS) * scale.asDiagonal();
  op.gram = scale.asDiagonal() * graw * scale.asDiagonal();
  op.samples = S * scale.asDiagonal();
  op.source = BoxSource::AnalyticKahler;
  return op;
}

/// Assemble box from central second differences of the deformed volume.
/// Circle fibers only (the deformation flow cost is quadratic in the basis).
inline BoxOperator box_fd(const TorusImmersion& ell, int m, double h = 1e-3,
                          double residual_tol = 1e-6) {
  if (ell.fiberDim() != 1)
    throw UnsupportedBackend("box_fd is implemented for circle fibers only");
  MaslovData md = mean_curvature(ell);
  if (md.sup_residual >= residual_tol)
    throw Error("NotStationary",
                "box_fd needs a stationary immersion; residual " +
                    std::to_string(md.sup_residual));
  const PeriodicGrid& grid = ell.grid();
  if (m < 0) m = grid.pointsPerAxis() / 2 - 1;

  BoxOperator op;
  op.grid = ell.gridPtr();
  op.basis = std::make_shared<FourierBasis>(grid, m);
  const MatrixXd& S = op.basis->samples;
  const int F = op.basis->size();

  op.weights = grid.cellWeight() * md.geom.sqrtdet;
  MatrixXd wS = op.weights.asDiagonal() * S;
  MatrixXd graw = S.transpose() * wS;
  VectorXd scale = graw.diagonal().cwiseSqrt().cwiseInverse();
  op.gram = scale.asDiagonal() * graw * scale.asDiagonal();
  op.samples = S * scale.asDiagonal();

  double rho = detail::tube_radius_estimate(ell);
  auto vol = [&](const VectorXd& f) {
    HamiltonianDeformation d{f, rho, 6};
    return induced_geometry(deform(ell, d)).volume;
  };
  const double v0 = md.volume;

  MatrixXd Q(F, F);
  for (int a = 0; a < F; ++a) {
    VectorXd ua = op.samples.col(a);
    Q(a, a) = (vol(h * ua) + vol(-h * ua) - 2.0 * v0) / (h * h);
    for (int b = a + 1; b < F; ++b) {
      VectorXd up = ua + op.samples.col(b), um = ua - op.samples.col(b);
      Q(a, b) = (vol(h * up) + vol(-h * up) - vol(h * um) - vol(-h * um)) /
                (4.0 * h * h);
      Q(b, a) = Q(a, b);
    }
  }
  op.matrix = Q;
  op.transport = MatrixXd::Zero(F, F);
  op.source = BoxSource::FiniteDifferenceVolume;
  return op;
}

struct SpectralReport {
  VectorXd eigenvalues;    // ascending
  int kernel_dimension = 0;
  MatrixXd kernel_basis;   // coefficient columns, L2-orthonormal
  double min_nonkernel_eigenvalue = 0.0;
  double asymmetry = 0.0;  // relative, recorded before symmetrization
  double kernel_tol = 0.0;
};

inline SpectralReport spectrum(const BoxOperator& op, double kernel_tol = -1.0) {
  SpectralReport rep;
  const double norm = op.matrix.norm();
  rep.asymmetry =
      norm > 0 ? (op.matrix - op.matrix.transpose()).norm() / norm : 0.0;
  MatrixXd A = 0.5 * (op.matrix + op.matrix.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(A, op.gram);
  if (es.info() != Eigen::Success)
    throw EigenSolverFailure("generalized eigensolve failed");
  rep.eigenvalues = es.eigenvalues();
  const double lammax = rep.eigenvalues.cwiseAbs().maxCoeff();
  rep.kernel_tol = kernel_tol > 0 ? kernel_tol : 1e-6 * lammax;
  rep.min_nonkernel_eigenvalue = 0.0;
  std::vector<int> kernel;
  bool found = false;
  for (int i = 0; i < rep.eigenvalues.size(); ++i) {
    if (std::abs(rep.eigenvalues[i]) < rep.kernel_tol) {
      kernel.push_back(i);
    } else if (!found) {
      rep.min_nonkernel_eigenvalue = rep.eigenvalues[i];
      found = true;
    }
  }
  rep.kernel_dimension = int(kernel.size());
  rep.kernel_basis.resize(op.size(), rep.kernel_dimension);
  for (int i = 0; i < rep.kernel_dimension; ++i)
    rep.kernel_basis.col(i) = es.eigenvectors().col(kernel[i]);
  return rep;
}

struct RigidityReport {
  bool rigid = false;
  int rank = 0;
  int kernel_dimension = 0;
  MatrixXd map;  // kernel x potentials: L2 pairings of restrictions
  MatrixXd km0;  // potentials x rank: subspace mapping isomorphically
};

/// Restriction map from ambient Killing potentials onto ker box.
inline RigidityReport rigidity_check(
    const TorusImmersion& ell, const BoxOperator& op, const SpectralReport& rep,
    const std::vector<ScalarField>& potentials) {
  RigidityReport out;
  out.kernel_dimension = rep.kernel_dimension;
  const int K = int(potentials.size());
  MatrixXd kn = op.samples * rep.kernel_basis;  // node values of kernel fields
  out.map.resize(rep.kernel_dimension, K);
  for (int k = 0; k < K; ++k) {
    VectorXd restr = ell.pullback(potentials[k]);
    out.map.col(k) = kn.transpose() * op.weights.cwiseProduct(restr);
  }
  Eigen::JacobiSVD<MatrixXd> svd(out.map,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues().size()
                          ? svd.singularValues().maxCoeff()
                          : 0.0;
  const double tol = std::max(1e-10, 1e-6 * smax);
  out.rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++out.rank;
  out.rigid = (out.rank == rep.kernel_dimension);
  out.km0 = svd.matrixV().leftCols(out.rank);
  return out;
}

inline RigidityReport rigidity_check(const TorusImmersion& ell,
                                     const BoxOperator& op,
                                     const SpectralReport& rep) {
  return rigidity_check(ell, op, rep, ell.manifold().killingPotentials());
}

struct StabilityReport {
  bool stable = false;
  double margin = 0.0;
};

inline StabilityReport stability_check(const SpectralReport& rep) {
  StabilityReport out;
  out.margin = rep.min_nonkernel_eigenvalue;
  out.stable = out.margin > 0.0;
  return out;
}

struct SelfadjointReport {
  double d_part_asymmetry = 0.0;  // box + (JH.)^2, selfadjoint always
  double full_asymmetry = 0.0;    // vanishes when stationary
  double div_jh_sup = 0.0;
};

inline SelfadjointReport selfadjoint_diagnostics(const BoxOperator& op) {
  if (op.source != BoxSource::AnalyticKahler)
    throw UnsupportedBackend("diagnostics need the analytic assembly");
  SelfadjointReport rep;
  MatrixXd D = op.matrix - op.transport;
  rep.d_part_asymmetry = (D - D.transpose()).norm() / std::max(D.norm(), 1e-300);
  rep.full_asymmetry = (op.matrix - op.matrix.transpose()).norm() /
                       std::max(op.matrix.norm(), 1e-300);
  rep.div_jh_sup = op.div_jh_sup;
  return rep;
}

inline nlohmann::json spectral_report_json(const SpectralReport& rep) {
  nlohmann::json j;
  j["eigenvalues"] = std::vector<double>(
      rep.eigenvalues.data(), rep.eigenvalues.data() + rep.eigenvalues.size());
  j["kernel_dimension"] = rep.kernel_dimension;
  j["min_nonkernel_eigenvalue"] = rep.min_nonkernel_eigenvalue;
  j["asymmetry"] = rep.asymmetry;
  j["kernel_tol"] = rep.kernel_tol;
  return j;
}

inline void write_spectrum_csv(std::ostream& os, const SpectralReport& rep) {
  os << "index,eigenvalue\r\n";
  os.precision(17);
  for (int i = 0; i < rep.eigenvalues.size(); ++i)
    os << i << "," << rep.eigenvalues[i] << "\r\n";
}

}  // namespace hslag
