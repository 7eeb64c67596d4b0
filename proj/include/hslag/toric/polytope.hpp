#pragma once

// Labelled (Delzant) polytopes P = { x : l_k(x) = <nu_k, x> + c_k >= 0 },
// the Guillemin symplectic potential u = 1/2 sum l_k log l_k, and the
// symplectic-reduction bookkeeping: torus moment maps on C^d, orbit volumes,
// and reduction volume factors.

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hslag/errors.hpp"

namespace hslag {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LabelledPolytope {
  int n = 0;
  MatrixXd nu;       // facets x n, integer inward normals
  VectorXd c;        // facet offsets
  MatrixXd lattice;  // columns generate the lattice (default identity)

  int facets() const { return int(nu.rows()); }

  VectorXd ell(const VectorXd& x) const { return nu * x + c; }

  static LabelledPolytope simplex(int n) {
    LabelledPolytope P;
    P.n = n;
    P.nu = MatrixXd::Zero(n + 1, n);
    P.nu.topRows(n) = MatrixXd::Identity(n, n);
    P.nu.bottomRows(1) = -MatrixXd::Ones(1, n);
    P.c = VectorXd::Zero(n + 1);
    P.c[n] = 1.0;
    P.lattice = MatrixXd::Identity(n, n);
    return P;
  }

  static LabelledPolytope box(const VectorXd& lengths) {
    int n = int(lengths.size());
    LabelledPolytope P;
    P.n = n;
    P.nu = MatrixXd::Zero(2 * n, n);
    P.c = VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
      P.nu(2 * i, i) = 1.0;
      P.nu(2 * i + 1, i) = -1.0;
      P.c[2 * i + 1] = lengths[i];
    }
    P.lattice = MatrixXd::Identity(n, n);
    return P;
  }

  /// Structured text: first line "n", then one facet per line as
  /// "nu_1 ... nu_n c", optionally a trailing "lattice" block of n rows.
  static LabelledPolytope parse(std::istream& in) {
    LabelledPolytope P;
    std::string line;
    std::vector<std::vector<double>> rows;
    bool lattice_block = false;
    std::vector<std::vector<double>> lat;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string first;
      if (!(ls >> first)) continue;
      if (first == "lattice") { lattice_block = true; continue; }
      std::vector<double> vals{std::stod(first)};
      double v;
      while (ls >> v) vals.push_back(v);
      if (P.n == 0 && vals.size() == 1) { P.n = int(vals[0]); continue; }
      (lattice_block ? lat : rows).push_back(vals);
    }
    if (P.n <= 0 || rows.empty())
      throw Error("PolytopeParse", "missing dimension or facets");
    P.nu = MatrixXd(int(rows.size()), P.n);
    P.c = VectorXd(int(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k) {
      if (int(rows[k].size()) != P.n + 1)
        throw Error("PolytopeParse", "facet row needs n normals + offset");
      for (int i = 0; i < P.n; ++i) P.nu(int(k), i) = rows[k][i];
      P.c[int(k)] = rows[k][P.n];
    }
    P.lattice = MatrixXd::Identity(P.n, P.n);
    if (!lat.empty()) {
      if (int(lat.size()) != P.n)
        throw Error("PolytopeParse", "lattice block needs n rows");
      for (int i = 0; i < P.n; ++i)
        for (int j = 0; j < P.n; ++j) P.lattice(i, j) = lat[i][j];
    }
    return P;
  }

  static LabelledPolytope load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("PolytopeParse", "cannot open " + path);
    return parse(in);
  }
};

struct DelzantReport {
  std::vector<VectorXd> vertices;
  bool compact = false;
  bool simple = false;
  bool unimodular = false;
  bool verdict = false;
  std::string message;
};

namespace detail {

// enumerate n-subsets of {0..f-1}
inline void subsets(int f, int n, std::vector<std::vector<int>>& out) {
  std::vector<int> idx(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) { out.push_back(idx); return; }
    for (int i = start; i < f; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

}  // namespace detail

inline DelzantReport validate_delzant(const LabelledPolytope& P,
                                      bool throw_on_fail = false) {
  if (P.facets() == 0) throw Error("PolytopeParse", "empty facet list");
  DelzantReport rep;
  const int n = P.n, f = P.facets();
  const double tol = 1e-9;

  // vertices by exhaustive facet-subset intersection
  std::vector<std::vector<int>> subs;
  detail::subsets(f, n, subs);
  for (const auto& S : subs) {
    MatrixXd A(n, n);
    VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      A.row(i) = P.nu.row(S[i]);
      b[i] = -P.c[S[i]];
    }
    Eigen::FullPivLU<MatrixXd> lu(A);
    if (!lu.isInvertible()) continue;
    VectorXd x = lu.solve(b);
    if ((P.ell(x).array() < -tol).any()) continue;
    bool dup = false;
    for (const auto& v : rep.vertices)
      if ((v - x).norm() < tol) { dup = true; break; }
    if (!dup) rep.vertices.push_back(x);
  }

  // compactness: recession cone {d : nu d >= 0} must be {0}
  rep.compact = !rep.vertices.empty();
  Eigen::FullPivLU<MatrixXd> nulu(P.nu);
  if (nulu.dimensionOfKernel() > 0) rep.compact = false;
  if (rep.compact) {
    if (n == 1) {
      for (double s : {1.0, -1.0})
        if ((P.nu.col(0).array() * s >= -tol).all()) rep.compact = false;
    } else {
      std::vector<std::vector<int>> edges;
      detail::subsets(f, n - 1, edges);
      for (const auto& S : edges) {
        MatrixXd A(n - 1, n);
        for (int i = 0; i < n - 1; ++i) A.row(i) = P.nu.row(S[i]);
        Eigen::FullPivLU<MatrixXd> lu(A);
        if (lu.dimensionOfKernel() != 1) continue;
        VectorXd d = lu.kernel().col(0);
        for (double s : {1.0, -1.0})
          if (((P.nu * (s * d)).array() >= -tol).all()) rep.compact = false;
      }
    }
  }
  if (!rep.compact) {
    rep.message = "recession cone nontrivial or no vertices";
    if (throw_on_fail) throw NonCompact(rep.message);
    return rep;
  }

  // simplicity and unimodularity per vertex
  rep.simple = true;
  rep.unimodular = true;
  for (const auto& v : rep.vertices) {
    VectorXd lv = P.ell(v);
    std::vector<int> active;
    for (int k = 0; k < f; ++k)
      if (std::abs(lv[k]) < tol) active.push_back(k);
    if (int(active.size()) != n) {
      rep.simple = false;
      rep.message = "non-simple vertex";
      if (throw_on_fail) throw NonSimpleVertex(rep.message);
      continue;
    }
    MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) A.row(i) = P.nu.row(active[i]);
    // normals in dual-lattice coordinates: rows of A * lattice
    double det = (A * P.lattice).determinant();
    if (std::abs(std::abs(det) - 1.0) > tol) {
      rep.unimodular = false;
      std::ostringstream os;
      os << "non-unimodular vertex (det " << det << ") at ["
         << v.transpose() << "]";
      rep.message = os.str();
      if (throw_on_fail) throw NonUnimodularVertex(rep.message);
    }
  }
  rep.verdict = rep.compact && rep.simple && rep.unimodular;
  if (rep.verdict) rep.message = "valid Delzant polytope";
  return rep;
}

struct GuilleminData {
  double u = 0.0;
  VectorXd grad_u;
  MatrixXd G;     // Hess(u)
  MatrixXd Ginv;
};

inline GuilleminData guillemin_metric(const LabelledPolytope& P,
                                      const VectorXd& x) {
  VectorXd l = P.ell(x);
  if ((l.array() <= 1e-12).any()) throw BoundaryPoint("l_k(x) <= 1e-12");
  GuilleminData gd;
  gd.u = 0.5 * (l.array() * l.array().log()).sum();
  gd.grad_u = 0.5 * P.nu.transpose() * (l.array().log() + 1.0).matrix();
  gd.G = 0.5 * P.nu.transpose() * l.cwiseInverse().asDiagonal() * P.nu;
  gd.Ginv = gd.G.inverse();
  return gd;
}

/// d(Hess u)/dx_a = -1/2 sum_k nu_ki nu_kj nu_ka / l_k^2.
inline MatrixXd guillemin_metric_deriv(const LabelledPolytope& P,
                                       const VectorXd& x, int a) {
  VectorXd l = P.ell(x);
  if ((l.array() <= 1e-12).any()) throw BoundaryPoint("l_k(x) <= 1e-12");
  VectorXd w = -0.5 * P.nu.col(a).array() / l.array().square();
  return P.nu.transpose() * w.asDiagonal() * P.nu;
}

/// Moment map of the standard T^{n+1} action on CP^n:
/// [Z_0 : ... : Z_n] -> (|Z_i|^2 / sum |Z_j|^2).
inline VectorXd cpn_moment_map(const Eigen::VectorXcd& Z) {
  double s = Z.squaredNorm();
  if (s <= 0.0) throw ZeroVector("cpn_moment_map");
  return Z.cwiseAbs2().real() / s;
}

/// Volume of the orbit of the subtorus iota : T^k -> T^d through z in C^d
/// with the flat metric sum |dz_i|^2 = sum dmu_i^2/(2 mu_i) + 2 mu_i dtheta_i^2,
/// mu_i = |z_i|^2/2: vol = (2 pi)^k sqrt(det(iota^T diag(|z_i|^2) iota)).
inline double orbit_volume(const MatrixXd& iota, const Eigen::VectorXcd& z) {
  const int k = int(iota.cols());
  VectorXd m2 = z.cwiseAbs2().real();
  for (int i = 0; i < iota.rows(); ++i)
    if (iota.row(i).cwiseAbs().sum() > 0 && m2[i] < 1e-14)
      throw DegenerateOrbit("z_" + std::to_string(i) + " = 0");
  MatrixXd gram = iota.transpose() * m2.asDiagonal() * iota;
  double det = gram.determinant();
  if (det <= 1e-14) throw DegenerateOrbit("singular Gram matrix");
  return std::pow(2.0 * M_PI, k) * std::sqrt(det);
}

struct ReductionReport {
  double kappa = 0.0;
  double spread = 0.0;       // (max - min) / kappa over the samples
  bool level_consistent = true;
  std::string message;
};

/// Orbit-volume constancy over a level set of the subtorus moment map
/// iota^T mu; kappa is the common value.
inline ReductionReport reduction_volume_factor(
    const MatrixXd& iota, const std::vector<Eigen::VectorXcd>& samples) {
  if (samples.empty()) throw Error("TaskFailed", "no level-set samples");
  ReductionReport rep;
  VectorXd level0 = iota.transpose() * (0.5 * samples[0].cwiseAbs2().real());
  double lo = 0, hi = 0;
  for (size_t s = 0; s < samples.size(); ++s) {
    VectorXd level = iota.transpose() * (0.5 * samples[s].cwiseAbs2().real());
    if ((level - level0).cwiseAbs().maxCoeff() > 1e-8) {
      rep.level_consistent = false;
      rep.message = "sample " + std::to_string(s) + " off the level set";
    }
    double v = orbit_volume(iota, samples[s]);
    if (s == 0) { lo = hi = v; }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    rep.kappa += v;
  }
  rep.kappa /= double(samples.size());
  rep.spread = (hi - lo) / rep.kappa;
  return rep;
}

}  // namespace hslag
