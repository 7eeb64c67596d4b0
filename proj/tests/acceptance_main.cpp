// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failures. Tolerances are stated inline next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <vector>

#include "hslag/deform/orbit.hpp"
#include "hslag/deform/relative.hpp"
#include "hslag/deform/variation.hpp"
#include "hslag/geometry/flat_torus.hpp"
#include "hslag/geometry/projective_space.hpp"
#include "hslag/geometry/surface_revolution.hpp"
#include "hslag/geometry/toric_manifold.hpp"
#include "hslag/jacobi/box.hpp"
#include "hslag/lagrangian/families.hpp"
#include "hslag/toric/polytope.hpp"

using namespace hslag;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
std::mt19937 rng(20240817);
std::uniform_real_distribution<double> unit(0.0, 1.0);

int failures = 0;

void verdict(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", idx,
              name, detail.c_str());
  if (!ok) ++failures;
}

TorusImmersion fs_clifford(int n, int N) {
  auto M = std::make_shared<ProjectiveSpace>(n, 1.0);
  auto grid = std::make_shared<PeriodicGrid>(n, N);
  MatrixXd W = MatrixXd::Zero(2 * n, n);
  return TorusImmersion::fromFunction(
      std::move(M), std::move(grid), W, [n](const VectorXd& th) {
        VectorXd p(2 * n);
        for (int i = 0; i < n; ++i) {
          p[2 * i] = std::cos(th[i]);
          p[2 * i + 1] = std::sin(th[i]);
        }
        return p;
      });
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------- 1
void criterion_flat_torus() {
  auto t0 = std::chrono::steady_clock::now();
  auto flat = std::make_shared<FlatTorus>(4);
  VectorXd y0(2);
  y0 << 0.3, 1.1;
  TorusImmersion ell = flat_fiber(flat, y0, 16);
  double resid = mean_curvature(ell).sup_residual;
  BoxOperator op = assemble_box(ell, 7);
  SpectralReport sp = spectrum(op);
  double worst = 0.0;
  {
    std::vector<double> oracle;
    for (const auto& mode : op.basis->modes) {
      double q = mode.xi.cast<double>().squaredNorm();
      oracle.push_back(q * q);
    }
    std::sort(oracle.begin(), oracle.end());
    for (int i = 0; i < sp.eigenvalues.size(); ++i)
      worst = std::max(worst, std::abs(sp.eigenvalues[i] - oracle[i]));
  }
  double dt = seconds_since(t0);
  bool ok = resid < 1e-10 && worst < 1e-8 && sp.kernel_dimension == 1 &&
            dt < 5.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "residual %.2e, eig err %.2e, kernel %d, %.1fs", resid, worst,
                sp.kernel_dimension, dt);
  verdict(1, "flat-torus oracle", ok, buf);
}

// ---------------------------------------------------------------- 2
void criterion_clifford() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (int n : {1, 2}) {
    // Guillemin barycenter fiber: stationarity
    auto tor = std::make_shared<ToricManifold>(LabelledPolytope::simplex(n));
    VectorXd x0 = VectorXd::Constant(n, 1.0 / (n + 1));
    double resid =
        mean_curvature(moment_fiber(tor, x0, n == 1 ? 32 : 12)).sup_residual;
    // Fubini-Study chart: spectrum, rigidity, stability
    TorusImmersion cl = fs_clifford(n, n == 1 ? 32 : 12);
    BoxOperator op = assemble_box(cl, n == 1 ? 10 : 4);
    SpectralReport sp = spectrum(op);
    RigidityReport rr = rigidity_check(cl, op, sp);
    StabilityReport st = stability_check(sp);
    int expect = n == 1 ? 3 : 7;
    ok = ok && resid < 1e-8 && sp.kernel_dimension == expect && rr.rigid &&
         st.stable;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "n=%d resid %.1e kernel %d/%d%s%s; ", n,
                  resid, sp.kernel_dimension, expect,
                  rr.rigid ? "" : " NOT-RIGID", st.stable ? "" : " UNSTABLE");
    detail += buf;
  }
  double dt = seconds_since(t0);
  ok = ok && dt < 60.0;
  detail += std::to_string(dt).substr(0, 4) + "s";
  verdict(2, "clifford tori", ok, detail);
}

// ---------------------------------------------------------------- 3
void criterion_guillemin_fs() {
  double worst = 0.0;
  for (int n : {1, 2}) {
    LabelledPolytope sim = LabelledPolytope::simplex(n);
    ProjectiveSpace fs(n, 1.0);
    auto phi = [n](const VectorXd& q) {
      VectorXd x = q.head(n), th = q.tail(n);
      double x0 = 1.0 - x.sum();
      VectorXd z(2 * n);
      for (int j = 0; j < n; ++j) {
        double r = std::sqrt(x[j] / x0);
        z[2 * j] = r * std::cos(th[j]);
        z[2 * j + 1] = r * std::sin(th[j]);
      }
      return z;
    };
    for (int i = 0; i < 100; ++i) {
      VectorXd x(n);
      double budget = 0.9;
      for (int j = 0; j < n; ++j) {
        x[j] = 0.05 + (budget - 0.05 * (n - j)) * unit(rng) * 0.8;
        budget -= x[j];
      }
      VectorXd q(2 * n);
      q.head(n) = x;
      for (int j = 0; j < n; ++j) q[n + j] = kTwoPi * unit(rng);
      MatrixXd Jac(2 * n, 2 * n);
      for (int a = 0; a < 2 * n; ++a) {
        VectorXd qp = q, qm = q;
        qp[a] += 1e-6;
        qm[a] -= 1e-6;
        Jac.col(a) = (phi(qp) - phi(qm)) / 2e-6;
      }
      MatrixXd pulled = Jac.transpose() * fs.metric(phi(q)) * Jac;
      GuilleminData gd = guillemin_metric(sim, x);
      MatrixXd ref = MatrixXd::Zero(2 * n, 2 * n);
      ref.topLeftCorner(n, n) = gd.G;
      ref.bottomRightCorner(n, n) = gd.Ginv;
      worst = std::max(worst, (pulled - ref).cwiseAbs().maxCoeff() /
                                  ref.cwiseAbs().maxCoeff());
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max rel err %.2e", worst);
  verdict(3, "guillemin vs fubini-study", worst < 1e-6, buf);
}

// ---------------------------------------------------------------- 4
void criterion_selfadjoint() {
  bool ok = true;
  std::string detail;
  // HSLAG cases: flat fiber, toric CP^1 barycenter, FS clifford CP^1
  {
    auto flat = std::make_shared<FlatTorus>(4);
    VectorXd y0(2);
    y0 << 0.3, 1.1;
    std::vector<TorusImmersion> cases;
    cases.push_back(flat_fiber(flat, y0, 16));
    auto tor = std::make_shared<ToricManifold>(LabelledPolytope::simplex(1));
    cases.push_back(moment_fiber(tor, VectorXd::Constant(1, 0.5), 32));
    cases.push_back(fs_clifford(1, 32));
    std::vector<int> ms = {5, 8, 8};
    for (size_t i = 0; i < cases.size(); ++i) {
      BoxOperator op = assemble_box(cases[i], ms[i]);
      SelfadjointReport sr = selfadjoint_diagnostics(op);
      ok = ok && sr.full_asymmetry < 1e-6;
      char buf[48];
      std::snprintf(buf, sizeof(buf), "asym %.1e; ", sr.full_asymmetry);
      detail += buf;
    }
  }
  // non-stationary circle: D-part symmetric, full asymmetry tracks div JH
  {
    auto sph = std::make_shared<SurfaceOfRevolution>(
        SurfaceOfRevolution::sphere(1.0));
    TorusImmersion wavy = TorusImmersion::fromFunction(
        sph, std::make_shared<PeriodicGrid>(1, 32), MatrixXd::Zero(2, 1),
        [](const VectorXd& th) {
          VectorXd p(2);
          p << 0.4 + 0.05 * std::cos(th[0]), th[0];
          return p;
        });
    BoxOperator op = assemble_box(wavy, 8);
    SelfadjointReport sr = selfadjoint_diagnostics(op);
    double absolute = sr.full_asymmetry * op.matrix.norm();
    bool tracks = absolute < 10.0 * sr.div_jh_sup * op.matrix.norm();
    ok = ok && sr.d_part_asymmetry < 1e-6 && tracks;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "D-part %.1e, div JH %.1e%s",
                  sr.d_part_asymmetry, sr.div_jh_sup,
                  tracks ? "" : " NOT-TRACKING");
    detail += buf;
  }
  verdict(4, "selfadjointness diagnostics", ok, detail);
}

// ---------------------------------------------------------------- 5
void criterion_variations() {
  bool ok = true;
  double worst1 = 0.0, worst2 = 0.0;
  // first variation on three non-stationary immersions
  {
    auto sph = std::make_shared<SurfaceOfRevolution>(
        SurfaceOfRevolution::sphere(1.0));
    auto egg = std::make_shared<SurfaceOfRevolution>(
        SurfaceOfRevolution::ellipsoid(1.0, 1.4));
    std::vector<TorusImmersion> cases = {latitude_circle(sph, 0.5, 32),
                                         latitude_circle(egg, 0.3, 32),
                                         latitude_circle(egg, -0.45, 32)};
    for (const auto& ell : cases)
      for (int k = 0; k < 10; ++k) {
        ScalarField v;
        double a = unit(rng) - 0.5, b = unit(rng) - 0.5,
               c = 2.0 * unit(rng);
        v.value = [a, b, c](const VectorXd& p) {
          return a * std::sin(p[1] + c) + b * p[0];
        };
        FirstVariationReport fr = variation_check_first(ell, v, 1e-4);
        worst1 = std::max(worst1, fr.rel_mismatch);
      }
    ok = ok && worst1 < 1e-3;
  }
  // second variation <box u, u> at three HSLAG immersions
  {
    auto sph = std::make_shared<SurfaceOfRevolution>(
        SurfaceOfRevolution::sphere(1.0));
    auto flat = std::make_shared<FlatTorus>(2);
    VectorXd y0 = VectorXd::Constant(1, 0.7);
    std::vector<TorusImmersion> cases = {latitude_circle(sph, 0.0, 32),
                                         flat_fiber(flat, y0, 32),
                                         fs_clifford(1, 32)};
    for (const auto& ell : cases) {
      BoxOperator op = assemble_box(ell, 6);
      MatrixXd A = 0.5 * (op.matrix + op.matrix.transpose());
      double v0 = induced_geometry(ell).volume;
      double rho = detail::tube_radius_estimate(ell) * 0.5;
      const double h = 1e-3;
      for (int k = 0; k < 10; ++k) {
        VectorXd c(op.size());
        for (int a = 0; a < c.size(); ++a) c[a] = unit(rng) - 0.5;
        c /= c.norm();
        VectorXd u = op.samples * c;
        auto vol_at = [&](double t) {
          HamiltonianDeformation d;
          d.f = t * u;
          d.rho = rho;
          d.flow_steps = 8;
          return induced_geometry(deform(ell, d)).volume;
        };
        double fd = (vol_at(h) + vol_at(-h) - 2 * v0) / (h * h);
        double an = c.dot(A * c);
        worst2 = std::max(worst2,
                          std::abs(fd - an) / std::max(std::abs(an), 1e-8));
      }
    }
    ok = ok && worst2 < 1e-3;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "first var %.2e, second var %.2e", worst1,
                worst2);
  verdict(5, "variation identities", ok, buf);
}

// ---------------------------------------------------------------- 6
void criterion_reduction() {
  MatrixXd hopf(2, 1);
  hopf << 1, 1;
  double lo = 1e300, hi = 0.0;
  for (int i = 0; i < 100; ++i) {
    double a = 0.05 + 0.9 * unit(rng);
    Eigen::VectorXcd z(2);
    z[0] = std::polar(std::sqrt(a), kTwoPi * unit(rng));
    z[1] = std::polar(std::sqrt(1.0 - a), kTwoPi * unit(rng));
    double v = orbit_volume(hopf, z);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double spread = (hi - lo) / hi;

  // kappa consistency on the reduced CP^1 = [0, 1/2]
  Eigen::VectorXcd z(2);
  z << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  double kappa = orbit_volume(hopf, z);
  LabelledPolytope seg;
  seg.n = 1;
  seg.nu.resize(2, 1);
  seg.nu << 1, -1;
  seg.c.resize(2);
  seg.c << 0, 0.5;
  seg.lattice = MatrixXd::Identity(1, 1);
  VectorXd mid(1);
  mid << 0.25;
  double volL = kTwoPi * std::sqrt(guillemin_metric(seg, mid).Ginv(0, 0));
  double vol_pre = orbit_volume(MatrixXd::Identity(2, 2), z);
  double rel = std::abs(vol_pre - kappa * volL) / vol_pre;

  bool ok = spread < 1e-9 && rel < 1e-6;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "length spread %.1e, kappa gap %.1e",
                spread, rel);
  verdict(6, "reduction bookkeeping", ok, buf);
}

// ---------------------------------------------------------------- 7
void criterion_pipeline() {
  auto S = std::make_shared<SurfaceOfRevolution>(
      SurfaceOfRevolution::sphere(1.0));
  TorusImmersion eq = latitude_circle(S, 0.0, 24);
  ScalarField phi = bump_quartic_potential(eq);
  PerturbationPath path = integrate_positive_path(S, phi, 0.1);
  auto Js = path.at(0.05);

  RelativeHslagProblem prob;
  prob.structure = Js;
  prob.seed = eq;
  prob.obstruction_potentials = S->killingPotentials();
  prob.residual_tol = 1e-9;
  prob.box_m = 7;
  GroupBasis gb = orbit_group(rebase(eq, Js), S->killingPotentials());
  OrbitOptions opt;
  opt.hslag_tol = 1e-6;
  OrbitMinimum m = minimize_over_orbit(prob, gb, opt);
  double spread0 = curvature_spread(m.ell);

  bool fib_ok = false;
  size_t fibers = 0;
  double spread_max = spread0;
  std::string stop;
  try {
    LagrangianFamily fam = parallels_family(S, 0.0, 0.15, 24);
    std::vector<VectorXd> grid;
    for (double t : {0.0, 0.04, 0.08, -0.04, -0.08})
      grid.push_back(VectorXd::Constant(1, t));
    ContinuationResult res =
        continuation(Js, fam, grid, S->killingPotentials(), opt, 1e-9);
    fibers = res.fibers.size();
    for (double s : res.spread) spread_max = std::max(spread_max, s);
    fib_ok = fibers >= 2 && res.stop_reason.empty();
    stop = res.stop_reason;
  } catch (const Error& e) {
    stop = e.what();
  }
  bool ok = m.nondegenerate && spread0 < 1e-5 && fib_ok && spread_max < 1e-5;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "nondeg %d, spread %.1e, fibers %zu, max spread %.1e %s",
                int(m.nondegenerate), spread0, fibers, spread_max,
                stop.c_str());
  verdict(7, "deformation pipeline on CP^1", ok, buf);
}

// ---------------------------------------------------------------- 8
void criterion_positivity() {
  auto S = std::make_shared<SurfaceOfRevolution>(
      SurfaceOfRevolution::sphere(1.0));
  TorusImmersion eq = latitude_circle(S, 0.0, 32);
  ScalarField phi = bump_quartic_potential(eq);
  PerturbationPath path = integrate_positive_path(S, phi, 0.1);
  auto pots = S->killingPotentials();
  std::vector<double> s_list = {0.0, 0.02, 0.05, 0.1};

  bool ok = true;
  int transverse = 0;
  double at0 = 0.0, min_pos = 1e300;
  for (const auto& kappa : pots) {
    PositivityReport rep;
    try {
      rep = positivity_experiment(eq, path, s_list, kappa);
    } catch (const NonTransverseSubgroup&) {
      continue;
    }
    ++transverse;
    for (size_t i = 0; i < rep.s.size(); ++i) {
      if (rep.s[i] == 0.0) {
        at0 = std::max(at0, std::abs(rep.second_derivative[i]));
        ok = ok && std::abs(rep.second_derivative[i]) < 1e-7;
      } else {
        min_pos = std::min(min_pos, rep.second_derivative[i]);
        ok = ok && rep.second_derivative[i] > 0.0;
      }
    }
  }
  ok = ok && transverse > 0;
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "%d transverse subgroups, |dd(0)| %.1e, min dd %.2e",
                transverse, at0, min_pos);
  verdict(8, "positivity experiment", ok, buf);
}

// ---------------------------------------------------------------- 9
void criterion_quartic() {
  bool ok = true;
  std::string detail;
  {
    auto M = std::make_shared<FlatTorus>(4);
    VectorXd y0(2);
    y0 << 0.3, 1.1;
    TorusImmersion ell = flat_fiber(M, y0, 16);
    ScalarField phi = bump_quartic_potential(ell, 0.8);
    double worst = 0.0;
    for (double r : {0.1, 0.05}) {
      VectorXd p = ell.nodeValue(3);
      p[1] += r / std::sqrt(2.0);
      p[3] += r / std::sqrt(2.0);
      double lap = ambient_laplacian(*M, phi, p);
      worst = std::max(worst, std::abs(lap / (r * r) - 1.0));
    }
    ok = ok && worst < 1e-3;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "flat err %.1e; ", worst);
    detail += buf;
  }
  {
    auto S = std::make_shared<SurfaceOfRevolution>(
        SurfaceOfRevolution::sphere(1.0));
    TorusImmersion eq = latitude_circle(S, 0.0, 32);
    ScalarField phi = bump_quartic_potential(eq, 0.9);
    for (double r : {0.1, 0.05, 0.025}) {
      VectorXd p(2);
      p << r, 1.3;
      double ratio = ambient_laplacian(*S, phi, p, 5e-4) / (r * r);
      bool here = std::abs(ratio - 1.0) < 2.0 * r;  // O(r) convergence
      ok = ok && here;
      char buf[48];
      std::snprintf(buf, sizeof(buf), "r=%.3f err %.1e; ", r,
                    std::abs(ratio - 1.0));
      detail += buf;
    }
  }
  verdict(9, "quartic-potential expansion", ok, detail);
}

// ---------------------------------------------------------------- 10
void criterion_jump() {
  auto S = std::make_shared<SurfaceOfRevolution>(
      SurfaceOfRevolution::sphere(1.0));
  auto delta = tilted_stretch(S, 0.02, 0.3);
  TorusImmersion eq = latitude_circle(S, 0.0, 24);
  std::vector<VectorXd> mesh;
  for (int j = 0; j < eq.grid().size(); ++j) mesh.push_back(eq.nodeValue(j));
  for (double u : {-0.8, -0.4, 0.0, 0.4, 0.8}) {
    VectorXd p(2);
    p << u, 1.0;
    mesh.push_back(p);
  }
  double size = mesh_norm(*S, delta, mesh);

  auto P = std::make_shared<PerturbedManifold>(S, delta, "stretched");
  RelativeHslagProblem prob;
  prob.structure = P;
  prob.seed = eq;
  prob.obstruction_potentials = S->killingPotentials();
  prob.residual_tol = 1e-9;
  prob.box_m = 7;
  GroupBasis gb = orbit_group(rebase(eq, P), S->killingPotentials());
  OrbitOptions opt;
  opt.presearch_radius = 0.8;
  opt.presearch_points = 10;
  OrbitMinimum m = minimize_over_orbit(prob, gb, opt);
  bool ok = size < 0.05 && m.u.norm() > 0.1;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mesh norm %.3f, |u*| %.3f", size,
                m.u.norm());
  verdict(10, "jump phenomenon", ok, buf);
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  criterion_flat_torus();
  criterion_clifford();
  criterion_guillemin_fs();
  criterion_selfadjoint();
  criterion_variations();
  criterion_reduction();
  criterion_pipeline();
  criterion_positivity();
  criterion_quartic();
  criterion_jump();
  std::printf("%d/10 criteria passed in %.1fs\n", 10 - failures,
              seconds_since(t0));
  return failures;
}
