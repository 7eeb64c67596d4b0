#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "hslag/deform/orbit.hpp"
#include "hslag/deform/relative.hpp"
#include "hslag/deform/variation.hpp"
#include "hslag/geometry/flat_torus.hpp"
#include "hslag/geometry/perturbed.hpp"
#include "hslag/geometry/surface_revolution.hpp"
#include "hslag/lagrangian/families.hpp"
#include "hslag/geometry/toric_manifold.hpp"

using namespace hslag;

namespace {

ScalarField constant_field() {
  ScalarField f;
  f.name = "one";
  f.value = [](const VectorXd&) { return 1.0; };
  f.grad = [](const VectorXd& p) { return VectorXd(VectorXd::Zero(p.size())); };
  return f;
}

}  // namespace

TEST_CASE("newton solve is exact at a reference solution") {
  auto M = std::make_shared<FlatTorus>(4);
  VectorXd y0(2);
  y0 << 0.3, 1.1;
  RelativeHslagProblem prob;
  prob.structure = M;
  prob.seed = flat_fiber(M, y0, 16);
  prob.obstruction_potentials = {constant_field()};
  prob.box_m = 5;
  RelativeSolution sol = solve_relative_hslag(prob);
  CHECK(sol.iterations == 0);
  CHECK(sol.h.norm() < 1e-12);
  CHECK(sol.obstruction.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(mean_curvature(sol.ell_h).sup_residual < 1e-10);
}

TEST_CASE("newton converges with decreasing residuals on a perturbed sphere") {
  auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  auto delta = tilted_stretch(S, 0.03, 0.4);
  auto P = std::make_shared<PerturbedManifold>(S, delta, "stretched");
  RelativeHslagProblem prob;
  prob.structure = P;
  prob.seed = latitude_circle(S, 0.0, 24);
  prob.obstruction_potentials = S->killingPotentials();
  prob.residual_tol = 1e-10;
  prob.box_m = 7;
  RelativeSolution sol = solve_relative_hslag(prob);
  CHECK(sol.iterations <= 6);
  REQUIRE(sol.history.size() >= 2);
  for (size_t i = 1; i < sol.history.size(); ++i)
    CHECK(sol.history[i] < sol.history[i - 1]);
  // projected residual at the solution is below tolerance
  CHECK(sol.history.back() < 1e-10);
}

TEST_CASE("flat T^4 obstruction is orthogonal to constants") {
  auto M = std::make_shared<FlatTorus>(4);
  // small compatible perturbation that breaks translation invariance
  auto delta = [](const VectorXd& p) -> MatrixXd {
    MatrixXd d = MatrixXd::Zero(4, 4);
    double b = 0.02 * std::sin(p[0] + 0.3 * p[2]);
    d(0, 0) = b;
    d(1, 1) = -b;
    d(2, 3) = d(3, 2) = 0.5 * b;
    return d;
  };
  auto P = std::make_shared<PerturbedManifold>(M, delta, "wavy");
  VectorXd y0(2);
  y0 << 0.4, 0.9;
  RelativeHslagProblem prob;
  prob.structure = P;
  prob.seed = flat_fiber(M, y0, 12);
  prob.obstruction_potentials = {constant_field()};
  prob.residual_tol = 1e-9;
  prob.box_m = 4;
  RelativeSolution sol = solve_relative_hslag(prob);
  CHECK(sol.obstruction.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("modified volume is constant over the reference group") {
  auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  RelativeHslagProblem prob;
  prob.structure = S;
  prob.seed = latitude_circle(S, 0.35, 32);
  prob.obstruction_potentials = S->killingPotentials();
  prob.box_m = 8;
  GroupBasis gb = orbit_group(prob.seed);
  REQUIRE(gb.transverse.cols() == 2);  // axial rotation stabilizes
  REQUIRE(gb.stabilizer.cols() == 1);
  double v0 = modified_volume(prob, gb, VectorXd::Zero(2));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> box(-0.15, 0.15);
  for (int i = 0; i < 20; ++i) {
    VectorXd u(2);
    u << box(rng), box(rng);
    CHECK(std::abs(modified_volume(prob, gb, u) - v0) < 1e-8 * v0);
  }
}

TEST_CASE("orbit minimization lands on a constant-curvature curve") {
  auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  auto delta = tilted_stretch(S, 0.02, 0.3);
  auto P = std::make_shared<PerturbedManifold>(S, delta, "stretched");
  RelativeHslagProblem prob;
  prob.structure = P;
  prob.seed = latitude_circle(S, 0.0, 24);
  prob.obstruction_potentials = S->killingPotentials();
  prob.residual_tol = 1e-9;
  prob.box_m = 7;
  GroupBasis gb = orbit_group(rebase(prob.seed, P), S->killingPotentials());
  OrbitOptions opt;
  opt.grad_tol = 1e-7;
  OrbitMinimum m = minimize_over_orbit(prob, gb, opt);
  CHECK(m.grad_norm < 1e-6);
  CHECK(m.nondegenerate);
  CHECK(mean_curvature(m.ell).sup_residual < 1e-6);
  CHECK(curvature_spread(m.ell) < 1e-5);
}

TEST_CASE("anisotropic stretch jumps the minimizer away from the identity") {
  auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  const double eps = 0.02, tilt = 0.3;
  auto delta = tilted_stretch(S, eps, tilt);
  // perturbation is small in the mesh norm
  TorusImmersion eq = latitude_circle(S, 0.0, 24);
  std::vector<VectorXd> mesh;
  for (int j = 0; j < eq.grid().size(); ++j) mesh.push_back(eq.nodeValue(j));
  for (double u : {-0.8, -0.4, 0.0, 0.4, 0.8}) {
    VectorXd p(2);
    p << u, 1.0;
    mesh.push_back(p);
  }
  CHECK(mesh_norm(*S, delta, mesh) < 0.05);

  auto P = std::make_shared<PerturbedManifold>(S, delta, "stretched");
  RelativeHslagProblem prob;
  prob.structure = P;
  prob.seed = eq;
  prob.obstruction_potentials = S->killingPotentials();
  prob.residual_tol = 1e-9;
  prob.box_m = 7;
  GroupBasis gb = orbit_group(rebase(prob.seed, P), S->killingPotentials());
  OrbitOptions opt;
  opt.presearch_radius = 0.8;
  opt.presearch_points = 10;
  OrbitMinimum m = minimize_over_orbit(prob, gb, opt);
  CHECK(m.nondegenerate);
  CHECK(m.u.norm() > 0.1);
}

TEST_CASE("continuation reproduces toric moment fibers") {
  auto M = std::make_shared<ToricManifold>(LabelledPolytope::simplex(2));
  VectorXd x0(2);
  x0 << 0.3, 0.3;
  TorusImmersion centre = moment_fiber(M, x0, 16);
  LagrangianFamily fam = fibration_seed(centre, 0.1);
  std::vector<VectorXd> grid;
  for (double t : {0.0, 0.02, 0.04}) {
    VectorXd v(2);
    v << t, -t;
    grid.push_back(v);
  }
  OrbitOptions opt;
  opt.hslag_tol = 1e-7;
  ContinuationResult res =
      continuation(M, fam, grid, M->killingPotentials(), opt, 1e-9);
  REQUIRE(res.fibers.size() == 3);
  CHECK(res.stop_reason.empty());
  CHECK(res.delta == doctest::Approx(grid.back().norm()).epsilon(1e-12));
  for (size_t i = 0; i < res.fibers.size(); ++i) {
    CHECK(res.residual_sup[i] < 1e-7);
    TorusImmersion expect = fam.at(res.t[i]);
    double diff = 0.0;
    for (int j = 0; j < expect.grid().size(); ++j)
      diff = std::max(
          diff, (res.fibers[i].nodeValue(j) - expect.nodeValue(j)).norm());
    CHECK(diff < 1e-8);
  }
}

TEST_CASE("continuation refuses a degenerate centre") {
  // reference round metric: the modified volume is constant, so the Hessian
  // at the centre fiber is degenerate
  auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  LagrangianFamily fam = parallels_family(S, 0.3, 0.15, 24);
  std::vector<VectorXd> grid = {VectorXd::Zero(1)};
  CHECK_THROWS_AS(
      continuation(S, fam, grid, S->killingPotentials(), OrbitOptions{}, 1e-8),
      ContinuationStopped);
}

TEST_CASE("metric variation reproduces the flat-space formulas") {
  auto M = std::make_shared<FlatTorus>(2);
  VectorXd p(2);
  p << 0.7, 1.3;

  ScalarField pluri;  // real part of z^2: pluriharmonic
  pluri.value = [](const VectorXd& q) { return q[0] * q[0] - q[1] * q[1]; };
  MatrixXd gb = metric_variation(*M, pluri, VariationMode::B, p);
  MatrixXd expect(2, 2);
  expect << 4.0, 0.0, 0.0, -4.0;
  CHECK((gb - expect).cwiseAbs().maxCoeff() < 1e-7);

  ScalarField radial;  // |z|^2: J-invariant Hessian
  radial.value = [](const VectorXd& q) { return q.squaredNorm(); };
  CHECK(metric_variation(*M, radial, VariationMode::B, p)
            .cwiseAbs()
            .maxCoeff() < 1e-7);

  ScalarField mixed;
  mixed.value = [](const VectorXd& q) {
    return std::sin(q[0]) * std::cos(2 * q[1]) + 0.3 * std::sin(q[1]);
  };
  MatrixXd a = metric_variation(*M, mixed, VariationMode::A, p);
  MatrixXd b = metric_variation(*M, mixed, VariationMode::B, p);
  // D^- d^c phi (X, Y) = -D^- d phi (JX, Y)
  MatrixXd J = M->acs(p);
  CHECK((a - J.transpose() * b).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("positive path fixes the seed and its volume") {
  auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  TorusImmersion eq = latitude_circle(S, 0.0, 32);
  ScalarField phi = bump_quartic_potential(eq);

  SUBCASE("zero potential gives the constant path") {
    ScalarField zero;
    zero.value = [](const VectorXd&) { return 0.0; };
    zero.grad = [](const VectorXd& p) { return VectorXd(VectorXd::Zero(2)); };
    PerturbationPath path = integrate_positive_path(S, zero, 0.1);
    auto Js = path.at(0.08);
    VectorXd p(2);
    p << 0.4, 2.0;
    CHECK((Js->metric(p) - S->metric(p)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("the seed stays stationary along the path") {
    PerturbationPath path = integrate_positive_path(S, phi, 0.1);
    CHECK(path.at(0.0) == S);
    CHECK_THROWS_AS(path.at(0.2), ConstraintDriftExceeded);
    double v0 = induced_geometry(eq).volume;
    for (double s : {0.03, 0.1}) {
      TorusImmersion moved = rebase(eq, path.at(s));
      CHECK(std::abs(induced_geometry(moved).volume - v0) < 1e-8);
      CHECK(mean_curvature(moved).sup_residual < 1e-7);
    }
  }

  SUBCASE("compatibility holds at sampled points") {
    PerturbationPath path = integrate_positive_path(S, phi, 0.1);
    auto Js = path.at(0.1);
    for (double u : {-0.5, 0.1, 0.6}) {
      VectorXd p(2);
      p << u, 1.7;
      MatrixXd J = Js->acs(p);
      CHECK((J * J + MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::SelfAdjointEigenSolver<MatrixXd> eg(Js->metric(p));
      CHECK(eg.eigenvalues().minCoeff() > 0);
      CHECK((Js->omega(p) - S->omega(p)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("path volume derivative matches the laplacian integral") {
  auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  TorusImmersion eq = latitude_circle(S, 0.0, 32);
  ScalarField phi = bump_quartic_potential(eq);
  PerturbationPath path = integrate_positive_path(S, phi, 0.2);
  // move the curve off the zero set of phi so both sides are nonzero
  ScalarField kx = S->killingPotentials()[0];
  TorusImmersion moved = TorusImmersion::fromFunction(
      S, eq.gridPtr(), eq.winding(), [&](const VectorXd& th) {
        return hamiltonian_flow(*S, kx, 0.25, eq.value(th));
      });

  const double s0 = 0.05, hs = 0.01;
  auto vol = [&](double s) {
    return induced_geometry(rebase(moved, path.at(s))).volume;
  };
  double lhs = (vol(s0 + hs) - vol(s0 - hs)) / (2 * hs);

  auto Js = path.at(s0);
  TorusImmersion on_s = rebase(moved, Js);
  InducedGeometry geo = induced_geometry(on_s);
  VectorXd integrand(on_s.grid().size());
  for (int j = 0; j < on_s.grid().size(); ++j)
    integrand[j] =
        ambient_laplacian(*Js, phi, on_s.nodeValue(j)) * geo.sqrtdet[j];
  double rhs = on_s.grid().integrate(integrand);
  CHECK(std::abs(lhs - rhs) < 1e-3 * std::max(std::abs(rhs), 1e-6));
}

TEST_CASE("quartic potential has the stated transverse expansion") {
  SUBCASE("flat fibers: laplacian equals the squared distance") {
    auto M = std::make_shared<FlatTorus>(4);
    VectorXd y0(2);
    y0 << 0.3, 1.1;
    TorusImmersion ell = flat_fiber(M, y0, 16);
    ScalarField phi = bump_quartic_potential(ell, 0.8);
    // on-submanifold: vanishing to third order
    VectorXd p0 = ell.nodeValue(3);
    CHECK(phi.value(p0) == doctest::Approx(0.0).epsilon(1e-14));
    for (double r : {0.1, 0.05}) {
      VectorXd p = p0;
      p[1] += r / std::sqrt(2.0);
      p[3] += r / std::sqrt(2.0);
      CHECK(phi.value(p) == doctest::Approx(-std::pow(r, 4) / 16.0)
                                .epsilon(1e-6));
      double lap = ambient_laplacian(*M, phi, p);
      CHECK(lap == doctest::Approx(r * r).epsilon(1e-3));
    }
  }
  SUBCASE("curved ambient: ratio tends to one linearly") {
    auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
    TorusImmersion eq = latitude_circle(S, 0.0, 32);
    ScalarField phi = bump_quartic_potential(eq, 0.9);
    double prev = 1.0;
    for (double r : {0.1, 0.05, 0.025}) {
      VectorXd p(2);
      p << r, 1.3;  // meridian offset: geodesic distance r from the equator
      double ratio = ambient_laplacian(*S, phi, p, 5e-4) / (r * r);
      CHECK(std::abs(ratio - 1.0) < 2.0 * r);
      if (r < 0.1) CHECK(std::abs(ratio - 1.0) < prev + 1e-6);
      prev = std::abs(ratio - 1.0);
    }
  }
}

TEST_CASE("positivity experiment flips sign at s = 0") {
  auto S = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  TorusImmersion eq = latitude_circle(S, 0.0, 32);
  ScalarField phi = bump_quartic_potential(eq);
  PerturbationPath path = integrate_positive_path(S, phi, 0.1);
  auto pots = S->killingPotentials();

  // axial rotation preserves the equator: transversality gate
  CHECK_THROWS_AS(
      positivity_experiment(eq, path, {0.05}, pots[2]),
      NonTransverseSubgroup);

  PositivityReport rep =
      positivity_experiment(eq, path, {0.0, 0.02, 0.05, 0.1}, pots[0]);
  REQUIRE(rep.s.size() == 4);
  CHECK(std::abs(rep.second_derivative[0]) < 1e-7);
  for (size_t i = 1; i < rep.s.size(); ++i)
    CHECK(rep.second_derivative[i] > 0.0);
  // monotone in s at first order
  CHECK(rep.second_derivative[3] > rep.second_derivative[1]);
}
