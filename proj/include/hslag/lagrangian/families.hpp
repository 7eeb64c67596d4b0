#pragma once

// Standard Lagrangian constructions: product tori in flat factors, straight
// (moment-type) fibers of the flat torus, latitude circles on surfaces of
// revolution, and the one-parameter family of parallels.

#include "hslag/geometry/flat_torus.hpp"
#include "hslag/geometry/surface_revolution.hpp"
#include "hslag/lagrangian/harmonic.hpp"
#include "hslag/lagrangian/immersion.hpp"

namespace hslag {

/// Product torus |z_i| = r_i in the flat chart (contractible, no winding).
inline TorusImmersion product_torus(std::shared_ptr<const FlatTorus> M,
                                    const VectorXd& radii, int N = 32) {
  const int n = int(radii.size());
  auto grid = std::make_shared<PeriodicGrid>(n, N);
  MatrixXd W = MatrixXd::Zero(2 * n, n);
  return TorusImmersion::fromFunction(
      std::move(M), std::move(grid), W, [radii, n](const VectorXd& th) {
        VectorXd p(2 * n);
        for (int i = 0; i < n; ++i) {
          p[2 * i] = radii[i] * std::cos(th[i]);
          p[2 * i + 1] = radii[i] * std::sin(th[i]);
        }
        return p;
      });
}

/// Straight fiber {y_i = c_i} of the flat torus (x_i = theta_i winding).
inline TorusImmersion flat_fiber(std::shared_ptr<const FlatTorus> M,
                                 const VectorXd& y0, int N = 32) {
  const int n = int(y0.size());
  auto grid = std::make_shared<PeriodicGrid>(n, N);
  MatrixXd W = MatrixXd::Zero(2 * n, n);
  for (int i = 0; i < n; ++i) W(2 * i, i) = 1.0;
  MatrixXd P = MatrixXd::Zero(grid->size(), 2 * n);
  for (int i = 0; i < n; ++i) P.col(2 * i + 1).setConstant(y0[i]);
  return TorusImmersion(std::move(M), std::move(grid), W, P);
}

/// Latitude circle u = u0 on a surface of revolution.
inline TorusImmersion latitude_circle(
    std::shared_ptr<const SurfaceOfRevolution> M, double u0, int N = 32) {
  auto grid = std::make_shared<PeriodicGrid>(1, N);
  MatrixXd W(2, 1);
  W << 0.0, 1.0;
  MatrixXd P = MatrixXd::Zero(grid->size(), 2);
  P.col(0).setConstant(u0);
  return TorusImmersion(std::move(M), std::move(grid), W, P);
}

/// The family of parallels u = u0 + t.
inline LagrangianFamily parallels_family(
    std::shared_ptr<const SurfaceOfRevolution> M, double u0, double K,
    int N = 32) {
  LagrangianFamily fam;
  fam.radius = K;
  fam.parameters = 1;
  fam.at = [M, u0, K, N](const VectorXd& t) {
    if (std::abs(t[0]) > K)
      throw FamilyOverlap("parameter outside the family range");
    double u = u0 + t[0];
    VectorXd probe(2);
    probe << u, 0.0;
    if (!M->contains(probe, 0.02)) throw BoundaryPoint("parallel at chart edge");
    return latitude_circle(M, u, N);
  };
  return fam;
}

}  // namespace hslag
