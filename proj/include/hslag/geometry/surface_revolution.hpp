#pragma once

// Surfaces of revolution in the latitude chart (u, theta), theta periodic.
// The profile supplies f(u) = distance to the axis and E(u) = squared speed
// of the meridian curve, so  g = diag(E, f^2)  and  omega = sqrt(E) f du^dtheta.
// Gauss curvature comes out in closed form, K = -f''/(f E) + f' E'/(2 f E^2).

#include <cmath>

#include "hslag/geometry/manifold.hpp"

namespace hslag {

struct RevolutionProfile {
  std::function<double(double)> E, dE;       // meridian speed squared
  std::function<double(double)> f, df, ddf;  // radius from the axis
  double u_min, u_max;                       // open chart interval
  double round_radius = 0.0;                 // > 0 when a round sphere
};

class SurfaceOfRevolution : public ChartedManifold {
public:
  explicit SurfaceOfRevolution(RevolutionProfile profile, std::string label)
      : prof_(std::move(profile)), label_(std::move(label)) {}

  static SurfaceOfRevolution sphere(double R, double u_max = 1.45) {
    RevolutionProfile p;
    p.E = [R](double) { return R * R; };
    p.dE = [](double) { return 0.0; };
    p.f = [R](double u) { return R * std::cos(u); };
    p.df = [R](double u) { return -R * std::sin(u); };
    p.ddf = [R](double u) { return -R * std::cos(u); };
    p.u_min = -u_max;
    p.u_max = u_max;
    p.round_radius = R;
    return SurfaceOfRevolution(p, "Sphere");
  }

  /// Spheroid x^2/a^2 + y^2/a^2 + z^2/c^2 = 1 with (a cos u, c sin u) profile.
  static SurfaceOfRevolution ellipsoid(double a, double c, double u_max = 1.45) {
    RevolutionProfile p;
    p.E = [a, c](double u) {
      double s = std::sin(u), t = std::cos(u);
      return a * a * s * s + c * c * t * t;
    };
    p.dE = [a, c](double u) {
      return (a * a - c * c) * std::sin(2 * u);
    };
    p.f = [a](double u) { return a * std::cos(u); };
    p.df = [a](double u) { return -a * std::sin(u); };
    p.ddf = [a](double u) { return -a * std::cos(u); };
    p.u_min = -u_max;
    p.u_max = u_max;
    if (a == c) p.round_radius = a;
    return SurfaceOfRevolution(p, "Ellipsoid");
  }

  int dim() const override { return 2; }
  std::string name() const override { return label_; }
  const RevolutionProfile& profile() const { return prof_; }

  MatrixXd metric(const VectorXd& p) const override {
    MatrixXd g = MatrixXd::Zero(2, 2);
    g(0, 0) = prof_.E(p[0]);
    g(1, 1) = prof_.f(p[0]) * prof_.f(p[0]);
    return g;
  }

  MatrixXd omega(const VectorXd& p) const override {
    double a = std::sqrt(prof_.E(p[0])) * prof_.f(p[0]);
    MatrixXd om(2, 2);
    om << 0, a, -a, 0;
    return om;
  }

  MatrixXd metricDeriv(const VectorXd& p, int a) const override {
    MatrixXd dg = MatrixXd::Zero(2, 2);
    if (a == 0) {
      dg(0, 0) = prof_.dE(p[0]);
      dg(1, 1) = 2 * prof_.f(p[0]) * prof_.df(p[0]);
    }
    return dg;
  }

  double gaussCurvature(double u) const {
    double E = prof_.E(u), f = prof_.f(u);
    return -prof_.ddf(u) / (f * E) +
           prof_.df(u) * prof_.dE(u) / (2 * f * E * E);
  }

  MatrixXd ricci(const VectorXd& p) const override {
    return gaussCurvature(p[0]) * metric(p);
  }

  VectorXd periods() const override {
    VectorXd per(2);
    per << 0.0, 2 * M_PI;
    return per;
  }

  bool contains(const VectorXd& p, double margin) const override {
    return p.size() == 2 && p[0] > prof_.u_min + margin &&
           p[0] < prof_.u_max - margin;
  }

  /// Signed meridian arc length between two latitudes.
  double meridianDistance(double u0, double u1) const {
    // composite Simpson on [u0, u1]
    const int n = 256;
    double h = (u1 - u0) / n, s = 0.0;
    for (int i = 0; i <= n; ++i) {
      double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * std::sqrt(prof_.E(u0 + i * h));
    }
    return s * h / 3.0;
  }

  std::vector<ScalarField> killingPotentials() const override {
    std::vector<ScalarField> out;
    ScalarField one;
    one.value = [](const VectorXd&) { return 1.0; };
    one.grad = [](const VectorXd&) { return VectorXd::Zero(2); };
    one.name = "1";
    out.push_back(one);

    // Axial moment: dv = iota_{dtheta} omega = -sqrt(E) f du. On the round
    // sphere it equals -R z, so z below takes its place in the basis.
    ScalarField mu;
    mu.value = [this](const VectorXd& p) {
      const int n = 256;
      double h = p[0] / n, s = 0.0;
      for (int i = 0; i <= n; ++i) {
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double u = i * h;
        s += w * std::sqrt(prof_.E(u)) * prof_.f(u);
      }
      return -s * h / 3.0;
    };
    mu.grad = [this](const VectorXd& p) {
      VectorXd g(2);
      g << -std::sqrt(prof_.E(p[0])) * prof_.f(p[0]), 0.0;
      return g;
    };
    mu.name = "axial";
    if (prof_.round_radius <= 0) out.push_back(mu);

    if (prof_.round_radius > 0) {
      double R = prof_.round_radius;
      auto coord = [R](int which) {
        ScalarField v;
        v.value = [R, which](const VectorXd& p) {
          double u = p[0], t = p[1];
          switch (which) {
            case 0: return R * std::cos(u) * std::cos(t);
            case 1: return R * std::cos(u) * std::sin(t);
            default: return R * std::sin(u);
          }
        };
        v.grad = [R, which](const VectorXd& p) {
          double u = p[0], t = p[1];
          VectorXd g(2);
          switch (which) {
            case 0: g << -R * std::sin(u) * std::cos(t),
                         -R * std::cos(u) * std::sin(t);
                    break;
            case 1: g << -R * std::sin(u) * std::sin(t),
                          R * std::cos(u) * std::cos(t);
                    break;
            default: g << R * std::cos(u), 0.0;
          }
          return g;
        };
        v.name = which == 0 ? "x" : which == 1 ? "y" : "z";
        return v;
      };
      out.push_back(coord(0));
      out.push_back(coord(1));
      out.push_back(coord(2));
    }
    return out;
  }

private:
  RevolutionProfile prof_;
  std::string label_;
};

}  // namespace hslag
