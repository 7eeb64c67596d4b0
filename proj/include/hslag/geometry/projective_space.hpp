#pragma once

// Complex projective space CP^n with (a multiple of) the Fubini-Study
// metric, in the affine chart [1 : z_1 : ... : z_n] with real coordinates
// (x_1, y_1, ..., x_n, y_n). The Kähler potential is c * log(1 + |z|^2);
// with c = 1 a projective line has area 2*pi (a round sphere of radius
// 1/sqrt(2)). The metric is Einstein: Ric = ((n+1)/c) g, in closed form.

#include <complex>

#include "hslag/geometry/manifold.hpp"

namespace hslag {

class ProjectiveSpace : public ChartedManifold {
public:
  explicit ProjectiveSpace(int n, double scale = 1.0, double chart_radius = 40.0)
      : n_(n), c_(scale), radius_(chart_radius) {}

  int dim() const override { return 2 * n_; }
  std::string name() const override { return "ProjectiveSpace"; }
  double scale() const { return c_; }

  MatrixXd metric(const VectorXd& p) const override {
    return realForm(p, /*imag_part=*/false);
  }

  MatrixXd omega(const VectorXd& p) const override {
    return realForm(p, /*imag_part=*/true);
  }

  MatrixXd ricci(const VectorXd& p) const override {
    return ((n_ + 1) / c_) * metric(p);
  }

  bool contains(const VectorXd& p, double margin) const override {
    return p.size() == dim() && p.norm() + margin < radius_;
  }

  /// Moment map of the torus action  z_j -> e^{i phi_j} z_j  normalised so
  /// that mu_j = c |Z_j|^2 / |Z|^2 in homogeneous coordinates Z = (1, z).
  VectorXd momentMap(const VectorXd& p) const {
    double denom = 1.0 + p.squaredNorm();
    VectorXd mu(n_);
    for (int j = 0; j < n_; ++j)
      mu[j] = c_ * (p[2 * j] * p[2 * j] + p[2 * j + 1] * p[2 * j + 1]) / denom;
    return mu;
  }

  std::vector<ScalarField> killingPotentials() const override {
    // Hamiltonians of SU(n+1): real and imaginary parts of Z_i conj(Z_j)/|Z|^2
    // in homogeneous coordinates Z = (1, z_1, ..., z_n).
    std::vector<ScalarField> out;
    const int m = n_ + 1;
    auto homog = [this](const VectorXd& p) {
      Eigen::VectorXcd Z(n_ + 1);
      Z[0] = 1.0;
      for (int j = 0; j < n_; ++j)
        Z[j + 1] = std::complex<double>(p[2 * j], p[2 * j + 1]);
      return Z;
    };
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        ScalarField re;
        re.value = [homog, i, j](const VectorXd& p) {
          Eigen::VectorXcd Z = homog(p);
          return (Z[i] * std::conj(Z[j])).real() / Z.squaredNorm();
        };
        re.name = "Re(Z" + std::to_string(i) + " Z" + std::to_string(j) + "*)";
        out.push_back(re);
        if (j > i) {
          ScalarField im;
          im.value = [homog, i, j](const VectorXd& p) {
            Eigen::VectorXcd Z = homog(p);
            return (Z[i] * std::conj(Z[j])).imag() / Z.squaredNorm();
          };
          im.name = "Im(Z" + std::to_string(i) + " Z" + std::to_string(j) + "*)";
          out.push_back(im);
        }
      }
    return out;
  }

private:
  // Hermitian Fubini-Study matrix h_{i jbar} at z.
  Eigen::MatrixXcd hermitian(const VectorXd& p) const {
    Eigen::VectorXcd z(n_);
    for (int j = 0; j < n_; ++j)
      z[j] = std::complex<double>(p[2 * j], p[2 * j + 1]);
    double d = 1.0 + z.squaredNorm();
    Eigen::MatrixXcd h =
        (d * Eigen::MatrixXcd::Identity(n_, n_) -
         z.conjugate() * z.transpose()) *
        (c_ / (d * d));
    return h;
  }

  // g(u,v) = 2 Re sum h_{i jbar} u^i conj(v^j);
  // omega(u,v) = -2 Im sum h_{i jbar} u^i conj(v^j).
  MatrixXd realForm(const VectorXd& p, bool imag_part) const {
    Eigen::MatrixXcd h = hermitian(p);
    MatrixXd out(dim(), dim());
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        std::complex<double> hij = h(i, j);
        // u^i = e_x: 1, e_y: i ; pairings over the four real combinations.
        auto entry = [&](std::complex<double> ui, std::complex<double> vj) {
          std::complex<double> s = hij * ui * std::conj(vj);
          return imag_part ? -2.0 * s.imag() : 2.0 * s.real();
        };
        out(2 * i, 2 * j) = entry(1.0, 1.0);
        out(2 * i, 2 * j + 1) = entry(1.0, {0.0, 1.0});
        out(2 * i + 1, 2 * j) = entry({0.0, 1.0}, 1.0);
        out(2 * i + 1, 2 * j + 1) = entry({0.0, 1.0}, {0.0, 1.0});
      }
    return out;
  }

  int n_;
  double c_;
  double radius_;
};

}  // namespace hslag
