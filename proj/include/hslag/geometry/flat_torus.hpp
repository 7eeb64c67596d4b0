#pragma once

// Flat torus C^n / (2pi Z)^{2n} in coordinates (x_1, y_1, ..., x_n, y_n),
// z_j = x_j + i y_j, with the Euclidean metric and omega = sum dx_j ^ dy_j.

#include "hslag/geometry/manifold.hpp"

namespace hslag {

class FlatTorus : public ChartedManifold {
public:
  explicit FlatTorus(int n_complex) : n_(n_complex) {}

  int dim() const override { return 2 * n_; }
  std::string name() const override { return "FlatTorus"; }

  MatrixXd metric(const VectorXd&) const override {
    return MatrixXd::Identity(dim(), dim());
  }

  MatrixXd omega(const VectorXd&) const override {
    MatrixXd om = MatrixXd::Zero(dim(), dim());
    for (int j = 0; j < n_; ++j) {
      om(2 * j, 2 * j + 1) = 1.0;
      om(2 * j + 1, 2 * j) = -1.0;
    }
    return om;
  }

  MatrixXd metricDeriv(const VectorXd&, int) const override {
    return MatrixXd::Zero(dim(), dim());
  }

  MatrixXd ricci(const VectorXd&) const override {
    return MatrixXd::Zero(dim(), dim());
  }

  VectorXd periods() const override {
    return VectorXd::Constant(dim(), 2 * M_PI);
  }

  bool contains(const VectorXd& p, double) const override {
    return p.size() == dim();
  }

  std::vector<ScalarField> killingPotentials() const override {
    // Translations are not Hamiltonian on the torus; only constants remain.
    ScalarField one;
    one.value = [](const VectorXd&) { return 1.0; };
    one.grad = [d = dim()](const VectorXd&) { return VectorXd::Zero(d); };
    one.name = "1";
    return {one};
  }

private:
  int n_;
};

}  // namespace hslag
