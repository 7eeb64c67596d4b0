#pragma once

// Spectral utilities on the uniform periodic grid of T^n. Fields are sampled
// on the tensor grid theta_k = 2*pi*k/N and differentiated with the standard
// trigonometric differentiation matrix; off-grid values come from the
// interpolating trigonometric polynomial.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hslag/errors.hpp"

namespace hslag {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform N^n tensor grid on T^n with spectral differentiation.
class PeriodicGrid {
public:
  PeriodicGrid(int dim, int points_per_axis) : n_(dim), N_(points_per_axis) {
    if (n_ < 1 || N_ < 4 || N_ % 2 != 0)
      throw Error("GridInvalid", "need dim>=1 and even N>=4");
    size_ = 1;
    for (int a = 0; a < n_; ++a) size_ *= N_;
    buildDiffMatrix();
  }

  int dim() const { return n_; }
  int pointsPerAxis() const { return N_; }
  int size() const { return size_; }
  double cellWeight() const { return std::pow(kTwoPi / N_, n_); }

  /// Multi-index of flat index (axis 0 slowest).
  VectorXi multiIndex(int flat) const {
    VectorXi k(n_);
    for (int a = n_ - 1; a >= 0; --a) {
      k[a] = flat % N_;
      flat /= N_;
    }
    return k;
  }

  int flatIndex(const VectorXi& k) const {
    int idx = 0;
    for (int a = 0; a < n_; ++a) idx = idx * N_ + ((k[a] % N_) + N_) % N_;
    return idx;
  }

  VectorXd node(int flat) const {
    VectorXi k = multiIndex(flat);
    VectorXd th(n_);
    for (int a = 0; a < n_; ++a) th[a] = kTwoPi * k[a] / N_;
    return th;
  }

  /// Spectral derivative of a sampled field along one torus axis.
  VectorXd diff(const VectorXd& field, int axis) const {
    VectorXd out(size_);
    int stride = 1;
    for (int a = n_ - 1; a > axis; --a) stride *= N_;
    int block = stride * N_;
    for (int base = 0; base < size_; base += block) {
      for (int off = 0; off < stride; ++off) {
        for (int j = 0; j < N_; ++j) {
          double acc = 0.0;
          for (int k = 0; k < N_; ++k)
            acc += D1_(j, k) * field[base + off + k * stride];
          out[base + off + j * stride] = acc;
        }
      }
    }
    return out;
  }

  /// Trapezoidal quadrature (spectrally accurate on the periodic grid).
  double integrate(const VectorXd& field) const {
    return field.sum() * cellWeight();
  }

private:
  void buildDiffMatrix() {
    D1_ = MatrixXd::Zero(N_, N_);
    for (int j = 0; j < N_; ++j)
      for (int k = 0; k < N_; ++k) {
        if (j == k) continue;
        int d = j - k;
        double sign = (d % 2 == 0) ? 1.0 : -1.0;
        D1_(j, k) = 0.5 * sign / std::tan(0.5 * d * kTwoPi / N_);
      }
  }

  int n_, N_, size_;
  MatrixXd D1_;
};

/// Interpolating trigonometric polynomial of a grid-sampled field; used to
/// evaluate immersions and deformation potentials between grid nodes.
/// Negligible coefficients are pruned after the transform, so evaluation
/// cost scales with the effective spectral support of the field.
class TrigSeries {
public:
  TrigSeries() = default;

  TrigSeries(const PeriodicGrid& grid, const VectorXd& samples)
      : n_(grid.dim()), N_(grid.pointsPerAxis()) {
    const int size = grid.size();
    std::vector<std::complex<double>> cplx(size);
    double top = 0.0;
    // direct DFT; grids here are tiny (N <= 64)
    for (int k = 0; k < size; ++k) {
      VectorXi kv = grid.multiIndex(k);
      std::complex<double> acc = 0.0;
      for (int j = 0; j < size; ++j) {
        VectorXi jv = grid.multiIndex(j);
        double phase = 0.0;
        for (int a = 0; a < n_; ++a)
          phase += kTwoPi * freq(kv[a]) * jv[a] / N_;
        acc += samples[j] * std::exp(std::complex<double>(0.0, -phase));
      }
      cplx[k] = acc / double(size);
      top = std::max(top, std::abs(cplx[k]));
    }
    const double cut = 1e-15 * (1.0 + top);
    for (int k = 0; k < size; ++k) {
      if (std::abs(cplx[k]) <= cut) continue;
      Entry e;
      e.coeff = cplx[k];
      e.f.resize(n_);
      e.nyq.resize(n_);
      VectorXi kv = grid.multiIndex(k);
      for (int a = 0; a < n_; ++a) {
        e.nyq[a] = (kv[a] == N_ / 2);
        e.f[a] = e.nyq[a] ? 0 : freq(kv[a]);
      }
      entries_.push_back(std::move(e));
    }
  }

  double value(const VectorXd& theta) const {
    std::complex<double> acc = 0.0;
    for (const auto& e : entries_) {
      double cosprod = 1.0;
      double phase = 0.0;
      for (int a = 0; a < n_; ++a) {
        if (e.nyq[a]) cosprod *= std::cos(0.5 * N_ * theta[a]);
        else phase += e.f[a] * theta[a];
      }
      acc += e.coeff * cosprod * std::exp(std::complex<double>(0.0, phase));
    }
    return acc.real();
  }

  double deriv(const VectorXd& theta, int axis) const {
    std::complex<double> acc = 0.0;
    for (const auto& e : entries_) {
      if (e.nyq[axis]) continue;  // Nyquist drops out of derivatives
      double cosprod = 1.0;
      double phase = 0.0;
      for (int a = 0; a < n_; ++a) {
        if (e.nyq[a]) cosprod *= std::cos(0.5 * N_ * theta[a]);
        else phase += e.f[a] * theta[a];
      }
      acc += e.coeff * cosprod * std::complex<double>(0.0, e.f[axis]) *
             std::exp(std::complex<double>(0.0, phase));
    }
    return acc.real();
  }

  double deriv2(const VectorXd& theta, int a1, int a2) const {
    std::complex<double> acc = 0.0;
    for (const auto& e : entries_) {
      if (e.nyq[a1] || e.nyq[a2]) continue;
      double cosprod = 1.0;
      double phase = 0.0;
      for (int a = 0; a < n_; ++a) {
        if (e.nyq[a]) cosprod *= std::cos(0.5 * N_ * theta[a]);
        else phase += e.f[a] * theta[a];
      }
      acc += e.coeff * (-double(e.f[a1]) * double(e.f[a2])) *
             cosprod * std::exp(std::complex<double>(0.0, phase));
    }
    return acc.real();
  }

private:
  int freq(int k) const { return (k <= N_ / 2) ? k : k - N_; }

  struct Entry {
    std::complex<double> coeff;
    std::vector<int> f;
    std::vector<char> nyq;
  };

  int n_ = 0, N_ = 0;
  std::vector<Entry> entries_;
};

/// Real Fourier basis on T^n, modes |xi|_inf <= m. Enumerates the constant,
/// then cos/sin pairs over a canonical half lattice; total (2m+1)^n fields.
struct FourierBasis {
  struct Mode {
    VectorXi xi;
    bool is_sin;  // false: cos<xi,theta> (xi=0 -> constant 1)
  };

  FourierBasis(const PeriodicGrid& grid, int max_mode) : grid(&grid), m(max_mode) {
    if (grid.pointsPerAxis() < 2 * m + 2)
      throw QuadratureUnderResolved("grid N < 2m+2");
    enumerate();
    buildSamples();
  }

  int size() const { return int(modes.size()); }

  const PeriodicGrid* grid;
  int m;
  std::vector<Mode> modes;
  MatrixXd samples;  // grid.size() x basis size

private:
  void enumerate() {
    const int n = grid->dim();
    std::vector<VectorXi> half;
    VectorXi xi = VectorXi::Constant(n, -m);
    const int total = int(std::pow(2 * m + 1, n));
    for (int it = 0; it < total; ++it) {
      // canonical half: first nonzero entry positive
      int firstnz = -1;
      for (int a = 0; a < n; ++a)
        if (xi[a] != 0) { firstnz = a; break; }
      if (firstnz >= 0 && xi[firstnz] > 0) half.push_back(xi);
      // increment
      for (int a = n - 1; a >= 0; --a) {
        if (xi[a] < m) { ++xi[a]; break; }
        xi[a] = -m;
      }
    }
    modes.push_back({VectorXi::Zero(n), false});
    for (const auto& h : half) {
      modes.push_back({h, false});
      modes.push_back({h, true});
    }
  }

  void buildSamples() {
    samples.resize(grid->size(), size());
    for (int j = 0; j < grid->size(); ++j) {
      VectorXd th = grid->node(j);
      for (int b = 0; b < size(); ++b) {
        double phase = 0.0;
        for (int a = 0; a < grid->dim(); ++a) phase += modes[b].xi[a] * th[a];
        samples(j, b) = modes[b].is_sin ? std::sin(phase) : std::cos(phase);
      }
    }
  }
};

}  // namespace hslag
