#pragma once

// Immersion snapshots: CSV (grid index + chart coordinates) and JSON
// (winding matrix + Fourier coefficients of the periodic part). The JSON
// form round-trips losslessly.

#include <complex>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "hslag/lagrangian/immersion.hpp"

namespace hslag {

inline void write_immersion_csv(const TorusImmersion& ell, std::ostream& os) {
  const auto& grid = ell.grid();
  os << "flat_index";
  for (int a = 0; a < grid.dim(); ++a) os << ",k" << a;
  for (int c = 0; c < ell.chartDim(); ++c) os << ",p" << c;
  os << "\r\n";
  os << std::setprecision(17);
  for (int j = 0; j < grid.size(); ++j) {
    os << j;
    VectorXi k = grid.multiIndex(j);
    for (int a = 0; a < grid.dim(); ++a) os << "," << k[a];
    VectorXd p = ell.nodeValue(j);
    for (int c = 0; c < ell.chartDim(); ++c) os << "," << p[c];
    os << "\r\n";
  }
}

namespace detail {

// forward/inverse DFT of one periodic-part column (grids are tiny)
inline std::vector<std::complex<double>> dft(const PeriodicGrid& grid,
                                             const VectorXd& samples) {
  const int sz = grid.size(), n = grid.dim(), N = grid.pointsPerAxis();
  std::vector<std::complex<double>> out(sz);
  for (int k = 0; k < sz; ++k) {
    VectorXi kv = grid.multiIndex(k);
    std::complex<double> acc = 0.0;
    for (int j = 0; j < sz; ++j) {
      VectorXi jv = grid.multiIndex(j);
      double phase = 0.0;
      for (int a = 0; a < n; ++a) phase += kTwoPi * kv[a] * jv[a] / N;
      acc += samples[j] * std::exp(std::complex<double>(0.0, -phase));
    }
    out[k] = acc / double(sz);
  }
  return out;
}

inline VectorXd idft(const PeriodicGrid& grid,
                     const std::vector<std::complex<double>>& coeff) {
  const int sz = grid.size(), n = grid.dim(), N = grid.pointsPerAxis();
  VectorXd out(sz);
  for (int j = 0; j < sz; ++j) {
    VectorXi jv = grid.multiIndex(j);
    std::complex<double> acc = 0.0;
    for (int k = 0; k < sz; ++k) {
      VectorXi kv = grid.multiIndex(k);
      double phase = 0.0;
      for (int a = 0; a < n; ++a) phase += kTwoPi * kv[a] * jv[a] / N;
      acc += coeff[k] * std::exp(std::complex<double>(0.0, phase));
    }
    out[j] = acc.real();
  }
  return out;
}

}  // namespace detail

inline nlohmann::json immersion_to_json(const TorusImmersion& ell) {
  nlohmann::json j;
  j["n"] = ell.fiberDim();
  j["N"] = ell.grid().pointsPerAxis();
  j["chart_dim"] = ell.chartDim();
  j["winding"] = nlohmann::json::array();
  for (int c = 0; c < ell.chartDim(); ++c) {
    std::vector<double> row(ell.fiberDim());
    for (int a = 0; a < ell.fiberDim(); ++a) row[a] = ell.winding()(c, a);
    j["winding"].push_back(row);
  }
  j["coefficients"] = nlohmann::json::array();
  for (int c = 0; c < ell.chartDim(); ++c) {
    auto coeff = detail::dft(ell.grid(), ell.periodicPart().col(c));
    nlohmann::json col = nlohmann::json::array();
    for (const auto& z : coeff) col.push_back({z.real(), z.imag()});
    j["coefficients"].push_back(col);
  }
  return j;
}

inline TorusImmersion immersion_from_json(
    std::shared_ptr<const ChartedManifold> M, const nlohmann::json& j) {
  const int n = j.at("n"), N = j.at("N"), cd = j.at("chart_dim");
  auto grid = std::make_shared<PeriodicGrid>(n, N);
  MatrixXd W(cd, n);
  for (int c = 0; c < cd; ++c)
    for (int a = 0; a < n; ++a) W(c, a) = j.at("winding")[c][a];
  MatrixXd P(grid->size(), cd);
  for (int c = 0; c < cd; ++c) {
    std::vector<std::complex<double>> coeff(grid->size());
    for (int k = 0; k < grid->size(); ++k) {
      const auto& z = j.at("coefficients")[c][k];
      coeff[k] = {z[0], z[1]};
    }
    P.col(c) = detail::idft(*grid, coeff);
  }
  return TorusImmersion(std::move(M), std::move(grid), W, P);
}

}  // namespace hslag
