#pragma once

// Experiment configuration: a single JSON document per run, schema-checked
// before any geometry is constructed. Unknown keys anywhere in the document
// are rejected so that typos cannot silently change an experiment.

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslag/errors.hpp"

namespace hslag {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown(const json& block, const std::string& where,
                           const std::set<std::string>& allowed) {
  if (!block.is_object())
    throw ConfigInvalid(where + " must be an object");
  for (auto it = block.begin(); it != block.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigInvalid("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
T get_or(const json& block, const std::string& key, T fallback) {
  if (!block.contains(key)) return fallback;
  try {
    return block.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigInvalid("key '" + key + "' has the wrong type");
  }
}

inline std::vector<double> get_vec(const json& block, const std::string& key) {
  return get_or<std::vector<double>>(block, key, {});
}

}  // namespace detail

struct PerturbationConfig {
  std::string type = "none";  // none | tilted_stretch | bump_quartic_path
  double eps = 0.02;
  double tilt = 0.3;
  double s = 0.05;  // path parameter for bump_quartic_path
};

struct ManifoldConfig {
  std::string backend;  // flat_torus | toric | projective | sphere | ellipsoid
  int dim = 2;          // flat torus chart dimension
  int n = 1;            // projective / simplex dimension
  double scale = 1.0;
  double a = 1.0, c = 1.2;  // ellipsoid semi-axes
  PerturbationConfig perturbation;
};

struct LagrangianConfig {
  std::string type;  // moment_fiber | flat_fiber | product_torus |
                     // latitude_circle | parallels_family
  std::vector<double> x0, y0, radii;
  double u0 = 0.0;
  double K = 0.1;  // family radius
};

struct DiscretizationConfig {
  int N = 32;
  int m = -1;  // -1: default truncation N/2 - 1
  double fd_step = 1e-4;
};

struct ToleranceConfig {
  double residual_tol = 1e-8;
  double hslag_tol = 1e-6;
  double grad_tol = 1e-7;
  int max_iter = 25;
  double kernel_tol = -1.0;
};

struct OutputConfig {
  bool emit_plot_data = true;
  std::string prefix = "run";
};

struct ExperimentConfig {
  std::string task;
  ManifoldConfig manifold;
  LagrangianConfig lagrangian;
  DiscretizationConfig discretization;
  ToleranceConfig tolerance;
  OutputConfig output;
  std::vector<double> s_list = {0.0, 0.02, 0.05, 0.1};
  json raw;  // canonical echo for hashing
};

inline ExperimentConfig parse_config(const json& doc) {
  detail::reject_unknown(doc, "config",
                         {"task", "manifold", "lagrangian", "discretization",
                          "tolerance", "output", "s_list"});
  if (!doc.contains("task")) throw ConfigInvalid("missing key 'task'");
  if (!doc.contains("manifold")) throw ConfigInvalid("missing key 'manifold'");

  ExperimentConfig cfg;
  cfg.raw = doc;
  cfg.task = doc.at("task").get<std::string>();
  static const std::set<std::string> tasks = {
      "validate",  "hslag-check", "spectrum",     "rigidity",
      "deform",    "fibrate",     "perturb-path", "positivity"};
  if (!tasks.count(cfg.task)) throw ConfigInvalid("unknown task " + cfg.task);

  const json& m = doc.at("manifold");
  detail::reject_unknown(m, "manifold",
                         {"backend", "dim", "n", "scale", "a", "c",
                          "perturbation"});
  if (!m.contains("backend"))
    throw ConfigInvalid("missing key 'manifold.backend'");
  cfg.manifold.backend = m.at("backend").get<std::string>();
  cfg.manifold.dim = detail::get_or(m, "dim", cfg.manifold.dim);
  cfg.manifold.n = detail::get_or(m, "n", cfg.manifold.n);
  cfg.manifold.scale = detail::get_or(m, "scale", cfg.manifold.scale);
  cfg.manifold.a = detail::get_or(m, "a", cfg.manifold.a);
  cfg.manifold.c = detail::get_or(m, "c", cfg.manifold.c);
  if (m.contains("perturbation")) {
    const json& p = m.at("perturbation");
    detail::reject_unknown(p, "manifold.perturbation",
                           {"type", "eps", "tilt", "s"});
    cfg.manifold.perturbation.type =
        detail::get_or<std::string>(p, "type", "none");
    cfg.manifold.perturbation.eps =
        detail::get_or(p, "eps", cfg.manifold.perturbation.eps);
    cfg.manifold.perturbation.tilt =
        detail::get_or(p, "tilt", cfg.manifold.perturbation.tilt);
    cfg.manifold.perturbation.s =
        detail::get_or(p, "s", cfg.manifold.perturbation.s);
  }

  if (doc.contains("lagrangian")) {
    const json& l = doc.at("lagrangian");
    detail::reject_unknown(l, "lagrangian",
                           {"type", "x0", "y0", "radii", "u0", "K"});
    cfg.lagrangian.type = detail::get_or<std::string>(l, "type", "");
    cfg.lagrangian.x0 = detail::get_vec(l, "x0");
    cfg.lagrangian.y0 = detail::get_vec(l, "y0");
    cfg.lagrangian.radii = detail::get_vec(l, "radii");
    cfg.lagrangian.u0 = detail::get_or(l, "u0", cfg.lagrangian.u0);
    cfg.lagrangian.K = detail::get_or(l, "K", cfg.lagrangian.K);
  } else if (cfg.task != "validate") {
    throw ConfigInvalid("missing key 'lagrangian'");
  }

  if (doc.contains("discretization")) {
    const json& d = doc.at("discretization");
    detail::reject_unknown(d, "discretization", {"N", "m", "fd_step"});
    cfg.discretization.N = detail::get_or(d, "N", cfg.discretization.N);
    cfg.discretization.m = detail::get_or(d, "m", cfg.discretization.m);
    cfg.discretization.fd_step =
        detail::get_or(d, "fd_step", cfg.discretization.fd_step);
  }
  if (doc.contains("tolerance")) {
    const json& t = doc.at("tolerance");
    detail::reject_unknown(
        t, "tolerance",
        {"residual_tol", "hslag_tol", "grad_tol", "max_iter", "kernel_tol"});
    cfg.tolerance.residual_tol =
        detail::get_or(t, "residual_tol", cfg.tolerance.residual_tol);
    cfg.tolerance.hslag_tol =
        detail::get_or(t, "hslag_tol", cfg.tolerance.hslag_tol);
    cfg.tolerance.grad_tol =
        detail::get_or(t, "grad_tol", cfg.tolerance.grad_tol);
    cfg.tolerance.max_iter =
        detail::get_or(t, "max_iter", cfg.tolerance.max_iter);
    cfg.tolerance.kernel_tol =
        detail::get_or(t, "kernel_tol", cfg.tolerance.kernel_tol);
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    detail::reject_unknown(o, "output", {"emit_plot_data", "prefix"});
    cfg.output.emit_plot_data =
        detail::get_or(o, "emit_plot_data", cfg.output.emit_plot_data);
    cfg.output.prefix = detail::get_or<std::string>(o, "prefix", "run");
  }
  if (doc.contains("s_list"))
    cfg.s_list = doc.at("s_list").get<std::vector<double>>();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot read config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace hslag
