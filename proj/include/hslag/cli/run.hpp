#pragma once

// Task dispatch: build the configured scene, run the named experiment, and
// assemble a RunReport. Pure library code so the tests can drive it without
// spawning processes; the binary in tools/ is a thin wrapper.

#include <algorithm>
#include <chrono>
#include <memory>
#include <string>

#include "hslag/cli/config.hpp"
#include "hslag/cli/report.hpp"
#include "hslag/deform/orbit.hpp"
#include "hslag/deform/variation.hpp"
#include "hslag/geometry/flat_torus.hpp"
#include "hslag/geometry/projective_space.hpp"
#include "hslag/geometry/surface_revolution.hpp"
#include "hslag/geometry/toric_manifold.hpp"
#include "hslag/jacobi/box.hpp"
#include "hslag/lagrangian/families.hpp"

namespace hslag {

struct Scene {
  std::shared_ptr<const ChartedManifold> reference;
  std::shared_ptr<const ChartedManifold> structure;  // possibly perturbed
  std::shared_ptr<const FlatTorus> flat;
  std::shared_ptr<const ToricManifold> toric;
  std::shared_ptr<const SurfaceOfRevolution> surface;
  std::shared_ptr<const ProjectiveSpace> projective;
};

namespace detail {

inline Scene build_manifold(const ManifoldConfig& m) {
  Scene s;
  if (m.backend == "flat_torus") {
    s.flat = std::make_shared<FlatTorus>(m.dim);
    s.reference = s.flat;
  } else if (m.backend == "toric") {
    s.toric = std::make_shared<ToricManifold>(LabelledPolytope::simplex(m.n));
    s.reference = s.toric;
  } else if (m.backend == "projective") {
    s.projective = std::make_shared<ProjectiveSpace>(m.n, m.scale);
    s.reference = s.projective;
  } else if (m.backend == "sphere") {
    s.surface = std::make_shared<SurfaceOfRevolution>(
        SurfaceOfRevolution::sphere(m.a));
    s.reference = s.surface;
  } else if (m.backend == "ellipsoid") {
    s.surface = std::make_shared<SurfaceOfRevolution>(
        SurfaceOfRevolution::ellipsoid(m.a, m.c));
    s.reference = s.surface;
  } else {
    throw ConfigInvalid("unknown manifold.backend " + m.backend);
  }
  s.structure = s.reference;
  return s;
}

inline TorusImmersion build_lagrangian(const Scene& s,
                                       const LagrangianConfig& l, int N) {
  auto to_vec = [](const std::vector<double>& v) {
    return Eigen::Map<const VectorXd>(v.data(), v.size()).eval();
  };
  if (l.type == "moment_fiber") {
    if (!s.toric) throw ConfigInvalid("moment_fiber needs a toric backend");
    if (l.x0.empty()) throw ConfigInvalid("moment_fiber needs x0");
    return moment_fiber(s.toric, to_vec(l.x0), N);
  }
  if (l.type == "flat_fiber") {
    if (!s.flat) throw ConfigInvalid("flat_fiber needs a flat_torus backend");
    if (l.y0.empty()) throw ConfigInvalid("flat_fiber needs y0");
    return flat_fiber(s.flat, to_vec(l.y0), N);
  }
  if (l.type == "product_torus") {
    if (!s.flat)
      throw ConfigInvalid("product_torus needs a flat_torus backend");
    if (l.radii.empty()) throw ConfigInvalid("product_torus needs radii");
    return product_torus(s.flat, to_vec(l.radii), N);
  }
  if (l.type == "latitude_circle" || l.type == "parallels_family") {
    if (!s.surface)
      throw ConfigInvalid(l.type + " needs a surface backend");
    return latitude_circle(s.surface, l.u0, N);
  }
  if (l.type == "clifford") {
    if (!s.projective)
      throw ConfigInvalid("clifford needs a projective backend");
    const int n = s.projective->dim() / 2;
    auto grid = std::make_shared<PeriodicGrid>(n, N);
    MatrixXd W = MatrixXd::Zero(2 * n, n);
    return TorusImmersion::fromFunction(
        s.projective, std::move(grid), W, [n](const VectorXd& th) {
          VectorXd p(2 * n);
          for (int i = 0; i < n; ++i) {
            p[2 * i] = std::cos(th[i]);
            p[2 * i + 1] = std::sin(th[i]);
          }
          return p;
        });
  }
  throw ConfigInvalid("unknown lagrangian.type " + l.type);
}

inline void apply_perturbation(Scene& s, const PerturbationConfig& p,
                               const TorusImmersion& ell) {
  if (p.type == "none") return;
  if (p.type == "tilted_stretch") {
    if (!s.surface)
      throw ConfigInvalid("tilted_stretch needs a surface backend");
    s.structure = std::make_shared<PerturbedManifold>(
        s.reference, tilted_stretch(s.surface, p.eps, p.tilt),
        "tilted_stretch");
    return;
  }
  if (p.type == "bump_quartic_path") {
    ScalarField phi = bump_quartic_potential(ell);
    PerturbationPath path =
        integrate_positive_path(s.reference, phi, std::max(p.s, 0.1));
    s.structure = path.at(p.s);
    return;
  }
  throw ConfigInvalid("unknown perturbation.type " + p.type);
}

}  // namespace detail

inline RunReport run(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.task = cfg.task;
  auto t_start = std::chrono::steady_clock::now();
  try {
    Scene scene = detail::build_manifold(cfg.manifold);
    const int N = cfg.discretization.N;
    const int m = cfg.discretization.m;

    if (cfg.task == "validate") {
      rep.verdicts["manifold_ok"] = true;
      if (!cfg.lagrangian.type.empty()) {
        TorusImmersion ell =
            detail::build_lagrangian(scene, cfg.lagrangian, N);
        double defect = ell.lagrangianDefect();
        rep.scalars["lagrangian_defect"] = defect;
        rep.verdicts["lagrangian_ok"] = defect < 1e-8;
      }
    } else {
      TorusImmersion ell = detail::build_lagrangian(scene, cfg.lagrangian, N);
      detail::apply_perturbation(scene, cfg.manifold.perturbation, ell);
      TorusImmersion ell_s = rebase(ell, scene.structure);

      if (cfg.task == "hslag-check") {
        MaslovData md = mean_curvature(ell_s);
        rep.scalars["sup_residual"] = md.sup_residual;
        rep.scalars["l2_residual"] = md.l2_residual;
        rep.scalars["volume"] = md.volume;
        rep.verdicts["stationary"] =
            md.sup_residual < cfg.tolerance.residual_tol;
      } else if (cfg.task == "spectrum") {
        BoxOperator op = assemble_box(ell_s, m);
        SpectralReport sp = spectrum(op, cfg.tolerance.kernel_tol);
        rep.scalars["kernel_dimension"] = sp.kernel_dimension;
        rep.scalars["asymmetry"] = sp.asymmetry;
        Table t;
        t.columns = {"index", "eigenvalue"};
        for (int i = 0; i < sp.eigenvalues.size(); ++i)
          t.rows.push_back({double(i), sp.eigenvalues[i]});
        rep.tables["spectrum"] = t;
        rep.verdicts["selfadjoint"] = sp.asymmetry < 1e-6;
      } else if (cfg.task == "rigidity") {
        BoxOperator op = assemble_box(ell_s, m);
        SpectralReport sp = spectrum(op, cfg.tolerance.kernel_tol);
        RigidityReport rr = rigidity_check(ell_s, op, sp);
        StabilityReport st = stability_check(sp);
        rep.scalars["kernel_dimension"] = sp.kernel_dimension;
        rep.scalars["ambient_rank"] = rr.rank;
        rep.scalars["stability_margin"] = st.margin;
        rep.verdicts["rigid"] = rr.rigid;
        rep.verdicts["stable"] = st.stable;
      } else if (cfg.task == "deform") {
        RelativeHslagProblem prob;
        prob.structure = scene.structure;
        prob.seed = ell;
        prob.obstruction_potentials = scene.reference->killingPotentials();
        prob.residual_tol = cfg.tolerance.residual_tol;
        prob.max_iter = cfg.tolerance.max_iter;
        prob.box_m = m;
        GroupBasis gb =
            orbit_group(ell_s, scene.reference->killingPotentials());
        OrbitOptions opt;
        opt.grad_tol = cfg.tolerance.grad_tol;
        opt.hslag_tol = cfg.tolerance.hslag_tol;
        OrbitMinimum min = minimize_over_orbit(prob, gb, opt);
        rep.scalars["volume"] = min.volume;
        rep.scalars["u_norm"] = min.u.norm();
        rep.scalars["grad_norm"] = min.grad_norm;
        rep.scalars["residual_sup"] = min.residual_sup;
        rep.scalars["curvature_spread"] = curvature_spread(min.ell);
        Table t;
        t.columns = {"index", "hessian_eigenvalue"};
        for (int i = 0; i < min.hessian_eigenvalues.size(); ++i)
          t.rows.push_back({double(i), min.hessian_eigenvalues[i]});
        rep.tables["hessian"] = t;
        rep.verdicts["nondegenerate"] = min.nondegenerate;
        rep.verdicts["stationary"] =
            min.residual_sup < cfg.tolerance.hslag_tol;
      } else if (cfg.task == "fibrate") {
        LagrangianFamily fam;
        if (scene.surface)
          fam = parallels_family(scene.surface, cfg.lagrangian.u0,
                                 cfg.lagrangian.K, N);
        else
          fam = fibration_seed(ell, cfg.lagrangian.K);
        std::vector<VectorXd> grid;
        const int half = 3;
        for (int i = -half; i <= half; ++i)
          grid.push_back(VectorXd::Constant(
              fam.parameters, 0.6 * cfg.lagrangian.K * i / half));
        std::rotate(grid.begin(), grid.begin() + half, grid.end());
        OrbitOptions opt;
        opt.grad_tol = cfg.tolerance.grad_tol;
        opt.hslag_tol = cfg.tolerance.hslag_tol;
        ContinuationResult res = continuation(
            scene.structure, fam, grid,
            scene.reference->killingPotentials(), opt,
            cfg.tolerance.residual_tol);
        Table t;
        t.columns = {"t_norm", "volume", "residual_sup", "curvature_spread"};
        for (size_t i = 0; i < res.fibers.size(); ++i)
          t.rows.push_back({res.t[i].norm(), res.volume[i],
                            res.residual_sup[i], res.spread[i]});
        rep.tables["fibration"] = t;
        rep.scalars["delta"] = res.delta;
        rep.scalars["fibers"] = double(res.fibers.size());
        rep.verdicts["complete"] = res.stop_reason.empty();
        rep.verdicts["nonempty"] = !res.fibers.empty();
      } else if (cfg.task == "perturb-path") {
        ScalarField phi = bump_quartic_potential(ell);
        double smax = 0.0;
        for (double s : cfg.s_list) smax = std::max(smax, s);
        PerturbationPath path =
            integrate_positive_path(scene.reference, phi,
                                    std::max(smax, 0.1));
        double v0 = induced_geometry(ell).volume;
        Table t;
        t.columns = {"s", "volume", "sup_residual"};
        bool ok = true;
        for (double s : cfg.s_list) {
          TorusImmersion on_s = rebase(ell, path.at(s));
          MaslovData md = mean_curvature(on_s);
          t.rows.push_back({s, md.volume, md.sup_residual});
          ok = ok && std::abs(md.volume - v0) < 1e-8 &&
               md.sup_residual < 1e-7;
        }
        rep.tables["path"] = t;
        rep.verdicts["seed_stationary_along_path"] = ok;
      } else if (cfg.task == "positivity") {
        ScalarField phi = bump_quartic_potential(ell);
        double smax = 0.0;
        for (double s : cfg.s_list) smax = std::max(smax, s);
        PerturbationPath path = integrate_positive_path(
            scene.reference, phi, std::max(smax, 0.1));
        auto pots = scene.reference->killingPotentials();
        Table t;
        t.columns = {"subgroup", "s", "second_derivative"};
        bool ok = true;
        int transverse = 0;
        for (size_t k = 0; k < pots.size(); ++k) {
          PositivityReport pr;
          try {
            pr = positivity_experiment(ell, path, cfg.s_list, pots[k]);
          } catch (const NonTransverseSubgroup&) {
            continue;
          }
          ++transverse;
          for (size_t i = 0; i < pr.s.size(); ++i) {
            t.rows.push_back(
                {double(k), pr.s[i], pr.second_derivative[i]});
            if (pr.s[i] == 0.0)
              ok = ok && std::abs(pr.second_derivative[i]) < 1e-7;
            else
              ok = ok && pr.second_derivative[i] > 0.0;
          }
        }
        rep.tables["positivity"] = t;
        rep.scalars["transverse_subgroups"] = transverse;
        rep.verdicts["positive"] = ok && transverse > 0;
      }
    }
    rep.pass = true;
    for (const auto& [k, v] : rep.verdicts) rep.pass = rep.pass && v;
  } catch (const ConfigInvalid&) {
    throw;  // config problems are the caller's error, not a verdict
  } catch (const Error& e) {
    rep.pass = false;
    rep.error_code = e.code();
    rep.error_what = e.what();
  }
  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    t_start)
          .count();
  finalize_hashes(rep, cfg.raw);
  return rep;
}

/// File-level driver used by the binary: returns the process exit code.
/// 0 = verdict pass, 2 = verdict fail, 1 = error (config or module).
inline int run_file(const std::string& config_path,
                    const std::string& out_dir) {
  RunReport rep;
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    rep = run(cfg);
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / (cfg.output.prefix + "_report.json"));
    os << report_json(rep).dump(2) << "\n";
  }
  if (cfg.output.emit_plot_data) emit_plot_data(rep, dir, cfg.output.prefix);
  if (!rep.error_code.empty()) {
    std::fprintf(stderr, "%s\n", rep.error_what.c_str());
    return 1;
  }
  return rep.pass ? 0 : 2;
}

}  // namespace hslag
