#include "vbdm/analytic.hpp"
#include "vbdm/density.hpp"
#include "vbdm/errors.hpp"
#include "vbdm/harness.hpp"
#include "vbdm/kernel.hpp"
#include "vbdm/spectral.hpp"
#include "vbdm/tuning.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool with_out) {
  sub->add_option("--config", c.config, "key = value configuration file");
  sub->add_option("--set", c.sets, "override one key, key=value")->take_all();
  if (with_out) sub->add_option("--out", c.out, "output file");
}

vbdm::ExperimentConfig load_config(const Common& c) {
  vbdm::ExperimentConfig cfg;
  if (!c.config.empty()) cfg.load_file(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw vbdm::Error(vbdm::ErrorCode::InvalidArgument, "--set expects key=value");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

double single_eps(const vbdm::ExperimentConfig& cfg, const vbdm::PreparedCloud& pc) {
  if (cfg.eps == "auto" || cfg.eps == "sweep") {
    const auto curve = vbdm::s_curve(*pc.cloud, pc.bandwidth.rho, cfg.tune_lo, cfg.tune_hi,
                                     vbdm::tuning_support(pc));
    return vbdm::select_epsilon(curve).eps_star;
  }
  return vbdm::parse_eps_list(cfg.eps).front();
}

std::string need_out(const Common& c, const std::string& fallback) { return c.out.empty() ? fallback : c.out; }

void print_table(const vbdm::ResultTable& t) {
  std::printf("eps,mse,eig_err,wall_time_s\n");
  for (const auto& r : t.rows) std::printf("%.6e,%.6e,%.6e,%.3f\n", r.eps, r.mse, r.eig_err, r.wall_time_s);
  for (const auto& f : t.failures) std::printf("# eps=%.6e failed: %s\n", f.eps, f.message.c_str());
  for (const auto& [k, v] : t.meta)
    if (k.rfind("power_law", 0) == 0 || k == "eps_star" || k == "a_max" || k == "d_hat")
      std::printf("# %s = %s\n", k.c_str(), v.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-bandwidth diffusion kernels: generators, spectra and experiments"};
  app.require_subcommand(1);
  Common generate, density, build, eigs, tune, opcheck, experiment;
  std::string matrix = "Lhat";
  auto* g = app.add_subcommand("generate", "write the experiment's point cloud as CSV");
  add_common(g, generate, true);
  auto* d = app.add_subcommand("density", "pilot bandwidth, KDE and final bandwidth as CSV");
  add_common(d, density, true);
  auto* b = app.add_subcommand("build", "assemble one matrix of the normalization cascade as i,j,value triples");
  add_common(b, build, true);
  b->add_option("--matrix", matrix, "K, Kalpha or Lhat")->check(CLI::IsMember({"K", "Kalpha", "Lhat"}));
  auto* e = app.add_subcommand("eigs", "eigenpairs near zero at one eps");
  add_common(e, eigs, true);
  auto* t = app.add_subcommand("tune", "S(eps) tuning curve, eps selection and dimension estimate");
  add_common(t, tune, true);
  auto* o = app.add_subcommand("operator-check", "pointwise operator estimate against its closed form");
  add_common(o, opcheck, false);
  auto* x = app.add_subcommand("experiment", "full experiment over an eps sweep");
  add_common(x, experiment, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 1;
  }

  vbdm::ExperimentConfig cfg;
  const Common* common = nullptr;
  for (auto [sub, c] : {std::pair{g, &generate}, {d, &density}, {b, &build}, {e, &eigs}, {t, &tune}, {o, &opcheck},
                        {x, &experiment}})
    if (sub->parsed()) common = c;
  try {
    cfg = load_config(*common);
    if (o->parsed() && cfg.experiment != "torus_operator" && cfg.experiment != "circle_operator")
      cfg.experiment = "circle_operator";
  } catch (const vbdm::Error& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 1;
  }

  try {
    if (g->parsed()) {
      const auto cloud = vbdm::make_experiment_cloud(cfg);
      vbdm::write_cloud_csv(cloud, need_out(generate, "cloud.csv"));
      return 0;
    }
    if (o->parsed() || x->parsed()) {
      const auto table = vbdm::run_experiment(cfg);
      print_table(table);
      return 0;
    }
    const auto cloud = vbdm::make_experiment_cloud(cfg);
    const auto pc = vbdm::prepare(cfg, cloud);
    if (d->parsed()) {
      vbdm::write_bandwidth_csv(pc.bandwidth, need_out(density, "bandwidth.csv"));
      std::printf("eps0 = %.17g\nd = %d\n", pc.bandwidth.eps0, pc.bandwidth.d);
      return 0;
    }
    if (t->parsed()) {
      const auto curve = vbdm::s_curve(cloud, pc.bandwidth.rho, cfg.tune_lo, cfg.tune_hi,
                                       vbdm::tuning_support(pc));
      vbdm::write_tuning_csv(curve, need_out(tune, "tuning.csv"));
      const auto ch = vbdm::select_epsilon(curve);
      std::printf("eps_star = %.17g\na_max = %.17g\nd_hat = %.17g\n", ch.eps_star, ch.a_max, ch.d_hat);
      return 0;
    }
    const double eps = single_eps(cfg, pc);
    const auto gm = vbdm::build_generator(cloud, pc.bandwidth.rho, eps, pc.alpha, pc.d, pc.support, b->parsed());
    if (b->parsed()) {
      const auto& m = matrix == "K" ? gm.K : matrix == "Kalpha" ? gm.Kalpha : gm.Lhat;
      m.write_triples(need_out(build, matrix + ".csv"));
      std::printf("eps = %.17g\nnnz = %ld\n", eps, m.pattern().nnz());
      return 0;
    }
    vbdm::EigsOptions eo;
    eo.mode = vbdm::parse_solver_mode(cfg.solver);
    eo.sigma = cfg.sigma;
    eo.tol = cfg.tol;
    const int M = cfg.eigenfunctions > 0 ? cfg.eigenfunctions : 6;
    const auto sp = vbdm::scale_sqrtN(vbdm::eigs_near_zero(gm, M, eo));
    const Eigen::MatrixXd* lat = cloud.latent() ? &*cloud.latent() : nullptr;
    vbdm::write_spectrum_csv(sp, need_out(eigs, "spectrum.csv"), lat);
    std::printf("eps = %.17g\n", eps);
    for (long c = 0; c < sp.eigenvalues.size(); ++c) std::printf("lambda_%ld = %.12g\n", c, sp.eigenvalues[c]);
    return 0;
  } catch (const vbdm::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
