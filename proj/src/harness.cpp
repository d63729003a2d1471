#include "vbdm/harness.hpp"

#include "vbdm/analytic.hpp"
#include "vbdm/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace vbdm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad number for " + key + ": '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw Error(ErrorCode::InvalidArgument, "expected an integer for " + key);
  return long(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::InvalidArgument, "bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string eps_tag(double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", eps);
  return buf;
}

const std::vector<std::string> kExperiments = {"ou1d_nice",       "ou1d_random",    "ou2d",           "circle",
                                               "circle_random",   "circle_uniform", "sphere",         "torus_operator",
                                               "circle_operator", "outlier_study"};

bool is_operator(const std::string& e) { return e == "torus_operator" || e == "circle_operator"; }
bool is_ou(const std::string& e) { return e.rfind("ou", 0) == 0; }
bool is_circle_exp(const std::string& e) { return e == "circle" || e == "circle_random" || e == "circle_uniform"; }

}  // namespace

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), v = trim(value_in);
  if (key == "experiment") {
    if (std::find(kExperiments.begin(), kExperiments.end(), v) == kExperiments.end())
      throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + v + "'");
    experiment = v;
  } else if (key == "N") N = to_long(key, v);
  else if (key == "preset") {
    preset_alpha_beta(v, 1);
    preset = v;
  } else if (key == "alpha") alpha = to_double(key, v);
  else if (key == "beta") beta = to_double(key, v);
  else if (key == "eps") {
    if (v != "sweep" && v != "auto") parse_eps_list(v);
    eps = v;
  } else if (key == "eps_min") eps_min = to_double(key, v);
  else if (key == "eps_max") eps_max = to_double(key, v);
  else if (key == "eps_count") eps_count = int(to_long(key, v));
  else if (key == "eps_multiplier") eps_multiplier = to_double(key, v);
  else if (key == "k_support") k_support = to_long(key, v);
  else if (key == "k0") k0 = int(to_long(key, v));
  else if (key == "seed") seed = std::uint64_t(to_long(key, v));
  else if (key == "eigenfunctions" || key == "M") eigenfunctions = int(to_long(key, v));
  else if (key == "d") d = int(to_long(key, v));
  else if (key == "output_dir") output_dir = v;
  else if (key == "input") input = v;
  else if (key == "solver") {
    parse_solver_mode(v);
    solver = v;
  } else if (key == "sigma") sigma = to_double(key, v);
  else if (key == "tol") tol = to_double(key, v);
  else if (key == "record_timing") record_timing = to_bool(key, v);
  else if (key == "write_eigvecs") write_eigvecs = to_bool(key, v);
  else if (key == "perturb") perturb = to_double(key, v);
  else if (key == "mask_radius") mask_radius = to_double(key, v);
  else if (key == "formulation") {
    parse_formulation(v);
    formulation = v;
  } else if (key == "sampling") {
    if (v != "uniform" && v != "vonmises") throw Error(ErrorCode::InvalidArgument, "sampling must be uniform or vonmises");
    sampling = v;
  } else if (key == "bandwidth") {
    if (v != "exp_cos" && v != "density") throw Error(ErrorCode::InvalidArgument, "bandwidth must be exp_cos or density");
    bandwidth = v;
  } else if (key == "outlier_N") {
    outlier_N.clear();
    for (const auto& t : split_commas(v)) outlier_N.push_back(to_long(key, t));
  } else if (key == "tune_lo") tune_lo = int(to_long(key, v));
  else if (key == "tune_hi") tune_hi = int(to_long(key, v));
  else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidArgument, path + ":" + std::to_string(lineno) + ": expected key = value");
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> e = {
      {"experiment", experiment},
      {"N", std::to_string(N)},
      {"preset", preset},
      {"alpha", alpha ? fmt(*alpha) : ""},
      {"beta", beta ? fmt(*beta) : ""},
      {"eps", eps},
      {"eps_min", fmt(eps_min)},
      {"eps_max", fmt(eps_max)},
      {"eps_count", std::to_string(eps_count)},
      {"eps_multiplier", fmt(eps_multiplier)},
      {"k_support", std::to_string(k_support)},
      {"k0", std::to_string(k0)},
      {"seed", std::to_string(seed)},
      {"eigenfunctions", std::to_string(eigenfunctions)},
      {"d", std::to_string(d)},
      {"output_dir", output_dir},
      {"input", input},
      {"solver", solver},
      {"sigma", fmt(sigma)},
      {"tol", fmt(tol)},
      {"record_timing", record_timing ? "true" : "false"},
      {"write_eigvecs", write_eigvecs ? "true" : "false"},
      {"perturb", fmt(perturb)},
      {"mask_radius", mask_radius ? fmt(*mask_radius) : ""},
      {"formulation", formulation},
      {"sampling", sampling},
      {"bandwidth", bandwidth},
      {"tune_lo", std::to_string(tune_lo)},
      {"tune_hi", std::to_string(tune_hi)},
  };
  std::string ns;
  for (size_t i = 0; i < outlier_N.size(); ++i) ns += (i ? "," : "") + std::to_string(outlier_N[i]);
  e.emplace_back("outlier_N", ns);
  return e;
}

const ResultRow* ResultTable::best() const {
  const ResultRow* b = nullptr;
  for (const auto& r : rows)
    if (!b || r.mse < b->mse) b = &r;
  return b;
}

AlphaBeta preset_alpha_beta(const std::string& preset, int d) {
  if (preset == "laplacian-vb") return {0.5 - d / 4.0, -0.5};
  if (preset == "gradientflow-vb") return {-d / 4.0, -0.5};
  if (preset == "laplacian-fixed") return {1.0, 0.0};
  if (preset == "gradientflow-fixed") return {0.5, 0.0};
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + preset + "'");
}

std::vector<double> parse_eps_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split_commas(s)) {
    const double x = to_double("eps", t);
    if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps values must be positive");
    if (!out.empty() && !(x > out.back())) throw Error(ErrorCode::InvalidArgument, "eps list must be strictly increasing");
    out.push_back(x);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty eps list");
  return out;
}

std::vector<double> default_sweep(const ExperimentConfig& cfg) {
  if (cfg.eps_count < 1 || !(cfg.eps_min > 0.0) || !(cfg.eps_max >= cfg.eps_min))
    throw Error(ErrorCode::InvalidArgument, "bad sweep bounds");
  std::vector<double> out(cfg.eps_count);
  const double a = std::log10(cfg.eps_min), b = std::log10(cfg.eps_max);
  for (int i = 0; i < cfg.eps_count; ++i) {
    const double t = cfg.eps_count == 1 ? 0.0 : double(i) / (cfg.eps_count - 1);
    out[i] = cfg.eps_multiplier * std::pow(10.0, a + t * (b - a));
  }
  return out;
}

PointCloud make_experiment_cloud(const ExperimentConfig& cfg) {
  const std::optional<int> dim = cfg.d > 0 ? std::optional<int>(cfg.d) : std::nullopt;
  if (!cfg.input.empty()) return read_cloud_csv(cfg.input, dim);
  const std::string& e = cfg.experiment;
  if (e == "ou1d_nice" || e == "outlier_study") return gen_gaussian_nice_1d(cfg.N);
  if (e == "ou1d_random") return gen_gaussian_random(cfg.N, 1, MatrixXd::Identity(1, 1), cfg.seed);
  if (e == "ou2d") return gen_gaussian_random(cfg.N, 2, MatrixXd::Identity(2, 2), cfg.seed);
  if (e == "circle") return gen_circle_nonuniform(cfg.N);
  if (e == "circle_random") return perturb_circle(gen_circle_nonuniform(cfg.N), cfg.perturb, cfg.seed);
  if (e == "circle_uniform") return gen_circle_uniform(cfg.N);
  if (e == "sphere") return gen_sphere_nonuniform(cfg.N, random_spd_covariance(3, cfg.seed), cfg.seed + 1);
  if (e == "torus_operator") return gen_torus_grid(std::lround(std::sqrt(double(cfg.N))));
  if (e == "circle_operator")
    return cfg.sampling == "vonmises" ? gen_circle_von_mises(cfg.N, cfg.seed) : gen_circle_uniform(cfg.N);
  throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + e + "'");
}

long default_k_support(const ExperimentConfig& cfg, long N) {
  if (cfg.k_support > 0) return std::min(cfg.k_support, N);
  if (cfg.experiment == "torus_operator") return std::min<long>(500, N);
  if (cfg.experiment == "outlier_study") return N <= 2000 ? N : (N <= 20000 ? 512 : 256);
  return std::min<long>(N, 128);
}

namespace {

AlphaBeta resolve_alpha_beta(const ExperimentConfig& cfg, int d) {
  std::string preset = cfg.preset;
  if (preset.empty()) {
    const std::string& e = cfg.experiment;
    if (is_ou(e)) preset = "gradientflow-vb";
    else if (e == "outlier_study") preset = "gradientflow-fixed";
    else preset = "laplacian-vb";
  }
  AlphaBeta ab = preset_alpha_beta(preset, d);
  if (is_operator(cfg.experiment) && cfg.preset.empty()) ab = {0.0, 0.0};
  if (cfg.alpha) ab.alpha = *cfg.alpha;
  if (cfg.beta) ab.beta = *cfg.beta;
  return ab;
}

}  // namespace

const SparsityPattern* tuning_support(const PreparedCloud& pc) {
  return pc.cloud->size() > kDenseKdeLimit ? pc.support.get() : nullptr;
}

PreparedCloud prepare(const ExperimentConfig& cfg, const PointCloud& cloud) {
  PreparedCloud pc;
  pc.cloud = std::make_shared<const PointCloud>(cloud);
  const long N = cloud.size();
  const long k = std::max<long>(default_k_support(cfg, N), std::min<long>(cfg.k0, N));
  {
    NeighborGraph graph = knn(cloud, int(k));
    pc.support = std::make_shared<const SparsityPattern>(symmetrized_support(graph));
    if (cfg.d > 0) pc.d = cfg.d;
    else if (cloud.intrinsic_dim()) pc.d = *cloud.intrinsic_dim();
    else {
      const auto curve = s_curve(cloud, VectorXd::Ones(N), cfg.tune_lo, cfg.tune_hi,
                                 tuning_support(pc));
      pc.d = round_dimension(select_epsilon(curve).d_hat);
    }
    const AlphaBeta ab = resolve_alpha_beta(cfg, pc.d);
    pc.alpha = ab.alpha;
    pc.bandwidth = build_bandwidth(cloud, graph, cfg.k0, ab.beta, pc.d, pc.support.get());
  }
  return pc;
}

namespace {

// Columns rescaled to norm sqrt(N).
MatrixXd normalized_columns(MatrixXd R) {
  const double target = std::sqrt(double(R.rows()));
  for (long c = 0; c < R.cols(); ++c) R.col(c) *= target / R.col(c).norm();
  return R;
}

struct EigenTask {
  int first = 1;           // first column of the aligned block
  MatrixXd reference;      // raw analytic values, one column per block member
  int measured = 0;        // block column whose mse is reported
  double eigenvalue = 0.0;
  std::optional<std::vector<long>> mask;
  bool sphere_lsq = false;
  int M = 5;
};

EigenTask eigen_task(const ExperimentConfig& cfg, const PointCloud& cloud) {
  EigenTask t;
  const std::string& e = cfg.experiment;
  const long N = cloud.size();
  if (e == "ou1d_nice" || e == "ou1d_random") {
    t.first = 3;
    t.reference = hermite(3, VectorXd(cloud.points().col(0)));
    t.eigenvalue = -3.0;
    t.M = 5;
  } else if (e == "ou2d") {
    t.first = 3;
    t.reference.resize(N, 3);
    t.reference.col(0) = ou2d_eigenfunction(2, 0, cloud.points());
    t.reference.col(1) = ou2d_eigenfunction(0, 2, cloud.points());
    t.reference.col(2) = ou2d_eigenfunction(1, 1, cloud.points());
    t.measured = 2;
    t.eigenvalue = -2.0;
    t.M = 6;
  } else if (is_circle_exp(e)) {
    const VectorXd theta = cloud.latent()->col(0);
    t.first = 1;
    t.reference.resize(N, 2);
    t.reference.col(0) = circle_eigenfunction(1, Parity::Sin, theta);
    t.reference.col(1) = circle_eigenfunction(1, Parity::Cos, theta);
    t.eigenvalue = -1.0;
    t.M = 5;
  } else if (e == "sphere") {
    t.first = 1;
    t.reference = cloud.points();
    t.eigenvalue = -2.0;
    t.sphere_lsq = true;
    t.M = 4;
  } else {
    throw Error(ErrorCode::InvalidArgument, "experiment '" + e + "' has no eigenfunction target");
  }
  if (is_ou(e) && cfg.mask_radius && *cfg.mask_radius > 0.0) {
    std::vector<long> m;
    for (long i = 0; i < N; ++i) {
      bool in = true;
      for (long c = 0; c < cloud.ambient_dim(); ++c) in = in && std::abs(cloud.points()(i, c)) <= *cfg.mask_radius;
      if (in) m.push_back(i);
    }
    t.mask = std::move(m);
  }
  if (cfg.eigenfunctions > 0) t.M = std::max<int>(cfg.eigenfunctions, t.first + int(t.reference.cols()));
  return t;
}

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

EigsOptions eigs_options(const ExperimentConfig& cfg) {
  EigsOptions o;
  o.mode = parse_solver_mode(cfg.solver);
  o.sigma = cfg.sigma;
  o.tol = cfg.tol;
  return o;
}

ResultRow eigen_row(const ExperimentConfig& cfg, const PreparedCloud& pc, const EigenTask& task, double eps,
                    Spectrum* keep) {
  const PointCloud& cloud = *pc.cloud;
  const GeneratorMatrices gm =
      build_generator(cloud, pc.bandwidth.rho, eps, pc.alpha, pc.d, pc.support, /*keep_intermediate=*/false);
  const Spectrum sp = scale_sqrtN(eigs_near_zero(gm, task.M, eigs_options(cfg)));

  ResultRow row;
  row.eps = eps;
  row.eigenvalues = sp.eigenvalues;
  const long r = task.reference.cols();
  const MatrixXd est = sp.eigenvectors.middleCols(task.first, r);
  const MatrixXd ref = normalized_columns(task.reference);
  const Alignment al = align_orthogonal(est, ref);
  row.mse = mse(al.aligned.col(task.measured), ref.col(task.measured), task.mask);
  if (task.mask) row.extra["mse_unmasked"] = mse(al.aligned.col(task.measured), ref.col(task.measured));
  row.eig_err = 0.0;
  for (long c = 0; c < r; ++c)
    row.eig_err = std::max(row.eig_err, std::abs(sp.eigenvalues[task.first + c] - task.eigenvalue));
  for (long c = 0; c < r; ++c) row.extra["block_mse_" + std::to_string(c)] = mse(al.aligned.col(c), ref.col(c), task.mask);
  if (task.sphere_lsq) {
    const LeastSquaresMap ls = least_squares_map(est, task.reference);
    const MatrixXd fit = est * ls.B;
    double worst = 0.0;
    for (long c = 0; c < r; ++c) {
      const double m = mse(fit.col(c), task.reference.col(c));
      row.extra["lsq_mse_" + std::to_string(c)] = m;
      worst = std::max(worst, m);
    }
    row.extra["lsq_mse_max"] = worst;
    row.extra["lsq_condition"] = ls.condition;
  }
  row.extra["matvecs"] = double(sp.matvecs);
  if (keep) *keep = sp;
  return row;
}

struct OperatorSetup {
  VectorXd rho;
  VectorXd f;
  VectorXd reference;
};

OperatorSetup operator_setup(const ExperimentConfig& cfg, const PointCloud& cloud, double alpha, double beta, int d) {
  if (!cloud.latent()) throw Error(ErrorCode::NoLatent, "operator check needs latent coordinates");
  const VectorXd theta = cloud.latent()->col(0);
  const long N = cloud.size();
  const bool vm = cfg.experiment == "circle_operator" && cfg.sampling == "vonmises";
  auto log_q = [vm](double t) { return vm ? exp_cos_log_gradient(t) : 0.0; };
  const double i0 = std::cyl_bessel_i(0.0, 1.0);

  OperatorSetup s;
  s.rho.resize(N);
  std::function<double(double)> log_rho;
  if (cfg.bandwidth == "density") {
    for (long i = 0; i < N; ++i) {
      const double q = vm ? std::exp(std::cos(theta[i])) / (2.0 * std::numbers::pi * i0) : 1.0 / (2.0 * std::numbers::pi);
      s.rho[i] = std::pow(q, beta);
    }
    log_rho = [log_q, beta](double t) { return beta * log_q(t); };
  } else {
    for (long i = 0; i < N; ++i) s.rho[i] = std::exp(std::cos(theta[i]));
    log_rho = exp_cos_log_gradient;
  }
  const AngularFunction f = AngularFunction::sin_k(1);
  s.f.resize(N);
  for (long i = 0; i < N; ++i) s.f[i] = f.f(theta[i]);

  const Formulation form = parse_formulation(cfg.formulation);
  s.reference = reference_operator(ReferenceOperator::gradient_flow(2.0 * (1.0 - alpha), log_q), f, cloud);
  if (form != Formulation::Left)
    s.reference += reference_operator(ReferenceOperator::bandwidth_drift(d, log_rho), f, cloud) -
                   reference_operator(ReferenceOperator::laplacian(), f, cloud);
  return s;
}

void write_operator_csv(const std::string& path, const PointCloud& cloud, const VectorXd& est, const VectorXd& ref) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error(ErrorCode::Io, "cannot write " + path);
  std::fputs("theta,estimate,reference\n", fp);
  for (long i = 0; i < cloud.size(); ++i)
    std::fprintf(fp, "%.17g,%.17g,%.17g\n", (*cloud.latent())(i, 0), est[i], ref[i]);
  std::fclose(fp);
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "outlier_study") return outlier_study(cfg);
  ResultTable table;
  table.meta = cfg.echo();
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);

  const PointCloud cloud = make_experiment_cloud(cfg);
  const long N = cloud.size();

  if (is_operator(cfg.experiment)) {
    const int d = cfg.d > 0 ? cfg.d : cloud.intrinsic_dim().value_or(1);
    const AlphaBeta ab = resolve_alpha_beta(cfg, d);
    const OperatorSetup s = operator_setup(cfg, cloud, ab.alpha, ab.beta, d);
    std::shared_ptr<const SparsityPattern> support;
    if (cfg.k_support > 0 || cfg.experiment == "torus_operator") {
      const long k = default_k_support(cfg, N);
      if (k < N) support = std::make_shared<const SparsityPattern>(symmetrized_support(knn(cloud, int(k))));
    }
    const std::vector<double> sweep = cfg.eps == "sweep" ? default_sweep(cfg) : parse_eps_list(cfg.eps);
    table.meta.emplace_back("resolved_alpha", fmt(ab.alpha));
    table.meta.emplace_back("resolved_beta", fmt(ab.beta));
    table.meta.emplace_back("resolved_d", std::to_string(d));
    for (double eps : sweep) {
      const double t0 = now_s();
      try {
        const VectorXd est = apply_generator(cloud, s.rho, eps, ab.alpha, parse_formulation(cfg.formulation), s.f, d,
                                             support.get());
        ResultRow row;
        row.eps = eps;
        row.mse = mse(est, s.reference);
        row.extra["rms"] = std::sqrt(row.mse);
        row.wall_time_s = cfg.record_timing ? now_s() - t0 : 0.0;
        if (!cfg.output_dir.empty() && cfg.write_eigvecs)
          write_operator_csv(cfg.output_dir + "/operator_" + eps_tag(eps) + ".csv", cloud, est, s.reference);
        table.rows.push_back(std::move(row));
      } catch (const Error& e) {
        table.failures.push_back({eps, e.code(), e.what()});
      }
    }
    if (!cfg.output_dir.empty()) write_results(table, cfg.output_dir);
    return table;
  }

  const PreparedCloud pc = prepare(cfg, cloud);
  const EigenTask task = eigen_task(cfg, cloud);
  table.meta.emplace_back("resolved_alpha", fmt(pc.alpha));
  table.meta.emplace_back("resolved_beta", fmt(pc.bandwidth.beta));
  table.meta.emplace_back("resolved_d", std::to_string(pc.d));
  table.meta.emplace_back("support_nnz", std::to_string(pc.support->nnz()));
  table.meta.emplace_back("eps0", fmt(pc.bandwidth.eps0));

  std::vector<double> sweep;
  if (cfg.eps == "auto") {
    TuningCurve curve = s_curve(cloud, pc.bandwidth.rho, cfg.tune_lo, cfg.tune_hi,
                                tuning_support(pc));
    const EpsilonChoice ch = select_epsilon(curve);
    table.tuning = curve;
    table.meta.emplace_back("eps_star", fmt(ch.eps_star));
    table.meta.emplace_back("a_max", fmt(ch.a_max));
    table.meta.emplace_back("d_hat", fmt(ch.d_hat));
    sweep = {ch.eps_star};
  } else if (cfg.eps == "sweep") {
    sweep = default_sweep(cfg);
  } else {
    sweep = parse_eps_list(cfg.eps);
  }

  for (double eps : sweep) {
    const double t0 = now_s();
    try {
      Spectrum sp;
      ResultRow row = eigen_row(cfg, pc, task, eps, &sp);
      row.wall_time_s = cfg.record_timing ? now_s() - t0 : 0.0;
      if (!cfg.output_dir.empty() && cfg.write_eigvecs) {
        const MatrixXd* lat = cloud.latent() ? &*cloud.latent() : nullptr;
        write_spectrum_csv(sp, cfg.output_dir + "/eigvecs_" + eps_tag(eps) + ".csv", lat);
      }
      table.rows.push_back(std::move(row));
    } catch (const Error& e) {
      table.failures.push_back({eps, e.code(), e.what()});
    }
  }
  if (!cfg.output_dir.empty()) write_results(table, cfg.output_dir);
  return table;
}

PowerLaw fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "power law fit needs two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double a = (sy - b * sx) / n;
  return {b, std::exp(a)};
}

ResultTable outlier_study(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.experiment = "outlier_study";
  ResultTable table;
  table.meta = cfg.echo();
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);
  std::vector<double> sweep;
  if (cfg.eps == "auto") throw Error(ErrorCode::InvalidArgument, "outlier study needs an explicit sweep");
  if (cfg.eps == "sweep") {
    ExperimentConfig s = cfg;
    if (cfg_in.eps_min == 1e-5 && cfg_in.eps_max == 1.0 && cfg_in.eps_count == 65) {
      s.eps_min = 1e-7;
      s.eps_max = 1e-3;
      s.eps_count = 13;
    }
    sweep = default_sweep(s);
  } else {
    sweep = parse_eps_list(cfg.eps);
  }

  std::vector<double> Ns, best_mse;
  std::vector<std::string> lines;
  for (long N : cfg.outlier_N) {
    if (N < 100) throw Error(ErrorCode::InvalidArgument, "outlier study needs N >= 100");
    const PointCloud full = gen_gaussian_nice_1d(N);
    const long removed = long(std::floor(std::sqrt(double(N))));
    std::vector<long> kept;
    {
      const NeighborGraph g = knn(full, std::min<int>(int(default_k_support(cfg, N)), int(N)));
      std::shared_ptr<const SparsityPattern> sup;
      if (N > kDenseKdeLimit) sup = std::make_shared<const SparsityPattern>(symmetrized_support(g));
      const BandwidthProfile bw = build_bandwidth(full, g, cfg.k0, 0.0, 1, sup.get());
      std::vector<long> order(N);
      for (long i = 0; i < N; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](long a, long b) { return bw.q0[a] < bw.q0[b]; });
      kept.assign(order.begin() + removed, order.end());
      std::sort(kept.begin(), kept.end());
    }
    const PointCloud cloud = full.subset(kept);
    ExperimentConfig sub = cfg;
    sub.experiment = "ou1d_nice";
    sub.N = cloud.size();
    sub.k_support = std::min<long>(default_k_support(cfg, N), cloud.size());
    sub.preset = "gradientflow-fixed";
    if (!sub.mask_radius) sub.mask_radius = 2.0;
    sub.alpha.reset();
    sub.beta.reset();
    const PreparedCloud pc = prepare(sub, cloud);
    const EigenTask task = eigen_task(sub, cloud);

    ResultRow best;
    bool have = false;
    for (double eps : sweep) {
      const double t0 = now_s();
      try {
        ResultRow row = eigen_row(sub, pc, task, eps, nullptr);
        row.wall_time_s = cfg.record_timing ? now_s() - t0 : 0.0;
        if (!have || row.mse < best.mse) best = row;
        have = true;
      } catch (const Error& e) {
        table.failures.push_back({eps, e.code(), "N=" + std::to_string(N) + ": " + e.what()});
      }
    }
    if (!have) continue;
    best.extra["N"] = double(N);
    best.extra["removed"] = double(removed);
    best.extra["kept"] = double(cloud.size());
    Ns.push_back(double(N));
    best_mse.push_back(best.mse);
    table.rows.push_back(best);
  }
  if (Ns.size() >= 2) {
    const PowerLaw pl = fit_power_law(Ns, best_mse);
    table.meta.emplace_back("power_law_exponent", fmt(pl.exponent));
    table.meta.emplace_back("power_law_prefactor", fmt(pl.prefactor));
  }
  if (!cfg.output_dir.empty()) write_results(table, cfg.output_dir);
  return table;
}

void write_results(const ResultTable& table, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::FILE* f = std::fopen((dir + "/" + name).c_str(), "w");
    if (!f) throw Error(ErrorCode::Io, "cannot write " + dir + "/" + name);
    return f;
  };
  std::FILE* f = open("results.csv");
  std::fputs("eps,mse,eig_err,wall_time_s\n", f);
  for (const auto& r : table.rows)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", r.eps, r.mse, r.eig_err, r.wall_time_s);
  std::fclose(f);

  f = open("details.csv");
  std::vector<std::string> keys;
  long M = 0;
  for (const auto& r : table.rows) {
    M = std::max<long>(M, r.eigenvalues.size());
    for (const auto& kv : r.extra)
      if (std::find(keys.begin(), keys.end(), kv.first) == keys.end()) keys.push_back(kv.first);
  }
  std::sort(keys.begin(), keys.end());
  std::fputs("eps", f);
  for (long c = 0; c < M; ++c) std::fprintf(f, ",lambda_%ld", c);
  for (const auto& k : keys) std::fprintf(f, ",%s", k.c_str());
  std::fputc('\n', f);
  for (const auto& r : table.rows) {
    std::fprintf(f, "%.17g", r.eps);
    for (long c = 0; c < M; ++c) {
      if (c < r.eigenvalues.size()) std::fprintf(f, ",%.17g", r.eigenvalues[c]);
      else std::fputc(',', f);
    }
    for (const auto& k : keys) {
      auto it = r.extra.find(k);
      if (it != r.extra.end()) std::fprintf(f, ",%.17g", it->second);
      else std::fputc(',', f);
    }
    std::fputc('\n', f);
  }
  std::fclose(f);

  if (!table.failures.empty()) {
    f = open("errors.csv");
    std::fputs("eps,error,message\n", f);
    for (const auto& e : table.failures) {
      std::string msg = e.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::fprintf(f, "%.17g,%s,%s\n", e.eps, to_string(e.code), msg.c_str());
    }
    std::fclose(f);
  }
  if (table.tuning) write_tuning_csv(*table.tuning, dir + "/tuning.csv");

  f = open("meta.txt");
  for (const auto& [k, v] : table.meta) std::fprintf(f, "%s = %s\n", k.c_str(), v.c_str());
  std::fclose(f);
}

}  // namespace vbdm
