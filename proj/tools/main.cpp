// Batch driver for the selection Gaussian random field library: simulation,
// density evaluation, set-probability estimation, maximum likelihood,
// estimator studies, conditional prediction, and AVO inversion. Every run
// writes a manifest that doubles as a config file reproducing the run.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "presets.hpp"
#include "selgauss/csv.hpp"
#include "selgauss/estimation.hpp"
#include "selgauss/field_model.hpp"
#include "selgauss/kde.hpp"
#include "selgauss/mvn_prob.hpp"
#include "selgauss/seismic.hpp"

namespace fs = std::filesystem;
using namespace selgauss;
using selgauss::cli::FieldPreset;

namespace {

using ConfigMap = std::map<std::string, std::string>;

ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config '" + path + "'");
  ConfigMap cfg;
  std::string line, section;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError("config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "output") continue;  // manifests list their outputs; ignore on re-read
    cfg[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

// Collects resolved settings and declared outputs; flushes them as a
// manifest that can be fed back through --config.
class RunContext {
 public:
  RunContext(std::string command, std::string out_dir)
      : command_(std::move(command)), out_dir_(std::move(out_dir)) {
    fs::create_directories(out_dir_);
  }

  const std::string& dir() const { return out_dir_; }

  std::string path(const std::string& name) const { return (fs::path(out_dir_) / name).string(); }

  void set(const std::string& key, const std::string& value) { settings_.emplace_back(key, value); }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }

  void metric(const std::string& key, double value) { metrics_.emplace_back(key, format_double(value)); }
  void metric(const std::string& key, const std::string& value) { metrics_.emplace_back(key, value); }

  std::string declare(const std::string& name) {
    outputs_.push_back(name);
    return path(name);
  }

  void finish() {
    {
      std::ofstream m(path("metrics.csv"));
      m << "key,value\n";
      for (const auto& [k, v] : metrics_) m << k << ',' << v << '\n';
    }
    outputs_.push_back("metrics.csv");
    std::ofstream man(path("manifest.txt"));
    man << '[' << command_ << "]\n";
    for (const auto& [k, v] : settings_) man << k << " = " << v << '\n';
    for (const auto& o : outputs_) man << "output = " << o << '\n';
    man << "output = manifest.txt\n";
  }

 private:
  std::string command_;
  std::string out_dir_;
  std::vector<std::pair<std::string, std::string>> settings_;
  std::vector<std::pair<std::string, std::string>> metrics_;
  std::vector<std::string> outputs_;
};

GridLayout parse_grid(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) return GridLayout::line(std::stoi(text));
  return GridLayout::grid(std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1)));
}

struct FieldArgs {
  std::string preset;
  std::string grid;
  std::string set_syntax;
  double mu = 0, sigma2 = 1, gamma = 0, d_h = 2, d_v = 2;
  std::string kernel = "gauss_kernel";
};

// Preset values unless explicit parameters were requested via --set.
std::pair<FieldParams, GridLayout> resolve_field(const FieldArgs& args, FieldPreset* preset_out = nullptr) {
  FieldParams params;
  GridLayout grid = GridLayout::line(1);
  if (!args.preset.empty()) {
    const FieldPreset preset = selgauss::cli::find_field_preset(args.preset);
    params = preset.params;
    grid = args.grid.empty()
               ? GridLayout::grid(preset.default_grid_rows, preset.default_grid_cols)
               : parse_grid(args.grid);
    if (preset_out) *preset_out = preset;
  } else if (!args.set_syntax.empty()) {
    params.mu = args.mu;
    params.sigma2 = args.sigma2;
    params.gamma = args.gamma;
    params.corr = CorrelationModel{args.d_h, args.d_v, kernel_from_string(args.kernel)};
    params.set_template = parse_coordinate_set(args.set_syntax);
    if (args.grid.empty()) throw DomainError("--grid is required with explicit parameters");
    grid = parse_grid(args.grid);
  } else {
    throw DomainError("either --preset or explicit parameters (--set ...) are required");
  }
  params.validate();
  return {params, grid};
}

void record_field(RunContext& run, const FieldParams& params, const GridLayout& grid) {
  run.set("mu", params.mu);
  run.set("sigma2", params.sigma2);
  run.set("gamma", params.gamma);
  run.set("dh", params.corr.d_h);
  run.set("dv", params.corr.d_v);
  run.set("kernel", to_string(params.corr.kernel));
  run.set("set", to_string(params.set_template));
  run.set("grid", grid.rows() == 1 ? std::to_string(grid.cols())
                                   : std::to_string(grid.rows()) + "x" + std::to_string(grid.cols()));
}

Eigen::MatrixXd sites_table(const GridLayout& grid) {
  Eigen::MatrixXd sites(grid.size(), 3);
  for (int i = 0; i < grid.size(); ++i) {
    sites(i, 0) = i;
    sites(i, 1) = grid.sites()[static_cast<std::size_t>(i)].x1;
    sites(i, 2) = grid.sites()[static_cast<std::size_t>(i)].x2;
  }
  return sites;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const FieldArgs& fargs, const McmcConfig& mcmc, int n_real, std::uint64_t seed,
                 const std::string& out) {
  auto [params, grid] = resolve_field(fargs);
  RunContext run("simulate", out);
  record_field(run, params, grid);
  run.set("n-real", n_real);
  run.set("seed", seed);
  run.set("iters", mcmc.n_iter);
  run.set("burn-in", mcmc.resolved_burn_in());
  run.set("thin", mcmc.thin);
  if (!fargs.preset.empty()) run.set("preset", fargs.preset);

  const Eigen::MatrixXd draws = simulate(params, grid, mcmc, n_real, seed);
  write_matrix_csv(run.declare("sites.csv"), sites_table(grid), {"site", "x1", "x2"});
  write_matrix_csv(run.declare("realizations.csv"), draws);

  const Eigen::VectorXd center = draws.col(grid.center_index());
  const double h = silverman_bandwidth(center);
  Eigen::MatrixXd density(256, 2);
  const double lo = center.minCoeff(), hi = center.maxCoeff();
  for (int g = 0; g < 256; ++g) {
    density(g, 0) = lo + (hi - lo) * g / 255.0;
    density(g, 1) = h > 0 ? kde_density(center, h, density(g, 0)) : 0.0;
  }
  write_matrix_csv(run.declare("marginal_density.csv"), density, {"x", "density"});

  run.metric("center_site", grid.center_index());
  run.metric("center_mean", center.mean());
  run.metric("center_sd", std::sqrt((center.array() - center.mean()).square().sum() /
                                    std::max<double>(1, center.size() - 1)));
  run.finish();
  return 0;
}

int cmd_density(const FieldArgs& fargs, const std::string& data_path, int row, int n_mc,
                std::uint64_t seed, const std::string& out) {
  auto [params, grid] = resolve_field(fargs);
  RunContext run("density", out);
  record_field(run, params, grid);
  run.set("data", data_path);
  run.set("row", row);
  run.set("mc-n", n_mc);
  run.set("seed", seed);
  if (!fargs.preset.empty()) run.set("preset", fargs.preset);

  const Eigen::MatrixXd data = read_matrix_csv(data_path);
  if (row < 0 || row >= data.rows()) throw DomainError("--row out of range");
  Eigen::VectorXd x = data.row(row).transpose();
  if (x.size() != grid.size()) throw DomainError("data row length does not match grid size");

  DensityOptions opts;
  opts.n_mc = n_mc;
  opts.crn_seed = seed;
  const double ld = log_density(params, grid, x, opts);
  std::cout << format_double(ld) << "\n";
  run.metric("log_density", ld);
  run.finish();
  return 0;
}

int cmd_mvnprob(const std::string& mu_path, const std::string& sigma_path, const std::string& sets,
                int n, std::uint64_t seed, const std::string& eta_arg, const std::string& out) {
  const Eigen::VectorXd mu = read_vector_csv(mu_path);
  const Eigen::MatrixXd sigma = read_matrix_csv(sigma_path);
  SelectionSet a;
  {
    std::stringstream ss(sets);
    std::string tok;
    std::vector<CoordinateSet> parsed;
    while (std::getline(ss, tok, ';'))
      if (!tok.empty()) parsed.push_back(parse_coordinate_set(tok));
    if (parsed.empty()) throw DomainError("--set is required");
    if (parsed.size() == 1) {
      a = SelectionSet::repeated(parsed[0], static_cast<std::size_t>(mu.size()));
    } else {
      a.coords = parsed;
    }
  }
  ShiftPolicy shift = ShiftPolicy::automatic();
  if (eta_arg == "zero") {
    shift = ShiftPolicy::zero();
  } else if (!eta_arg.empty() && eta_arg != "auto") {
    shift = ShiftPolicy::explicit_shift(read_vector_csv(eta_arg));
  }

  RunContext run("mvnprob", out);
  run.set("mu", mu_path);
  run.set("sigma", sigma_path);
  run.set("set", sets);
  run.set("n", n);
  run.set("seed", seed);
  run.set("eta", eta_arg.empty() ? "auto" : eta_arg);

  const ProbEstimate est = estimate_prob(a, mu, sigma, shift, n, seed);
  std::cout << "value,log_value,std_error\n"
            << format_double(est.value) << ',' << format_double(est.log_value) << ','
            << format_double(est.std_error) << "\n";
  Eigen::MatrixXd table(1, 3);
  table << est.value, est.log_value, est.std_error;
  write_matrix_csv(run.declare("mvnprob.csv"), table, {"value", "log_value", "std_error"});
  run.metric("value", est.value);
  run.metric("std_error", est.std_error);
  run.finish();
  return 0;
}

int cmd_fit(const std::string& data_path, int row, const std::string& grid_text, int starts,
            int n_mc, int nm_iters, std::uint64_t seed, const std::string& out) {
  if (grid_text.empty()) throw DomainError("--grid is required");
  const GridLayout grid = parse_grid(grid_text);
  const Eigen::MatrixXd data = read_matrix_csv(data_path);
  if (row < 0 || row >= data.rows()) throw DomainError("--row out of range");
  Eigen::VectorXd x = data.row(row).transpose();
  if (x.size() != grid.size()) throw DomainError("data row length does not match grid size");

  RunContext run("fit", out);
  run.set("data", data_path);
  run.set("row", row);
  run.set("grid", grid_text);
  run.set("starts", starts);
  run.set("mc-n", n_mc);
  run.set("nm-iters", nm_iters);
  run.set("seed", seed);

  FitOptions opts;
  opts.n_starts = starts;
  opts.n_mc = n_mc;
  opts.nm_iters = nm_iters;
  opts.crn_seed = derive_seed(seed, 1);
  opts.start_seed = derive_seed(seed, 2);
  const FitResult fr = fit(x, grid, opts);

  Eigen::MatrixXd row_out(1, 8);
  row_out << fr.theta.mu, fr.theta.sigma2, fr.theta.gamma, fr.theta.d, fr.theta.a, fr.log_lik,
      fr.best_start, fr.converged ? 1 : 0;
  write_matrix_csv(run.declare("fit.csv"), row_out,
                   {"mu", "sigma2", "gamma", "d", "a", "log_lik", "best_start", "converged"});
  Eigen::MatrixXd trace(static_cast<Eigen::Index>(fr.trace.size()), 9);
  for (std::size_t s = 0; s < fr.trace.size(); ++s) {
    const StartTrace& t = fr.trace[s];
    trace.row(static_cast<Eigen::Index>(s)) << t.start.mu, t.start.sigma2, t.start.gamma, t.start.d,
        t.start.a, t.f_start, t.f_after_simplex, t.f_final, t.evals;
  }
  write_matrix_csv(run.declare("trace.csv"), trace,
                   {"start_mu", "start_sigma2", "start_gamma", "start_d", "start_a", "f_start",
                    "f_simplex", "f_final", "evals"});
  run.metric("log_lik", fr.log_lik);
  run.metric("gamma_hat", fr.theta.gamma);
  run.finish();
  std::cout << "log_lik " << format_double(fr.log_lik) << "\n";
  return 0;
}

int cmd_study(const FieldArgs& fargs, double truth_a, const std::string& sizes_text, int reps,
              int starts, int n_mc, int nm_iters, int threads, std::uint64_t seed,
              const std::string& out) {
  SymmetricIsoParam truth;
  if (!fargs.preset.empty()) {
    const FieldPreset preset = selgauss::cli::find_field_preset(fargs.preset);
    if (preset.params.corr.d_h != preset.params.corr.d_v)
      throw DomainError("study preset must be isotropic");
    truth.mu = preset.params.mu;
    truth.sigma2 = preset.params.sigma2;
    truth.gamma = preset.params.gamma;
    truth.d = preset.params.corr.d_h;
    truth.a = truth_a;
  } else {
    truth.mu = fargs.mu;
    truth.sigma2 = fargs.sigma2;
    truth.gamma = fargs.gamma;
    truth.d = fargs.d_h;
    truth.a = truth_a;
  }
  std::vector<int> sides;
  {
    std::stringstream ss(sizes_text);
    std::string tok;
    while (std::getline(ss, tok, ',')) sides.push_back(std::stoi(tok));
    if (sides.empty()) throw DomainError("--sizes is required, e.g. 8,16");
  }

  RunContext run("study", out);
  if (!fargs.preset.empty()) run.set("preset", fargs.preset);
  run.set("truth-mu", truth.mu);
  run.set("truth-sigma2", truth.sigma2);
  run.set("truth-gamma", truth.gamma);
  run.set("truth-d", truth.d);
  run.set("truth-a", truth.a);
  run.set("sizes", sizes_text);
  run.set("reps", reps);
  run.set("starts", starts);
  run.set("mc-n", n_mc);
  run.set("nm-iters", nm_iters);
  run.set("threads", threads);
  run.set("seed", seed);

  StudyOptions opts;
  opts.n_rep = reps;
  opts.seed = seed;
  opts.threads = threads;
  opts.fit.n_starts = starts;
  opts.fit.n_mc = n_mc;
  opts.fit.nm_iters = nm_iters;
  const std::vector<StudyRow> rows = estimator_study(truth, sides, opts);

  Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 9);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const StudyRow& r = rows[i];
    table.row(static_cast<Eigen::Index>(i)) << r.side, r.rep, r.est.mu, r.est.sigma2, r.est.gamma,
        r.est.d, r.est.a, r.log_lik, r.converged ? 1 : 0;
  }
  write_matrix_csv(run.declare("study.csv"), table,
                   {"side", "rep", "mu", "sigma2", "gamma", "d", "a", "log_lik", "converged"});

  const auto summary = summarize_study(rows);
  std::ofstream sum(run.declare("study_summary.csv"));
  sum << "side,param,mean,sd,q05,q95\n";
  for (const auto& s : summary)
    sum << s.side << ',' << s.param << ',' << format_double(s.mean) << ',' << format_double(s.sd)
        << ',' << format_double(s.q05) << ',' << format_double(s.q95) << '\n';
  run.metric("rows", static_cast<double>(rows.size()));
  run.finish();
  return 0;
}

int cmd_predict(const FieldArgs& fargs, const std::vector<std::string>& obs_args, long keep,
                long burn_in, int thin, bool gaussian_benchmark, std::uint64_t seed,
                const std::string& out) {
  FieldPreset preset;
  auto [params, grid] = resolve_field(fargs, &preset);
  std::vector<int> obs_sites = preset.obs_sites;
  std::vector<double> obs_values = preset.obs_values;
  if (!obs_args.empty()) {
    obs_sites.clear();
    obs_values.clear();
    for (const std::string& o : obs_args) {
      const auto colon = o.find(':');
      if (colon == std::string::npos) throw DomainError("--obs expects site:value");
      obs_sites.push_back(std::stoi(o.substr(0, colon)));
      obs_values.push_back(std::stod(o.substr(colon + 1)));
    }
  }
  if (obs_sites.empty()) throw DomainError("predict needs at least one --obs site:value");

  RunContext run("predict", out);
  record_field(run, params, grid);
  if (!fargs.preset.empty()) run.set("preset", fargs.preset);
  for (std::size_t i = 0; i < obs_sites.size(); ++i)
    run.set("obs", std::to_string(obs_sites[i]) + ":" + format_double(obs_values[i]));
  run.set("keep", keep);
  run.set("burn-in", burn_in);
  run.set("thin", thin);
  run.set("seed", seed);
  run.set("gaussian-benchmark", gaussian_benchmark ? "true" : "false");

  const Eigen::VectorXd values =
      Eigen::Map<const Eigen::VectorXd>(obs_values.data(), static_cast<Eigen::Index>(obs_values.size()));
  const ConditionalFieldSpec spec = condition_exact(params, grid, obs_sites, values);
  McmcConfig mcmc;
  mcmc.thin = thin;
  mcmc.burn_in = burn_in >= 0 ? burn_in : keep / 5;
  mcmc.n_iter = mcmc.burn_in + keep * thin;
  const PredictionSummary summary = predict(spec, mcmc, seed);

  Eigen::VectorXd gauss_mean;
  if (gaussian_benchmark) {
    const GaussianSpec matched = gaussian_match(params, grid, 2000, derive_seed(seed, 77));
    const GaussianSpec cond = condition(matched, obs_sites, values);
    gauss_mean.resize(grid.size());
    for (std::size_t i = 0; i < obs_sites.size(); ++i)
      gauss_mean[obs_sites[i]] = obs_values[i];
    int k = 0;
    for (int site = 0; site < grid.size(); ++site) {
      bool observed = false;
      for (int o : obs_sites) observed = observed || o == site;
      if (!observed) gauss_mean[site] = cond.mean()[k++];
    }
  }

  Eigen::MatrixXd table(grid.size(), gaussian_benchmark ? 8 : 7);
  for (int i = 0; i < grid.size(); ++i) {
    table(i, 0) = i;
    table(i, 1) = grid.sites()[static_cast<std::size_t>(i)].x1;
    table(i, 2) = summary.mean[i];
    table(i, 3) = summary.median[i];
    table(i, 4) = summary.mode[i];
    table(i, 5) = summary.lower[i];
    table(i, 6) = summary.upper[i];
    if (gaussian_benchmark) table(i, 7) = gauss_mean[i];
  }
  std::vector<std::string> header{"site", "x1", "mean", "median", "mode", "q10", "q90"};
  if (gaussian_benchmark) header.push_back("gauss_mean");
  write_matrix_csv(run.declare("prediction.csv"), table, header);
  run.metric("n_draws", summary.n_draws);
  run.finish();
  return 0;
}

int cmd_invert(const std::string& data_dir, const std::string& model, bool fit_params, int n_mc,
               long keep, long burn_in, double level, std::uint64_t seed, const std::string& out) {
  const AvoDataset data = load_avo_dataset(data_dir);
  RunContext run("invert", out);
  run.set("data", data_dir);
  run.set("model", model);
  run.set("fit", fit_params ? "true" : "false");
  run.set("mc-n", n_mc);
  run.set("keep", keep);
  run.set("burn-in", burn_in);
  run.set("level", level);
  run.set("seed", seed);

  const ForwardOperator fwd = build_forward(data.wavelets, data.angles_deg, 0.5, data.n_t());
  ErrorModel error_model;
  SeismicPrior prior;
  if (fit_params) {
    error_model = fit_error_model(data, fwd);
    PriorFitOptions popts;
    popts.gaussian = model == "gaussian";
    popts.n_mc = n_mc;
    popts.crn_seed = derive_seed(seed, 3);
    prior = fit_prior(data.well_logs, data.t(), popts);
  } else {
    error_model = demo_error_model();
    prior = selgauss::cli::find_seismic_prior(model);
    prior.trend = fit_prior(data.well_logs, data.t(),
                            PriorFitOptions{.gaussian = true, .nm_iters = 0, .polish_iters = 0})
                      .trend;
  }
  run.metric("sigma2_e", error_model.sigma2_e);
  run.metric("d0_e", error_model.d0_e);
  run.metric("d_e", error_model.d_e);
  run.metric("d_m", prior.d_m);
  for (int k = 0; k < 3; ++k) {
    run.metric("gamma_" + std::to_string(k), prior.gamma[k]);
    run.metric("a_" + std::to_string(k), prior.a[k]);
  }

  McmcConfig mcmc;
  mcmc.burn_in = burn_in >= 0 ? burn_in : keep / 5;
  mcmc.n_iter = mcmc.burn_in + keep;
  const SampleBatch posterior = posterior_sample(data, prior, error_model, fwd, mcmc, seed);
  const SampleBatch prior_draws = prior_sample(prior, data.t(), mcmc, derive_seed(seed, 4));
  const InversionReport report = summarize_inversion(posterior, prior_draws, data.well_logs, level);

  const char* names[3] = {"log_vp", "log_vs", "log_rho"};
  {
    std::ofstream rep(run.declare("report.csv"));
    rep << "property,mse,prior_coverage,posterior_coverage\n";
    for (int k = 0; k < 3; ++k)
      rep << names[k] << ',' << format_double(report.props[static_cast<std::size_t>(k)].mse) << ','
          << format_double(report.props[static_cast<std::size_t>(k)].prior_coverage) << ','
          << format_double(report.props[static_cast<std::size_t>(k)].posterior_coverage) << '\n';
  }
  {
    std::ofstream txt(run.declare("report.txt"));
    txt << "AVO inversion (" << model << " prior), " << posterior.samples.rows()
        << " posterior draws, " << format_double(level * 100) << "% intervals\n";
    for (int k = 0; k < 3; ++k) {
      const auto& pr = report.props[static_cast<std::size_t>(k)];
      txt << "  " << names[k] << ": mse " << format_double(pr.mse) << ", prior coverage "
          << format_double(pr.prior_coverage) << ", posterior coverage "
          << format_double(pr.posterior_coverage) << '\n';
    }
    txt << "  chain acceptance " << format_double(posterior.acceptance_rate) << '\n';
  }

  Eigen::MatrixXd mean_table(data.n_t(), 7);
  const Eigen::VectorXd t = data.t();
  for (int i = 0; i < data.n_t(); ++i) {
    mean_table(i, 0) = t[i];
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd col = posterior.samples.col(k * data.n_t() + i);
      mean_table(i, 1 + k) = col.mean();
      mean_table(i, 4 + k) = empirical_quantile(col, 0.9) - empirical_quantile(col, 0.1);
    }
  }
  write_matrix_csv(run.declare("posterior_mean.csv"), mean_table,
                   {"t", "mean_log_vp", "mean_log_vs", "mean_log_rho", "iqr80_log_vp",
                    "iqr80_log_vs", "iqr80_log_rho"});
  for (int k = 0; k < 3; ++k)
    run.metric(std::string("mse_") + names[k], report.props[static_cast<std::size_t>(k)].mse);
  run.metric("acceptance", posterior.acceptance_rate);
  run.finish();
  return 0;
}

int cmd_gendemo(int n_t, std::uint64_t seed, const std::string& out) {
  DemoConfig cfg;
  cfg.n_t = n_t;
  cfg.seed = seed;
  const AvoDataset data = make_demo_dataset(cfg);
  RunContext run("gen-demo", out);
  run.set("nt", n_t);
  run.set("seed", seed);
  save_avo_dataset(data, out);
  run.declare("well.csv");
  run.declare("seismic.csv");
  for (int a = 0; a < data.n_angles(); ++a)
    run.declare("wavelet_" + format_double(data.angles_deg[a]) + ".csv");
  run.metric("nt", n_t);
  run.finish();
  return 0;
}

void add_field_options(CLI::App* cmd, FieldArgs& args) {
  cmd->add_option("--preset", args.preset, "named parameter bundle (table1-case1..6, table2-case1..4)");
  cmd->add_option("--grid", args.grid, "grid size, e.g. 64x64 or 128");
  cmd->add_option("--set", args.set_syntax, "selection set, e.g. (-inf,-0.3]U[0.3,inf)");
  cmd->add_option("--mu", args.mu, "location");
  cmd->add_option("--sigma2", args.sigma2, "scale");
  cmd->add_option("--gamma", args.gamma, "coupling in [-1,1]");
  cmd->add_option("--dh", args.d_h, "horizontal range");
  cmd->add_option("--dv", args.d_v, "vertical range");
  cmd->add_option("--kernel", args.kernel, "gauss_kernel | exp_kernel");
}

void config_field(const ConfigMap& cfg, const std::string& section, FieldArgs& args) {
  auto get = [&](const char* key, auto& var) {
    const auto scoped = cfg.find(section + "." + key);
    const auto it = scoped != cfg.end() ? scoped : cfg.find(key);
    if (it == cfg.end()) return;
    std::istringstream ss(it->second);
    if constexpr (std::is_same_v<std::decay_t<decltype(var)>, std::string>) {
      var = it->second;
    } else {
      ss >> var;
    }
  };
  get("preset", args.preset);
  get("grid", args.grid);
  get("set", args.set_syntax);
  get("mu", args.mu);
  get("sigma2", args.sigma2);
  get("gamma", args.gamma);
  get("dh", args.d_h);
  get("dv", args.d_v);
  get("kernel", args.kernel);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selection Gaussian random fields: simulation, inference, prediction, AVO inversion"};
  app.require_subcommand(1);

  // --config is resolved before normal parsing so file values become
  // defaults that explicit flags override.
  ConfigMap cfg;
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  std::string config_echo;
  app.add_option("--config", config_echo, "config file (manifest format)");

  auto cfg_get = [&cfg](const std::string& section, const std::string& key, auto& var) {
    const auto scoped = cfg.find(section + "." + key);
    const auto it = scoped != cfg.end() ? scoped : cfg.find(key);
    if (it == cfg.end()) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(var)>, std::string>) {
      var = it->second;
    } else {
      std::istringstream ss(it->second);
      ss >> var;
    }
  };

  // simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "draw field realizations");
  FieldArgs sim_field;
  McmcConfig sim_mcmc;
  int sim_nreal = 100;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "out-simulate";
  config_field(cfg, "simulate", sim_field);
  cfg_get("simulate", "n-real", sim_nreal);
  cfg_get("simulate", "seed", sim_seed);
  cfg_get("simulate", "iters", sim_mcmc.n_iter);
  cfg_get("simulate", "burn-in", sim_mcmc.burn_in);
  cfg_get("simulate", "thin", sim_mcmc.thin);
  cfg_get("simulate", "out", sim_out);
  add_field_options(sim, sim_field);
  sim->add_option("--n-real", sim_nreal, "realizations to keep");
  sim->add_option("--iters", sim_mcmc.n_iter, "chain iterations");
  sim->add_option("--burn-in", sim_mcmc.burn_in, "burn-in iterations");
  sim->add_option("--thin", sim_mcmc.thin, "thinning");
  sim->add_option("--block-size", sim_mcmc.block_size, "proposal block size");
  sim->add_option("--seed", sim_seed, "seed");
  sim->add_option("--out", sim_out, "output directory");

  // density ----------------------------------------------------------------
  auto* den = app.add_subcommand("density", "log density of a configuration");
  FieldArgs den_field;
  std::string den_data;
  int den_row = 0, den_nmc = 5000;
  std::uint64_t den_seed = 1;
  std::string den_out = "out-density";
  config_field(cfg, "density", den_field);
  cfg_get("density", "data", den_data);
  cfg_get("density", "row", den_row);
  cfg_get("density", "mc-n", den_nmc);
  cfg_get("density", "seed", den_seed);
  cfg_get("density", "out", den_out);
  add_field_options(den, den_field);
  den->add_option("--data", den_data, "CSV of field values (rows = configurations)");
  den->add_option("--row", den_row, "row of --data to evaluate");
  den->add_option("--mc-n", den_nmc, "Monte Carlo points for the normalizer");
  den->add_option("--seed", den_seed, "CRN seed");
  den->add_option("--out", den_out, "output directory");

  // mvnprob ----------------------------------------------------------------
  auto* mvp = app.add_subcommand("mvnprob", "selection-set probability of a multivariate normal");
  std::string mvp_mu, mvp_sigma, mvp_sets, mvp_eta = "auto";
  int mvp_n = 5000;
  std::uint64_t mvp_seed = 1;
  std::string mvp_out = "out-mvnprob";
  cfg_get("mvnprob", "mu", mvp_mu);
  cfg_get("mvnprob", "sigma", mvp_sigma);
  cfg_get("mvnprob", "set", mvp_sets);
  cfg_get("mvnprob", "n", mvp_n);
  cfg_get("mvnprob", "seed", mvp_seed);
  cfg_get("mvnprob", "eta", mvp_eta);
  cfg_get("mvnprob", "out", mvp_out);
  mvp->add_option("--mu", mvp_mu, "mean vector CSV");
  mvp->add_option("--sigma", mvp_sigma, "covariance CSV");
  mvp->add_option("--set", mvp_sets, "set per coordinate, ';'-separated (single set is repeated)");
  mvp->add_option("--n", mvp_n, "Monte Carlo points");
  mvp->add_option("--seed", mvp_seed, "seed");
  mvp->add_option("--eta", mvp_eta, "auto | zero | CSV path");
  mvp->add_option("--out", mvp_out, "output directory");

  // fit --------------------------------------------------------------------
  auto* fitc = app.add_subcommand("fit", "maximum likelihood for the symmetric isotropic model");
  std::string fit_data, fit_grid, fit_out = "out-fit";
  int fit_row = 0, fit_starts = 5, fit_nmc = 5000, fit_nm = 200;
  std::uint64_t fit_seed = 1;
  cfg_get("fit", "data", fit_data);
  cfg_get("fit", "row", fit_row);
  cfg_get("fit", "grid", fit_grid);
  cfg_get("fit", "starts", fit_starts);
  cfg_get("fit", "mc-n", fit_nmc);
  cfg_get("fit", "nm-iters", fit_nm);
  cfg_get("fit", "seed", fit_seed);
  cfg_get("fit", "out", fit_out);
  fitc->add_option("--data", fit_data, "realization CSV");
  fitc->add_option("--row", fit_row, "row of --data to fit");
  fitc->add_option("--grid", fit_grid, "grid size");
  fitc->add_option("--starts", fit_starts, "optimizer starts");
  fitc->add_option("--mc-n", fit_nmc, "Monte Carlo points");
  fitc->add_option("--nm-iters", fit_nm, "simplex warm-up iterations");
  fitc->add_option("--seed", fit_seed, "seed");
  fitc->add_option("--out", fit_out, "output directory");

  // study ------------------------------------------------------------------
  auto* stu = app.add_subcommand("study", "estimator replication study");
  FieldArgs stu_field;
  double stu_a = 0.3;
  std::string stu_sizes = "8,16";
  int stu_reps = 50, stu_starts = 3, stu_nmc = 1000, stu_nm = 150, stu_threads = 2;
  std::uint64_t stu_seed = 1;
  std::string stu_out = "out-study";
  config_field(cfg, "study", stu_field);
  cfg_get("study", "truth-a", stu_a);
  cfg_get("study", "sizes", stu_sizes);
  cfg_get("study", "reps", stu_reps);
  cfg_get("study", "starts", stu_starts);
  cfg_get("study", "mc-n", stu_nmc);
  cfg_get("study", "nm-iters", stu_nm);
  cfg_get("study", "threads", stu_threads);
  cfg_get("study", "seed", stu_seed);
  cfg_get("study", "out", stu_out);
  add_field_options(stu, stu_field);
  stu->add_option("--truth-a", stu_a, "truncation parameter of the truth");
  stu->add_option("--sizes", stu_sizes, "grid sides, e.g. 8,16,32");
  stu->add_option("--reps", stu_reps, "replicates per size");
  stu->add_option("--starts", stu_starts, "optimizer starts per fit");
  stu->add_option("--mc-n", stu_nmc, "Monte Carlo points per likelihood");
  stu->add_option("--nm-iters", stu_nm, "simplex warm-up iterations");
  stu->add_option("--threads", stu_threads, "worker threads over replicates");
  stu->add_option("--seed", stu_seed, "seed");
  stu->add_option("--out", stu_out, "output directory");

  // predict ----------------------------------------------------------------
  auto* pre = app.add_subcommand("predict", "conditional prediction from exact observations");
  FieldArgs pre_field;
  std::vector<std::string> pre_obs;
  long pre_keep = 4000, pre_burn = -1;
  int pre_thin = 1;
  bool pre_gauss = true;
  std::uint64_t pre_seed = 1;
  std::string pre_out = "out-predict";
  config_field(cfg, "predict", pre_field);
  cfg_get("predict", "keep", pre_keep);
  cfg_get("predict", "burn-in", pre_burn);
  cfg_get("predict", "thin", pre_thin);
  cfg_get("predict", "seed", pre_seed);
  cfg_get("predict", "out", pre_out);
  add_field_options(pre, pre_field);
  pre->add_option("--obs", pre_obs, "observation site:value (repeatable)");
  pre->add_option("--keep", pre_keep, "kept draws");
  pre->add_option("--burn-in", pre_burn, "burn-in iterations");
  pre->add_option("--thin", pre_thin, "thinning");
  pre->add_flag("--gaussian-benchmark,!--no-gaussian-benchmark", pre_gauss,
                "also emit the moment-matched Gaussian predictor");
  pre->add_option("--seed", pre_seed, "seed");
  pre->add_option("--out", pre_out, "output directory");

  // invert -----------------------------------------------------------------
  auto* inv = app.add_subcommand("invert", "Bayesian AVO inversion");
  std::string inv_data, inv_model = "selection", inv_out = "out-invert";
  bool inv_fit = true;
  int inv_nmc = 2000;
  long inv_keep = 4000, inv_burn = -1;
  double inv_level = 0.8;
  std::uint64_t inv_seed = 1;
  cfg_get("invert", "data", inv_data);
  cfg_get("invert", "model", inv_model);
  cfg_get("invert", "mc-n", inv_nmc);
  cfg_get("invert", "keep", inv_keep);
  cfg_get("invert", "burn-in", inv_burn);
  cfg_get("invert", "level", inv_level);
  cfg_get("invert", "seed", inv_seed);
  cfg_get("invert", "out", inv_out);
  inv->add_option("--data", inv_data, "dataset directory (well.csv, seismic.csv, wavelet_*.csv)");
  inv->add_option("--model", inv_model, "selection | gaussian");
  inv->add_flag("--fit,!--no-fit", inv_fit, "estimate error/prior parameters from the data");
  inv->add_option("--mc-n", inv_nmc, "Monte Carlo points for the prior fit");
  inv->add_option("--keep", inv_keep, "kept posterior draws");
  inv->add_option("--burn-in", inv_burn, "burn-in iterations");
  inv->add_option("--level", inv_level, "prediction interval level");
  inv->add_option("--seed", inv_seed, "seed");
  inv->add_option("--out", inv_out, "output directory");

  // gen-demo ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-demo", "write a synthetic AVO dataset");
  int gen_nt = 55;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "demo";
  cfg_get("gen-demo", "nt", gen_nt);
  cfg_get("gen-demo", "seed", gen_seed);
  cfg_get("gen-demo", "out", gen_out);
  gen->add_option("--nt", gen_nt, "trace length");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--out", gen_out, "output directory");

  for (CLI::App* sub : {sim, den, mvp, fitc, stu, pre, inv, gen}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_field, sim_mcmc, sim_nreal, sim_seed, sim_out);
    if (den->parsed()) return cmd_density(den_field, den_data, den_row, den_nmc, den_seed, den_out);
    if (mvp->parsed()) return cmd_mvnprob(mvp_mu, mvp_sigma, mvp_sets, mvp_n, mvp_seed, mvp_eta, mvp_out);
    if (fitc->parsed()) return cmd_fit(fit_data, fit_row, fit_grid, fit_starts, fit_nmc, fit_nm, fit_seed, fit_out);
    if (stu->parsed())
      return cmd_study(stu_field, stu_a, stu_sizes, stu_reps, stu_starts, stu_nmc, stu_nm,
                       stu_threads, stu_seed, stu_out);
    if (pre->parsed())
      return cmd_predict(pre_field, pre_obs, pre_keep, pre_burn, pre_thin, pre_gauss, pre_seed, pre_out);
    if (inv->parsed())
      return cmd_invert(inv_data, inv_model, inv_fit, inv_nmc, inv_keep, inv_burn, inv_level,
                        inv_seed, inv_out);
    if (gen->parsed()) return cmd_gendemo(gen_nt, gen_seed, gen_out);
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
