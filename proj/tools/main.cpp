#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rgarch/errors.hpp"
#include "rgarch/inference.hpp"
#include "rgarch/io.hpp"
#include "rgarch/mcem.hpp"
#include "rgarch/predict.hpp"
#include "rgarch/process.hpp"
#include "rgarch/replication.hpp"
#include "rgarch/rng.hpp"
#include "rgarch/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240817;

/// Command line as invoked, recorded in every metadata file.
std::vector<std::string> g_argv;

struct SeedChoice {
  std::uint64_t value = kDefaultSeed;
  std::string source = "default";
};

/// Seed precedence: --seed flag, then the RGARCH_SEED environment variable,
/// then the built-in default.
SeedChoice resolve_seed(bool flag_given, std::uint64_t flag_value) {
  if (flag_given) return {flag_value, "flag"};
  if (const char* env = std::getenv("RGARCH_SEED")) {
    const std::string text(env);
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
      throw rgarch::validation_error("RGARCH_SEED must be an unsigned integer, got '" + text +
                                     "'");
    try {
      return {static_cast<std::uint64_t>(std::stoull(text)), "env"};
    } catch (const std::exception&) {
      throw rgarch::validation_error("RGARCH_SEED value '" + text + "' is out of range");
    }
  }
  return {kDefaultSeed, "default"};
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw rgarch::validation_error("--out must not be empty");
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw rgarch::validation_error("cannot create output directory '" + out +
                                   "': " + ec.message());
  return dir;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rgarch::validation_error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw rgarch::validation_error("failed while writing '" + path.string() + "'");
}

json order_json(rgarch::ModelOrder order) { return json{{"p", order.p}, {"q", order.q}}; }

json coefficients_json(const rgarch::Coefficients& coef) {
  return json{{"phi0", coef.phi0}, {"phi", coef.phi}, {"alpha", coef.alpha}};
}

void write_metadata(const fs::path& dir, const std::string& command, const json& config) {
  json meta;
  meta["tool"] = "rgarch";
  meta["version"] = rgarch::version_string;
  meta["command"] = command;
  meta["argv"] = g_argv;
  meta["config"] = config;
  write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
}

rgarch::Coefficients make_coefficients(double phi0, std::vector<double> phi,
                                       std::vector<double> alpha) {
  rgarch::Coefficients coef;
  coef.phi0 = phi0;
  coef.phi = std::move(phi);
  coef.alpha = std::move(alpha);
  coef.validate();
  return coef;
}

std::vector<std::string> coefficient_names(rgarch::ModelOrder order) {
  std::vector<std::string> names{"phi0"};
  for (int i = 1; i <= order.p; ++i) names.push_back("phi" + std::to_string(i));
  for (int j = 1; j <= order.q; ++j) names.push_back("alpha" + std::to_string(j));
  return names;
}

void print_fit_summary(const rgarch::FitResult& fit) {
  char line[160];
  std::snprintf(line, sizeof line, "order (%d,%d), %s distance, %d likelihood terms",
                fit.order.p, fit.order.q, rgarch::to_string(fit.kind), fit.n_used);
  std::cout << line << '\n';
  const auto names = coefficient_names(fit.order);
  const auto flat = fit.coef.flat();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (i < fit.std_errors.size() && std::isfinite(fit.std_errors[i]))
      std::snprintf(line, sizeof line, "  %-8s %12.5f  (se %.5f)", names[i].c_str(), flat[i],
                    fit.std_errors[i]);
    else
      std::snprintf(line, sizeof line, "  %-8s %12.5f", names[i].c_str(), flat[i]);
    std::cout << line << '\n';
  }
  std::snprintf(line, sizeof line, "  loglik %.4f  AIC %.4f  BIC %.4f%s", fit.loglik, fit.aic,
                fit.bic, fit.converged ? "" : "  (not converged)");
  std::cout << line << '\n';
}

rgarch::RankingSeries read_complete_series(const std::string& path, const char* purpose) {
  auto series = rgarch::read_rankings_csv(path);
  if (!series.complete())
    throw rgarch::validation_error("'" + path + "' has " +
                                   std::to_string(series.n_incomplete_rows()) +
                                   " incomplete rows; " + purpose);
  return series;
}

/// Empirical distance autocorrelations with an optional model overlay for
/// fitted orders (1,0) and (1,1).  Skipped with a warning when the series
/// is too short or degenerate.
void write_fit_acf(const fs::path& dir, const rgarch::RankingSeries& series,
                   const rgarch::FitResult& fit) {
  const auto d = series.distance_series(fit.kind);
  const std::vector<double> x(d.begin(), d.end());
  const int max_lag = std::min<int>(20, static_cast<int>(x.size()) - 1);
  if (max_lag < 1) return;
  try {
    const auto acf = rgarch::empirical_acf_pacf(x, max_lag);
    std::optional<std::vector<double>> model;
    if (fit.order.p == 1 && fit.order.q <= 1 &&
        rgarch::check_stationarity(fit.coef).stationary) {
      double s2 = 0;
      for (double e : fit.residuals) s2 += e * e;
      s2 /= fit.residuals.empty() ? 1.0 : static_cast<double>(fit.residuals.size());
      const double alpha1 = fit.order.q == 1 ? fit.coef.alpha[0] : 0.0;
      const auto theo = rgarch::theoretical_acf_11(fit.coef.phi[0], alpha1, s2);
      std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1, 1.0);
      for (int h = 1; h <= max_lag; ++h) rho[static_cast<std::size_t>(h)] = theo.rho(h);
      model = std::move(rho);
    }
    rgarch::write_acf_csv((dir / "acf.csv").string(), acf, model ? &*model : nullptr);
  } catch (const rgarch::validation_error& e) {
    std::cerr << "note: skipping acf.csv: " << e.what() << '\n';
  }
}

struct LoadedModel {
  rgarch::Coefficients coef;
  rgarch::ModelOrder order;
  rgarch::DistanceKind kind = rgarch::DistanceKind::kendall;
  int k = 0;
};

LoadedModel load_fit_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rgarch::validation_error("cannot open fit file '" + path + "'");
  LoadedModel m;
  try {
    json j;
    in >> j;
    m.k = j.at("k").get<int>();
    m.order.p = j.at("order").at("p").get<int>();
    m.order.q = j.at("order").at("q").get<int>();
    m.kind = rgarch::distance_kind_from_string(j.at("distance").get<std::string>());
    const json& c = j.at("coefficients");
    m.coef.phi0 = c.at("phi0").get<double>();
    m.coef.phi = c.at("phi").get<std::vector<double>>();
    m.coef.alpha = c.at("alpha").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw rgarch::validation_error("cannot parse fit file '" + path + "': " + e.what());
  }
  m.coef.validate();
  if (m.order.p != static_cast<int>(m.coef.phi.size()) ||
      m.order.q != static_cast<int>(m.coef.alpha.size()))
    throw rgarch::validation_error("fit file '" + path +
                                   "' order disagrees with its coefficient counts");
  return m;
}

int parse_strict_int(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw rgarch::validation_error(what + " '" + text + "' is not an integer");
  }
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

/// Event syntax: "item=rank[,item=rank...]", both sides 1-based.
std::vector<std::pair<int, int>> parse_event_spec(const std::string& text) {
  std::vector<std::pair<int, int>> pairs;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    const std::string tok =
        trimmed(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (tok.empty())
      throw rgarch::validation_error("empty term in event spec '" + text + "'");
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw rgarch::validation_error("event term '" + tok + "' is not of the form item=rank");
    pairs.emplace_back(parse_strict_int(trimmed(tok.substr(0, eq)), "event item"),
                       parse_strict_int(trimmed(tok.substr(eq + 1)), "event rank"));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return pairs;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  int k = 10;
  int n = 500;
  double phi0 = 0;
  std::vector<double> phi;
  std::vector<double> alpha;
  std::string distance = "kendall";
  std::uint64_t seed = kDefaultSeed;
  bool seed_given = false;
  std::string out;
  bool allow_nonstationary = false;
};

int run_simulate(const SimulateArgs& a) {
  const auto kind = rgarch::distance_kind_from_string(a.distance);
  const auto coef = make_coefficients(a.phi0, a.phi, a.alpha);
  const SeedChoice seed = resolve_seed(a.seed_given, a.seed);
  const fs::path dir = prepare_out_dir(a.out);

  rgarch::Rng rng(seed.value);
  const auto sim = rgarch::simulate(a.k, a.n, coef, kind, rng, a.allow_nonstationary);
  rgarch::write_rankings_csv((dir / "rankings.csv").string(), sim.series);
  rgarch::write_mean_path_csv((dir / "mean_path.csv").string(), sim.path);

  json config;
  config["k"] = a.k;
  config["n"] = a.n;
  config["coefficients"] = coefficients_json(coef);
  config["order"] = order_json(coef.order());
  config["distance"] = rgarch::to_string(kind);
  config["allow_nonstationary"] = a.allow_nonstationary;
  config["seed"] = seed.value;
  config["seed_source"] = seed.source;
  write_metadata(dir, "simulate", config);

  std::cout << "wrote " << sim.series.size() << " rankings of " << a.k << " items to "
            << dir.string() << '\n';
  return 0;
}

void setup_simulate(CLI::App& app, int& exit_code) {
  auto a = std::make_shared<SimulateArgs>();
  CLI::App* cmd = app.add_subcommand("simulate", "Simulate a ranking series");
  cmd->add_option("--k", a->k, "Number of ranked items")->required();
  cmd->add_option("--n", a->n, "Series length")->required();
  cmd->add_option("--phi0", a->phi0, "Baseline level of the conditional mean")->required();
  cmd->add_option("--phi", a->phi, "Distance-lag coefficients phi_1..phi_p");
  cmd->add_option("--alpha", a->alpha, "Feedback coefficients alpha_1..alpha_q");
  cmd->add_option("--distance", a->distance, "Distance between rankings")
      ->check(CLI::IsMember({"kendall", "hamming"}))
      ->capture_default_str();
  cmd->add_option("--seed", a->seed, "RNG seed (overrides RGARCH_SEED)");
  cmd->add_option("--out", a->out, "Output directory")->required();
  cmd->add_flag("--allow-nonstationary", a->allow_nonstationary,
                "Permit coefficient sets with persistence >= 1");
  cmd->callback([a, cmd, &exit_code] {
    a->seed_given = cmd->count("--seed") > 0;
    exit_code = run_simulate(*a);
  });
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string data;
  std::vector<int> order;
  std::vector<int> scan;
  std::string distance = "kendall";
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  bool seed_given = false;
  int starts = 5;
};

int run_fit(const FitArgs& a) {
  const auto kind = rgarch::distance_kind_from_string(a.distance);
  if (a.order.empty() == a.scan.empty())
    throw rgarch::validation_error("fit needs exactly one of --order P Q or --scan Pmax Qmax");
  const SeedChoice seed = resolve_seed(a.seed_given, a.seed);
  const fs::path dir = prepare_out_dir(a.out);
  const auto series =
      read_complete_series(a.data, "fit needs fully observed rankings (use mcem-fit)");

  rgarch::FitOptions fopt;
  fopt.n_starts = a.starts;
  fopt.seed = seed.value;

  json config;
  config["data"] = a.data;
  config["distance"] = rgarch::to_string(kind);
  config["seed"] = seed.value;
  config["seed_source"] = seed.source;
  config["n_starts"] = a.starts;

  rgarch::ModelOrder order;
  if (!a.scan.empty()) {
    if (a.scan[0] < 0 || a.scan[1] < 0)
      throw rgarch::validation_error("--scan bounds must be non-negative");
    const auto scan = rgarch::order_scan(series, kind, a.scan[0], a.scan[1], fopt);
    rgarch::write_order_scan_csv((dir / "order_scan.csv").string(), scan);
    order = scan.best_bic;
    config["scan"] = json{{"p_max", a.scan[0]},
                          {"q_max", a.scan[1]},
                          {"best_bic", order_json(scan.best_bic)},
                          {"best_aic", order_json(scan.best_aic)}};
    std::cout << "scan selected order (" << order.p << "," << order.q << ") by BIC\n";
  } else {
    if (a.order[0] < 0 || a.order[1] < 0)
      throw rgarch::validation_error("--order values must be non-negative");
    order = {a.order[0], a.order[1]};
  }
  config["order"] = order_json(order);

  const auto fit = rgarch::fit_mle(series, order, kind, fopt);
  write_text_file(dir / "fit.json", rgarch::fit_result_json(fit) + "\n");
  rgarch::write_mean_path_csv((dir / "mean_path.csv").string(), fit.path);
  rgarch::write_residuals_csv((dir / "residuals.csv").string(), fit);
  write_fit_acf(dir, series, fit);
  write_metadata(dir, "fit", config);

  print_fit_summary(fit);
  std::cout << "results in " << dir.string() << '\n';
  if (!fit.converged) {
    std::cerr << "error: fit did not converge; outputs describe the best point found\n";
    return 3;
  }
  return 0;
}

void setup_fit(CLI::App& app, int& exit_code) {
  auto a = std::make_shared<FitArgs>();
  CLI::App* cmd = app.add_subcommand("fit", "Fit a model to a complete ranking series");
  cmd->add_option("--data", a->data, "Rankings CSV")->required();
  auto* ord = cmd->add_option("--order", a->order,
                              "Model order: P distance lags, Q feedback lags")
                  ->expected(2);
  auto* scan = cmd->add_option("--scan", a->scan,
                               "Fit all orders up to (Pmax,Qmax), keep the best BIC")
                   ->expected(2);
  ord->excludes(scan);
  scan->excludes(ord);
  cmd->add_option("--distance", a->distance, "Distance between rankings")
      ->check(CLI::IsMember({"kendall", "hamming"}))
      ->capture_default_str();
  cmd->add_option("--starts", a->starts, "Optimizer start points")->capture_default_str();
  cmd->add_option("--seed", a->seed, "RNG seed (overrides RGARCH_SEED)");
  cmd->add_option("--out", a->out, "Output directory")->required();
  cmd->callback([a, cmd, &exit_code] {
    a->seed_given = cmd->count("--seed") > 0;
    exit_code = run_fit(*a);
  });
}

// ---------------------------------------------------------------- mcem-fit

struct McemArgs {
  std::string data;
  std::vector<int> order;
  std::string distance = "kendall";
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  bool seed_given = false;
  int imputations = 200;
  double epsilon = 0.05;
  double interval = 4.0;
  int max_iters = 60;
};

int run_mcem(const McemArgs& a) {
  const auto kind = rgarch::distance_kind_from_string(a.distance);
  if (a.order[0] < 0 || a.order[1] < 0)
    throw rgarch::validation_error("--order values must be non-negative");
  const SeedChoice seed = resolve_seed(a.seed_given, a.seed);
  const fs::path dir = prepare_out_dir(a.out);
  const auto series = rgarch::read_rankings_csv(a.data);

  rgarch::McemOptions mo;
  mo.initial_imputations = a.imputations;
  mo.precision_epsilon = a.epsilon;
  mo.interval_halfwidth = a.interval;
  mo.max_iterations = a.max_iters;
  mo.seed = seed.value;
  mo.fit.seed = seed.value;

  const rgarch::ModelOrder order{a.order[0], a.order[1]};
  const auto result = rgarch::mcem_fit(series, order, kind, mo);

  write_text_file(dir / "fit.json", rgarch::fit_result_json(result.fit) + "\n");
  rgarch::write_mcem_trace_csv((dir / "mcem_trace.csv").string(), result);
  rgarch::write_mean_path_csv((dir / "mean_path.csv").string(), result.fit.path);
  rgarch::write_residuals_csv((dir / "residuals.csv").string(), result.fit);

  json config;
  config["data"] = a.data;
  config["order"] = order_json(order);
  config["distance"] = rgarch::to_string(kind);
  config["incomplete_rows"] = series.n_incomplete_rows();
  config["imputations"] = a.imputations;
  config["epsilon"] = a.epsilon;
  config["interval"] = a.interval;
  config["max_iters"] = a.max_iters;
  config["seed"] = seed.value;
  config["seed_source"] = seed.source;
  write_metadata(dir, "mcem-fit", config);

  const int final_m = result.trace.empty() ? 0 : result.trace.back().n_imputations;
  std::cout << "EM ran " << result.trace.size() << " iteration(s), final imputation count "
            << final_m << '\n';
  print_fit_summary(result.fit);
  std::cout << "results in " << dir.string() << '\n';
  if (!result.fit.converged) {
    std::cerr << "error: EM did not reach its acceptance criterion; outputs describe the "
                 "last iterate\n";
    return 3;
  }
  return 0;
}

void setup_mcem(CLI::App& app, int& exit_code) {
  auto a = std::make_shared<McemArgs>();
  CLI::App* cmd =
      app.add_subcommand("mcem-fit", "Fit a model to a series with missing ranks");
  cmd->add_option("--data", a->data, "Rankings CSV (NA cells allowed)")->required();
  cmd->add_option("--order", a->order, "Model order: P distance lags, Q feedback lags")
      ->expected(2)
      ->required();
  cmd->add_option("--distance", a->distance, "Distance between rankings")
      ->check(CLI::IsMember({"kendall", "hamming"}))
      ->capture_default_str();
  cmd->add_option("--imputations", a->imputations, "Initial completions per missing row")
      ->capture_default_str();
  cmd->add_option("--epsilon", a->epsilon, "Target standard error of the likelihood gain")
      ->capture_default_str();
  cmd->add_option("--interval", a->interval, "Acceptance interval halfwidth in units of se")
      ->capture_default_str();
  cmd->add_option("--max-iters", a->max_iters, "Iteration budget")->capture_default_str();
  cmd->add_option("--seed", a->seed, "RNG seed (overrides RGARCH_SEED)");
  cmd->add_option("--out", a->out, "Output directory")->required();
  cmd->callback([a, cmd, &exit_code] {
    a->seed_given = cmd->count("--seed") > 0;
    exit_code = run_mcem(*a);
  });
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
  std::string data;
  std::string fit_file;
  double phi0 = 0;
  bool phi0_given = false;
  std::vector<double> phi;
  std::vector<double> alpha;
  std::string distance = "kendall";
  bool distance_given = false;
  std::string event;
  int draws = 500;
  std::string density = "mallows";
  bool exact = false;
  std::uint64_t seed = kDefaultSeed;
  bool seed_given = false;
  std::string out;
};

int run_predict(const PredictArgs& a) {
  const SeedChoice seed = resolve_seed(a.seed_given, a.seed);
  const fs::path dir = prepare_out_dir(a.out);
  const auto series =
      read_complete_series(a.data, "forecasting needs a fully observed history");

  rgarch::Coefficients coef;
  rgarch::DistanceKind kind = rgarch::DistanceKind::kendall;
  json model_source;
  if (!a.fit_file.empty()) {
    if (a.phi0_given || !a.phi.empty() || !a.alpha.empty() || a.distance_given)
      throw rgarch::validation_error(
          "give the model either as --fit or as inline --phi0/--phi/--alpha "
          "with --distance, not both");
    const auto m = load_fit_json(a.fit_file);
    if (m.k != series.k())
      throw rgarch::validation_error("fit file describes rankings of " + std::to_string(m.k) +
                                     " items but the data has " + std::to_string(series.k()));
    coef = m.coef;
    kind = m.kind;
    model_source = json{{"fit_file", a.fit_file}};
  } else {
    if (!a.phi0_given)
      throw rgarch::validation_error(
          "predict needs a model: --fit FILE or inline --phi0 (with optional --phi/--alpha)");
    coef = make_coefficients(a.phi0, a.phi, a.alpha);
    kind = rgarch::distance_kind_from_string(a.distance);
    model_source = json{{"inline", true}};
  }
  const rgarch::ModelOrder order = coef.order();

  const auto fc = rgarch::forecast_next(series, order, coef, kind);
  const rgarch::MallowsSpec spec(fc.mode, fc.theta, kind);

  json config;
  config["data"] = a.data;
  config["model"] = model_source;
  config["coefficients"] = coefficients_json(coef);
  config["order"] = order_json(order);
  config["distance"] = rgarch::to_string(kind);
  config["seed"] = seed.value;
  config["seed_source"] = seed.source;

  std::string j = "{";
  j += "\"mu\":" + rgarch::format_double(fc.mu);
  j += ",\"theta\":" + rgarch::format_double(fc.theta);
  j += ",\"clamped\":" + std::string(fc.clamped ? "true" : "false");
  j += ",\"distance\":\"" + std::string(rgarch::to_string(kind)) + "\"";
  j += ",\"mode\":[";
  for (int item = 1; item <= fc.mode.k(); ++item) {
    if (item > 1) j += ",";
    j += std::to_string(fc.mode.rank_of(item));
  }
  j += "]";

  char line[160];
  std::snprintf(line, sizeof line, "next-step mean %.6f, spread %.6f%s", fc.mu, fc.theta,
                fc.clamped ? " (clamped)" : "");
  std::cout << line << '\n';

  if (!a.event.empty()) {
    const rgarch::RankEvent ev(series.k(), parse_event_spec(a.event));
    const auto density = rgarch::proposal_density_from_string(a.density);
    config["event"] = a.event;
    config["exact"] = a.exact;
    config["draws"] = a.draws;
    config["density"] = rgarch::to_string(density);

    rgarch::Rng rng(seed.value);
    const auto est = rgarch::is_event_probability(ev, spec, a.draws, density, rng);

    j += ",\"event\":{\"fixed\":[";
    for (std::size_t i = 0; i < ev.fixed().size(); ++i) {
      if (i > 0) j += ",";
      j += "{\"item\":" + std::to_string(ev.fixed()[i].first) +
           ",\"rank\":" + std::to_string(ev.fixed()[i].second) + "}";
    }
    j += "],\"method\":\"";
    j += est.n_draws == 0 ? "exact" : "importance";
    j += "\",\"density\":\"" + std::string(rgarch::to_string(density)) + "\"";
    j += ",\"probability\":" + rgarch::format_double(est.estimate);
    j += ",\"std_error\":" + rgarch::format_double(est.std_error);
    j += ",\"n_draws\":" + std::to_string(est.n_draws);
    if (a.exact) {
      const double exact = rgarch::exact_event_probability(ev, spec);
      j += ",\"exact_probability\":" + rgarch::format_double(exact);
      std::snprintf(line, sizeof line, "P(event) = %.6g (se %.3g), exact %.6g", est.estimate,
                    est.std_error, exact);
    } else {
      std::snprintf(line, sizeof line, "P(event) = %.6g (se %.3g)", est.estimate,
                    est.std_error);
    }
    j += "}";
    std::cout << line << '\n';
  }
  j += "}";

  write_text_file(dir / "prediction.json", j + "\n");
  write_metadata(dir, "predict", config);
  std::cout << "results in " << dir.string() << '\n';
  return 0;
}

void setup_predict(CLI::App& app, int& exit_code) {
  auto a = std::make_shared<PredictArgs>();
  CLI::App* cmd = app.add_subcommand(
      "predict", "One-step-ahead forecast and next-ranking event probability");
  cmd->add_option("--data", a->data, "Rankings CSV holding the observed history")->required();
  cmd->add_option("--fit", a->fit_file, "fit.json produced by the fit or mcem-fit command");
  cmd->add_option("--phi0", a->phi0, "Baseline level (inline model)");
  cmd->add_option("--phi", a->phi, "Distance-lag coefficients (inline model)");
  cmd->add_option("--alpha", a->alpha, "Feedback coefficients (inline model)");
  cmd->add_option("--distance", a->distance, "Distance between rankings (inline model)")
      ->check(CLI::IsMember({"kendall", "hamming"}))
      ->capture_default_str();
  cmd->add_option("--event", a->event, "Next-ranking event, e.g. \"3=1,7=2\" (item=rank)");
  cmd->add_option("--draws", a->draws, "Importance-sampling draws")->capture_default_str();
  cmd->add_option("--density", a->density, "Proposal density for the event probability")
      ->check(CLI::IsMember({"uniform", "mallows"}))
      ->capture_default_str();
  cmd->add_flag("--exact", a->exact,
                "Also compute the exact probability by enumeration (few free items only)");
  cmd->add_option("--seed", a->seed, "RNG seed (overrides RGARCH_SEED)");
  cmd->add_option("--out", a->out, "Output directory")->required();
  cmd->callback([a, cmd, &exit_code] {
    a->seed_given = cmd->count("--seed") > 0;
    a->phi0_given = cmd->count("--phi0") > 0;
    a->distance_given = cmd->count("--distance") > 0;
    exit_code = run_predict(*a);
  });
}

// --------------------------------------------------------------------- acf

struct AcfArgs {
  std::string data;
  std::string distance = "kendall";
  int max_lag = 20;
  std::string fit_file;
  std::string out;
};

int run_acf(const AcfArgs& a) {
  const auto kind = rgarch::distance_kind_from_string(a.distance);
  const fs::path dir = prepare_out_dir(a.out);
  const auto series =
      read_complete_series(a.data, "the distance series needs fully observed rankings");
  const auto d = series.distance_series(kind);
  const std::vector<double> x(d.begin(), d.end());
  const auto acf = rgarch::empirical_acf_pacf(x, a.max_lag);

  json config;
  config["data"] = a.data;
  config["distance"] = rgarch::to_string(kind);
  config["max_lag"] = a.max_lag;

  std::optional<std::vector<double>> model;
  if (!a.fit_file.empty()) {
    const auto m = load_fit_json(a.fit_file);
    if (m.k != series.k())
      throw rgarch::validation_error("fit file describes rankings of " + std::to_string(m.k) +
                                     " items but the data has " + std::to_string(series.k()));
    if (m.kind != kind)
      throw rgarch::validation_error(
          std::string("fit file uses the ") + rgarch::to_string(m.kind) +
          " distance but --distance is " + rgarch::to_string(kind));
    if (m.order.p != 1 || m.order.q > 1)
      throw rgarch::validation_error(
          "the model correlation overlay needs a fitted order (1,0) or (1,1); the fit file "
          "has (" +
          std::to_string(m.order.p) + "," + std::to_string(m.order.q) + ")");
    const double alpha1 = m.order.q == 1 ? m.coef.alpha[0] : 0.0;
    const auto theo = rgarch::theoretical_acf_11(m.coef.phi[0], alpha1, 1.0);
    std::vector<double> rho(static_cast<std::size_t>(a.max_lag) + 1, 1.0);
    for (int h = 1; h <= a.max_lag; ++h) rho[static_cast<std::size_t>(h)] = theo.rho(h);
    model = std::move(rho);
    config["fit_file"] = a.fit_file;
  }

  rgarch::write_acf_csv((dir / "acf.csv").string(), acf, model ? &*model : nullptr);
  write_metadata(dir, "acf", config);
  std::cout << "wrote autocorrelations to lag " << a.max_lag << " over " << x.size()
            << " distances to " << dir.string() << '\n';
  return 0;
}

void setup_acf(CLI::App& app, int& exit_code) {
  auto a = std::make_shared<AcfArgs>();
  CLI::App* cmd =
      app.add_subcommand("acf", "Autocorrelations of the lag-1 distance series");
  cmd->add_option("--data", a->data, "Rankings CSV")->required();
  cmd->add_option("--distance", a->distance, "Distance between rankings")
      ->check(CLI::IsMember({"kendall", "hamming"}))
      ->capture_default_str();
  cmd->add_option("--max-lag", a->max_lag, "Largest lag to report")->capture_default_str();
  cmd->add_option("--fit", a->fit_file,
                  "fit.json of an order (1,0) or (1,1) model: adds a model_rho column");
  cmd->add_option("--out", a->out, "Output directory")->required();
  cmd->callback([a, &exit_code] { exit_code = run_acf(*a); });
}

// --------------------------------------------------------------- replicate

struct ReplicateArgs {
  int k = 10;
  int n = 500;
  int reps = 100;
  double phi0 = 0;
  std::vector<double> phi;
  std::vector<double> alpha;
  std::string distance = "kendall";
  std::uint64_t seed = kDefaultSeed;
  bool seed_given = false;
  int workers = 1;
  double missing = 0.0;
  bool use_mcem = false;
  int imputations = 200;
  double epsilon = 0.05;
  std::string out;
};

int run_replicate(const ReplicateArgs& a) {
  rgarch::ReplicationConfig config;
  config.k = a.k;
  config.n = a.n;
  config.reps = a.reps;
  config.truth = make_coefficients(a.phi0, a.phi, a.alpha);
  config.kind = rgarch::distance_kind_from_string(a.distance);
  const SeedChoice seed = resolve_seed(a.seed_given, a.seed);
  config.seed = seed.value;
  config.workers = a.workers;
  config.missing_fraction = a.missing;
  config.use_mcem = a.use_mcem;
  config.mcem.initial_imputations = a.imputations;
  config.mcem.precision_epsilon = a.epsilon;
  config.validate();
  const fs::path dir = prepare_out_dir(a.out);

  const auto result = rgarch::run_replications(config);
  write_text_file(dir / "replication.json",
                  rgarch::replication_summary_json(config, result) + "\n");

  const auto names = coefficient_names(config.truth.order());
  std::ostringstream os;
  os << "rep,ok,converged";
  for (const auto& name : names) os << ',' << name;
  for (const auto& name : names) os << ",se_" << name;
  os << ",message\n";
  for (const auto& rep : result.reps) {
    os << rep.rep << ',' << (rep.ok ? 1 : 0) << ',' << (rep.converged ? 1 : 0);
    for (std::size_t i = 0; i < names.size(); ++i) {
      os << ',';
      if (i < rep.estimate.size()) os << rgarch::format_double(rep.estimate[i]);
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      os << ',';
      if (i < rep.std_errors.size()) os << rgarch::format_double(rep.std_errors[i]);
    }
    os << ',' << csv_quote(rep.message) << '\n';
  }
  write_text_file(dir / "estimates.csv", os.str());

  json meta;
  meta["k"] = a.k;
  meta["n"] = a.n;
  meta["reps"] = a.reps;
  meta["truth"] = coefficients_json(config.truth);
  meta["order"] = order_json(config.truth.order());
  meta["distance"] = rgarch::to_string(config.kind);
  meta["seed"] = seed.value;
  meta["seed_source"] = seed.source;
  meta["workers"] = a.workers;
  meta["missing_fraction"] = a.missing;
  meta["use_mcem"] = config.use_mcem || a.missing > 0;
  meta["imputations"] = a.imputations;
  meta["epsilon"] = a.epsilon;
  write_metadata(dir, "replicate", meta);

  char line[200];
  std::cout << result.n_converged << "/" << a.reps << " replications converged ("
            << result.n_ok << " produced a fit)\n";
  std::snprintf(line, sizeof line, "  %-8s %10s %10s %10s %10s %10s", "coef", "truth", "mean",
                "sd", "mse", "mean_se");
  std::cout << line << '\n';
  for (const auto& s : result.summary) {
    std::snprintf(line, sizeof line, "  %-8s %10.5f %10.5f %10.5f %10.5f %10.5f",
                  s.name.c_str(), s.truth, s.mean, s.sd, s.mse, s.mean_se);
    std::cout << line << '\n';
  }
  std::cout << "results in " << dir.string() << '\n';
  if (result.n_converged == 0) {
    std::cerr << "error: no replication converged\n";
    return 3;
  }
  return 0;
}

void setup_replicate(CLI::App& app, int& exit_code) {
  auto a = std::make_shared<ReplicateArgs>();
  CLI::App* cmd = app.add_subcommand(
      "replicate", "Simulate-and-refit study of the sampling distribution");
  cmd->add_option("--k", a->k, "Number of ranked items")->required();
  cmd->add_option("--n", a->n, "Series length")->required();
  cmd->add_option("--reps", a->reps, "Number of replications")->capture_default_str();
  cmd->add_option("--phi0", a->phi0, "Baseline level of the generating model")->required();
  cmd->add_option("--phi", a->phi, "Distance-lag coefficients of the generating model");
  cmd->add_option("--alpha", a->alpha, "Feedback coefficients of the generating model");
  cmd->add_option("--distance", a->distance, "Distance between rankings")
      ->check(CLI::IsMember({"kendall", "hamming"}))
      ->capture_default_str();
  cmd->add_option("--seed", a->seed, "RNG seed (overrides RGARCH_SEED)");
  cmd->add_option("--workers", a->workers, "Worker threads")->capture_default_str();
  cmd->add_option("--missing", a->missing,
                  "Fraction of rank cells deleted before fitting")
      ->capture_default_str();
  cmd->add_flag("--use-mcem", a->use_mcem,
                "Fit with the EM algorithm even when the data is complete");
  cmd->add_option("--imputations", a->imputations,
                  "Initial completions per missing row (EM path)")
      ->capture_default_str();
  cmd->add_option("--epsilon", a->epsilon,
                  "Target standard error of the likelihood gain (EM path)")
      ->capture_default_str();
  cmd->add_option("--out", a->out, "Output directory")->required();
  cmd->callback([a, cmd, &exit_code] {
    a->seed_given = cmd->count("--seed") > 0;
    exit_code = run_replicate(*a);
  });
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);

  CLI::App app{"Autoregressive conditional models for ranking time series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rgarch::version_string);

  int exit_code = 0;
  setup_simulate(app, exit_code);
  setup_fit(app, exit_code);
  setup_mcem(app, exit_code);
  setup_predict(app, exit_code);
  setup_acf(app, exit_code);
  setup_replicate(app, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const rgarch::validation_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const rgarch::convergence_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
