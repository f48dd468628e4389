#include "cli/commands.h"

#include <CLI11.hpp>
#include <cstdio>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mlfd/datasets.h"
#include "mlfd/distribution.h"
#include "mlfd/errors.h"
#include "mlfd/inference.h"
#include "mlfd/queue_sim.h"
#include "mlfd/special_functions.h"

namespace mlfd::cli {

namespace {

using json = nlohmann::ordered_json;
using inference::FitResult;
using inference::ModelKind;

const std::uint64_t kDefaultFitSeed = inference::FitOptions{}.seed;
constexpr std::uint64_t kDefaultSimSeed = 1;

/// Values shared by every subcommand; filled in by CLI11.
struct Args {
  std::optional<std::uint64_t> seed;
  int restarts = inference::FitOptions{}.restarts;
  double tol = inference::FitOptions{}.x_tol;
  std::size_t max_evals = inference::FitOptions{}.max_evals_per_start;
  bool json_out = false;

  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double z = 0.0;
  bool log = false;
  std::uint64_t kmax = 20;

  std::string dataset;
  std::string model = "full";
  std::string null_model = "hp";

  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;

  double arrival = 0.0;
  double service = 1.0;
  unsigned pressure = 1;
  std::optional<double> measure_time;
  double warmup = 0.0;
  std::uint64_t max_state = 0;
};

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json envelope(const char* command, json inputs, json outputs) {
  json j;
  j["command"] = command;
  j["inputs"] = std::move(inputs);
  j["outputs"] = std::move(outputs);
  return j;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

json params_json(const MlfdParams& p) {
  return json{{"lambda", p.lambda()}, {"alpha", p.alpha()}, {"beta", p.beta()}};
}

inference::FitOptions fit_options(const Args& a) {
  inference::FitOptions o;
  o.seed = a.seed.value_or(kDefaultFitSeed);
  o.restarts = a.restarts;
  o.x_tol = a.tol;
  o.max_evals_per_start = a.max_evals;
  return o;
}

json dataset_inputs(const data::Dataset& d, const Args& a) {
  return json{{"dataset", d.name},
              {"source", d.source == data::Source::fixture ? "fixture" : "file"},
              {"n", d.table.n()},
              {"seed", a.seed.value_or(kDefaultFitSeed)},
              {"restarts", a.restarts},
              {"tol", a.tol},
              {"max_evals", a.max_evals}};
}

json fit_json(const FitResult& r) {
  json j;
  j["model"] = std::string(inference::to_string(r.kind));
  j["params"] = params_json(r.params);
  j["free_parameters"] = inference::free_parameter_names(r.kind);
  j["loglik"] = r.loglik;
  j["aic"] = r.aic;
  j["converged"] = r.converged;
  j["at_bound"] = r.at_bound;
  j["n_restarts_used"] = r.n_restarts_used;
  j["n_evals"] = r.n_evals;
  j["simplex_diameter"] = r.simplex_diameter;
  if (r.cov) {
    json rows = json::array();
    for (std::size_t i = 0; i < r.cov->n; ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < r.cov->n; ++k) row.push_back((*r.cov)(i, k));
      rows.push_back(std::move(row));
    }
    j["covariance"] = std::move(rows);
  } else {
    j["covariance"] = nullptr;
  }
  return j;
}

json lr_json(const FitResult& restricted, const inference::LrTestResult& t) {
  return json{{"restricted", std::string(inference::to_string(restricted.kind))},
              {"full", "full"},
              {"statistic", t.statistic},
              {"df", t.df},
              {"p_value", t.p_value}};
}

const char* label(ModelKind k) {
  switch (k) {
    case ModelKind::Full:
      return "Full";
    case ModelKind::HpAlphaFixed1:
      return "HP";
    case ModelKind::Beta1Fixed:
      return "Beta1";
  }
  return "?";
}

void fit_table(std::ostream& out, const std::vector<const FitResult*>& fits) {
  out << std::left << std::setw(8) << "Model" << std::right << std::setw(14) << "lambda" << std::setw(14) << "alpha"
      << std::setw(14) << "beta" << std::setw(14) << "loglik" << std::setw(14) << "AIC" << "  flags\n";
  for (const FitResult* r : fits) {
    std::string flags = r->converged ? "" : " not-converged";
    if (r->at_bound) flags += " at-bound";
    out << std::left << std::setw(8) << label(r->kind) << std::right << std::setw(14) << g6(r->params.lambda())
        << std::setw(14) << g6(r->params.alpha()) << std::setw(14) << g6(r->params.beta()) << std::setw(14)
        << g6(r->loglik) << std::setw(14) << g6(r->aic) << ' ' << flags << '\n';
  }
}

void lr_table(std::ostream& out, const std::vector<std::pair<const FitResult*, inference::LrTestResult>>& rows) {
  out << std::left << std::setw(16) << "LR test" << std::right << std::setw(14) << "statistic" << std::setw(6) << "df"
      << std::setw(14) << "p-value" << '\n';
  for (const auto& [restricted, t] : rows) {
    out << std::left << std::setw(16) << (std::string(label(restricted->kind)) + " vs Full") << std::right
        << std::setw(14) << g6(t.statistic) << std::setw(6) << t.df << std::setw(14) << g6(t.p_value) << '\n';
  }
}

void covariance_table(std::ostream& out, const FitResult& r) {
  if (!r.cov) {
    out << "covariance: unavailable" << (r.at_bound ? " (boundary solution)" : "") << '\n';
    return;
  }
  const auto names = inference::free_parameter_names(r.kind);
  out << "covariance:\n" << std::setw(8) << "";
  for (const auto& n : names) out << std::setw(14) << n;
  out << '\n';
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << std::left << std::setw(8) << names[i] << std::right;
    for (std::size_t k = 0; k < names.size(); ++k) out << std::setw(14) << g6((*r.cov)(i, k));
    out << '\n';
  }
}

int exit_for(std::initializer_list<const FitResult*> fits) {
  for (const FitResult* r : fits) {
    if (!r->converged) return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_eval(const Args& a, std::ostream& out) {
  json inputs{{"alpha", a.alpha}, {"beta", a.beta}, {"z", a.z}, {"log", a.log}};
  json outputs;
  if (a.log) {
    const auto v = special::log_mlf(a.alpha, a.beta, a.z);
    outputs = {{"log_value", v.log_value}, {"terms_used", v.terms_used}, {"tail_bound", v.tail_bound}};
  } else {
    const auto v = special::mlf(a.alpha, a.beta, a.z);
    outputs = {{"value", v.value}, {"log_value", v.log_value}, {"terms_used", v.terms_used}, {"tail_bound", v.tail_bound}};
  }
  emit(out, envelope("eval", std::move(inputs), std::move(outputs)));
  return kExitOk;
}

int cmd_pmf(const Args& a, std::ostream& out) {
  const MlfdParams p(a.lambda, a.alpha, a.beta);
  const PmfTable t = pmf_table(p, a.kmax);
  json inputs = params_json(p);
  inputs["kmax"] = a.kmax;
  emit(out, envelope("pmf", std::move(inputs), json{{"probs", t.probs}, {"tail_mass", t.tail_mass}}));
  return kExitOk;
}

int cmd_moments(const Args& a, std::ostream& out) {
  const MlfdParams p(a.lambda, a.alpha, a.beta);
  const double m = mean(p);
  const double v = variance(p);
  const double id = v / m;
  json outputs{{"mean", m},
               {"variance", v},
               {"index_of_dispersion", id},
               {"dispersion_class", std::string(to_string(classify_dispersion(id)))}};
  emit(out, envelope("moments", params_json(p), std::move(outputs)));
  return kExitOk;
}

int cmd_shape(const Args& a, std::ostream& out) {
  const MlfdParams p(a.lambda, a.alpha, a.beta);
  const ShapeReport s = mode_set(p);
  json outputs{{"modes", s.modes},
               {"shape_class", std::string(to_string(s.shape_class))},
               {"dispersion_class", std::string(to_string(s.dispersion_class))},
               {"index_of_dispersion", s.index_of_dispersion}};
  emit(out, envelope("shape", params_json(p), std::move(outputs)));
  return kExitOk;
}

int cmd_dispersion_grid(const Args& a, std::ostream& out) {
  const auto grid = dispersion_grid(a.lambda, a.alpha_grid, a.beta_grid);
  json inputs{{"lambda", a.lambda}, {"alpha", a.alpha_grid}, {"beta", a.beta_grid}};
  emit(out, envelope("dispersion-grid", std::move(inputs), json{{"index_of_dispersion", grid}}));
  return kExitOk;
}

int cmd_fit(const Args& a, std::ostream& out) {
  const data::Dataset d = data::load_dataset(a.dataset);
  const ModelKind kind = inference::parse_model_kind(a.model);
  const FitResult r = inference::fit(d.table, kind, fit_options(a));
  if (a.json_out) {
    json inputs = dataset_inputs(d, a);
    inputs["model"] = a.model;
    emit(out, envelope("fit", std::move(inputs), fit_json(r)));
  } else {
    out << "dataset: " << d.name << " (n = " << d.table.n() << ")\n";
    fit_table(out, {&r});
    covariance_table(out, r);
  }
  return exit_for({&r});
}

/// Fits `restricted`, then the full model seeded with the restricted optimum.
std::pair<FitResult, FitResult> nested_pair(const data::Dataset& d, ModelKind restricted, const Args& a) {
  auto opts = fit_options(a);
  FitResult r = inference::fit(d.table, restricted, opts);
  opts.extra_starts.push_back(r.params);
  FitResult f = inference::fit(d.table, ModelKind::Full, opts);
  return {std::move(r), std::move(f)};
}

int cmd_compare(const Args& a, std::ostream& out) {
  const data::Dataset d = data::load_dataset(a.dataset);
  auto opts = fit_options(a);
  const FitResult hp = inference::fit(d.table, ModelKind::HpAlphaFixed1, opts);
  const FitResult b1 = inference::fit(d.table, ModelKind::Beta1Fixed, opts);
  opts.extra_starts = {hp.params, b1.params};
  const FitResult full = inference::fit(d.table, ModelKind::Full, opts);
  const auto t_hp = inference::lr_test(hp, full);
  const auto t_b1 = inference::lr_test(b1, full);

  if (a.json_out) {
    json outputs;
    outputs["fits"] = json::array({fit_json(hp), fit_json(b1), fit_json(full)});
    outputs["lr_tests"] = json::array({lr_json(hp, t_hp), lr_json(b1, t_b1)});
    emit(out, envelope("compare", dataset_inputs(d, a), std::move(outputs)));
  } else {
    out << "dataset: " << d.name << " (n = " << d.table.n() << ")\n";
    fit_table(out, {&hp, &b1, &full});
    out << '\n';
    lr_table(out, {{&hp, t_hp}, {&b1, t_b1}});
  }
  return exit_for({&hp, &b1, &full});
}

int cmd_lr_test(const Args& a, std::ostream& out) {
  const data::Dataset d = data::load_dataset(a.dataset);
  const ModelKind null_kind = inference::parse_model_kind(a.null_model);
  if (null_kind == ModelKind::Full) throw DomainError("lr-test: --null must be hp or beta1");
  const auto [restricted, full] = nested_pair(d, null_kind, a);
  const auto t = inference::lr_test(restricted, full);
  if (a.json_out) {
    json inputs = dataset_inputs(d, a);
    inputs["null"] = a.null_model;
    json outputs{{"restricted_fit", fit_json(restricted)}, {"full_fit", fit_json(full)}, {"test", lr_json(restricted, t)}};
    emit(out, envelope("lr-test", std::move(inputs), std::move(outputs)));
  } else {
    out << "dataset: " << d.name << " (n = " << d.table.n() << ")\n";
    fit_table(out, {&restricted, &full});
    out << '\n';
    lr_table(out, {{&restricted, t}});
  }
  return exit_for({&restricted, &full});
}

int cmd_simulate(const Args& a, std::ostream& out) {
  queue::QueueConfig c;
  c.arrival_rate = a.arrival;
  c.base_service_rate = a.service;
  c.pressure = a.pressure;
  c.measure_time = a.measure_time.value_or(1e5 / a.service);
  c.warmup_time = a.warmup;
  c.max_state = a.max_state;
  c.seed = a.seed.value_or(kDefaultSimSeed);
  queue::validate(c);

  const queue::OccupancyHistogram h = queue::simulate(c);
  const auto max_state = static_cast<std::uint64_t>(h.time_in_state.size() - 1);
  const PmfTable exact = queue::stationary_exact(c.traffic(), c.pressure, max_state);
  const std::vector<double> empirical = h.probabilities();

  json inputs{{"arrival", c.arrival_rate},
              {"service", c.base_service_rate},
              {"pressure", c.pressure},
              {"measure_time", c.measure_time},
              {"warmup", c.warmup_time > 0.0 ? c.warmup_time : 0.1 * c.measure_time},
              {"max_state", max_state},
              {"seed", c.seed}};
  json outputs{{"traffic", c.traffic()},
               {"tv_distance", queue::tv_distance(empirical, exact)},
               {"mean_simulated", h.mean()},
               {"mean_exact", mean(MlfdParams(c.traffic(), c.pressure, 1.0))},
               {"events", h.events},
               {"rejected_arrivals", h.rejected_arrivals},
               {"total_time", h.total_time},
               {"occupancy", empirical},
               {"exact", exact.probs},
               {"exact_tail_mass", exact.tail_mass}};
  emit(out, envelope("simulate", std::move(inputs), std::move(outputs)));
  return kExitOk;
}

std::vector<double> default_grid(double step, int count) {
  std::vector<double> g;
  for (int i = 1; i <= count; ++i) g.push_back(step * i);
  return g;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Args a;
  a.alpha_grid = default_grid(0.25, 12);
  a.beta_grid = default_grid(0.25, 20);

  CLI::App app{"Mittag-Leffler function distribution: evaluation, fitting and queue simulation", "mlfd"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", a.seed, "Seed for fit restarts and simulation");
  app.add_option("--restarts", a.restarts, "Fit starting points")->check(CLI::PositiveNumber);
  app.add_option("--tol", a.tol, "Simplex diameter tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-evals", a.max_evals, "Likelihood evaluations per starting point")->check(CLI::PositiveNumber);
  app.add_flag("--json", a.json_out, "Machine-readable output for fit, compare and lr-test");

  auto* eval = app.add_subcommand("eval", "Evaluate the Mittag-Leffler function E_{alpha,beta}(z)");
  eval->add_option("--alpha", a.alpha)->required();
  eval->add_option("--beta", a.beta)->required();
  eval->add_option("--z", a.z)->required();
  eval->add_flag("--log", a.log, "Report ln E only (no overflow)");

  auto params = [&](CLI::App* sub) {
    sub->add_option("--lambda", a.lambda)->required();
    sub->add_option("--alpha", a.alpha)->required();
    sub->add_option("--beta", a.beta)->required();
  };
  auto* pmf_cmd = app.add_subcommand("pmf", "Probability table P(X = 0..kmax) and remaining mass");
  params(pmf_cmd);
  pmf_cmd->add_option("--kmax", a.kmax, "Last tabulated value")->capture_default_str();
  auto* moments_cmd = app.add_subcommand("moments", "Mean, variance and index of dispersion");
  params(moments_cmd);
  auto* shape_cmd = app.add_subcommand("shape", "Modes and shape class");
  params(shape_cmd);

  auto* grid_cmd = app.add_subcommand("dispersion-grid", "Index of dispersion over an (alpha, beta) grid");
  grid_cmd->add_option("--lambda", a.lambda)->required();
  grid_cmd->add_option("--alpha", a.alpha_grid, "Comma-separated alpha values")->delimiter(',');
  grid_cmd->add_option("--beta", a.beta_grid, "Comma-separated beta values")->delimiter(',');

  auto dataset_arg = [&](CLI::App* sub) {
    sub->add_option("dataset", a.dataset, "Fixture name (lundberg, taylor, skellam) or CSV path")->required();
  };
  auto* fit_cmd = app.add_subcommand("fit", "Maximum likelihood fit of one model");
  dataset_arg(fit_cmd);
  fit_cmd->add_option("--model", a.model)->check(CLI::IsMember({"full", "hp", "beta1"}))->capture_default_str();
  auto* compare_cmd = app.add_subcommand("compare", "Fit all three models and test the nested ones");
  dataset_arg(compare_cmd);
  auto* lr_cmd = app.add_subcommand("lr-test", "Likelihood-ratio test of a restricted model against the full one");
  dataset_arg(lr_cmd);
  lr_cmd->add_option("--null", a.null_model)->check(CLI::IsMember({"hp", "beta1"}))->capture_default_str();

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the state-dependent queue and compare with the exact law");
  sim_cmd->add_option("--arrival", a.arrival)->required();
  sim_cmd->add_option("--service", a.service)->capture_default_str();
  sim_cmd->add_option("--pressure", a.pressure)->capture_default_str();
  sim_cmd->add_option("--measure-time", a.measure_time, "Default 1e5 / service");
  sim_cmd->add_option("--warmup", a.warmup, "Default 10% of the measure time");
  sim_cmd->add_option("--max-state", a.max_state, "Default: tail mass below 1e-8");

  std::vector<const char*> argv{"mlfd"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (eval->parsed()) return cmd_eval(a, out);
    if (pmf_cmd->parsed()) return cmd_pmf(a, out);
    if (moments_cmd->parsed()) return cmd_moments(a, out);
    if (shape_cmd->parsed()) return cmd_shape(a, out);
    if (grid_cmd->parsed()) return cmd_dispersion_grid(a, out);
    if (fit_cmd->parsed()) return cmd_fit(a, out);
    if (compare_cmd->parsed()) return cmd_compare(a, out);
    if (lr_cmd->parsed()) return cmd_lr_test(a, out);
    if (sim_cmd->parsed()) return cmd_simulate(a, out);
  } catch (const OverflowError& e) {
    err << "error: " << e.what() << " (use --log)\n";
    return kExitInput;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace mlfd::cli
