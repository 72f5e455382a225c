// SPDX-License-Identifier: Apache-2.0

#include "qnnae/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <new>
#include <ostream>
#include <sstream>

#include "qnnae/dataio.hpp"
#include "qnnae/errors.hpp"
#include "qnnae/evaluation.hpp"
#include "qnnae/pqm.hpp"
#include "qnnae/report.hpp"
#include "qnnae/text.hpp"

namespace qnnae::cli {
namespace {

struct PqmOptions {
  std::string memory_file;
  std::string input_bits;
  std::size_t shots = 0;
  bool circuit = false;
  unsigned long long seed = kDefaultSeed;
};

// Options shared by `evaluate` and `sweep`.
struct RunConfig {
  std::string dataset;
  std::size_t samples = 1000;
  unsigned long long seed = kDefaultSeed;
  std::size_t max_iter = 400;
  double alpha = 1e-5;
  double learning_rate = 1.0;
  double tolerance = 1e-5;
  double train_fraction = 0.1;
  bool no_stratify = false;
  std::string activation = "logistic";
  std::size_t threads = 1;
  bool exhaustive = false;
  std::string levels = "-1,0,1";
  std::size_t budget = evaluation::WeightGrid::kDefaultBudget;
  bool train_grid = false;
  std::size_t kappa = 0;
  std::string out_path;
  std::string performances_path;
  bool print_config = false;

  // evaluate
  std::size_t hidden = 0;
  // sweep
  std::vector<std::size_t> hidden_range{1, 20};
  std::string plot_path;
};

struct SynthOptions {
  std::string kind = "xor";
  std::size_t n = 400;
  double noise = 0.25;
  unsigned long long seed = kDefaultSeed;
  std::string out_path;
};

std::vector<double> parse_levels(const std::string& text_levels) {
  std::vector<double> levels;
  for (auto token : text::split(text_levels, ',')) {
    const auto value = text::parse_double(text::trim(token));
    if (!value) throw DataError("bad grid level '" + std::string(token) + "'");
    levels.push_back(*value);
  }
  return levels;
}

evaluation::EvaluationConfig to_evaluation_config(const RunConfig& rc) {
  evaluation::EvaluationConfig cfg;
  cfg.train.max_iter = rc.max_iter;
  cfg.train.l2_alpha = rc.alpha;
  cfg.train.learning_rate = rc.learning_rate;
  cfg.train.tolerance = rc.tolerance;
  cfg.train_fraction = rc.train_fraction;
  cfg.stratified = !rc.no_stratify;
  cfg.num_samples = rc.samples;
  cfg.seed = rc.seed;
  cfg.threads = std::max<std::size_t>(1, rc.threads);
  cfg.activation = mlp::parse_activation(rc.activation);
  cfg.train_grid_points = rc.train_grid;
  cfg.kappa = rc.kappa;
  cfg.keep_performances = !rc.performances_path.empty();
  cfg.train.validate();
  if (cfg.num_samples == 0) throw DataError("--samples must be at least 1");
  return cfg;
}

void print_config(std::ostream& out, const RunConfig& rc, bool sweep) {
  out << "alpha=" << text::format_double(rc.alpha) << '\n'
      << "max_iter=" << rc.max_iter << '\n'
      << "learning_rate=" << text::format_double(rc.learning_rate) << '\n'
      << "tolerance=" << text::format_double(rc.tolerance) << '\n'
      << "samples=" << rc.samples << '\n';
  if (sweep) {
    out << "hidden_range=[" << rc.hidden_range[0] << ',' << rc.hidden_range[1] << ")\n";
  } else {
    out << "hidden=" << rc.hidden << '\n';
  }
  out << "train_fraction=" << text::format_double(rc.train_fraction) << '\n'
      << "stratified=" << (rc.no_stratify ? "false" : "true") << '\n'
      << "activation=" << rc.activation << '\n'
      << "mode=" << (rc.exhaustive ? "exhaustive" : "sampled") << '\n'
      << "seed=" << rc.seed << '\n'
      << "threads=" << rc.threads << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path);
  return file;
}

void add_run_options(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--samples", rc.samples, "Weight initializations per architecture")
      ->capture_default_str();
  cmd->add_option("--seed", rc.seed, "Master seed for the split and initializations")
      ->capture_default_str();
  cmd->add_option("--max-iter", rc.max_iter, "Gradient-descent iterations")->capture_default_str();
  cmd->add_option("--alpha", rc.alpha, "L2 penalty")->capture_default_str();
  cmd->add_option("--learning-rate", rc.learning_rate, "Initial line-search step")
      ->capture_default_str();
  cmd->add_option("--tolerance", rc.tolerance, "Gradient-norm stopping threshold")
      ->capture_default_str();
  cmd->add_option("--train-fraction", rc.train_fraction, "Fraction of rows used for training")
      ->capture_default_str();
  cmd->add_flag("--no-stratify", rc.no_stratify, "Plain random split instead of stratified");
  cmd->add_option("--activation", rc.activation, "Hidden activation: logistic, tanh, relu")
      ->capture_default_str();
  cmd->add_option("--threads", rc.threads, "Worker threads (results do not depend on it)")
      ->capture_default_str();
  cmd->add_flag("--exhaustive", rc.exhaustive, "Enumerate a quantized weight grid");
  cmd->add_option("--levels", rc.levels, "Grid levels, comma separated")->capture_default_str();
  cmd->add_option("--budget", rc.budget, "Maximum grid points")->capture_default_str();
  cmd->add_flag("--train-grid", rc.train_grid, "Train from each grid point");
  cmd->add_option("--kappa", rc.kappa, "Simulated repetitions of the one-bit readout");
  cmd->add_option("--out", rc.out_path, "CSV output path (default: standard output)");
  cmd->add_option("--performances", rc.performances_path,
                  "Write the performance bit-matrix to this path");
  cmd->add_flag("--print-config", rc.print_config, "Print the resolved configuration and exit");
}

int run_pqm(const PqmOptions& opt, std::ostream& out) {
  const auto memory = pqm::PatternMemory::load(opt.memory_file);
  const auto input = pqm::BitString::parse(opt.input_bits);
  const auto analytic = pqm::retrieve_analytic(memory, input);
  out << "patterns=" << memory.size() << " length=" << memory.pattern_length() << '\n';
  out << "p0=" << text::format_fixed(analytic.p0, 6) << '\n';
  out << "p1=" << text::format_fixed(analytic.p1, 6) << '\n';
  if (!opt.circuit && opt.shots == 0) return kSuccess;

  const auto exact = pqm::retrieve_exact_from_circuit(memory, input);
  out << "circuit_p0=" << text::format_fixed(exact.p0, 6) << '\n';
  out << "circuit_p1=" << text::format_fixed(exact.p1, 6) << '\n';
  out << "difference=" << text::format_double(std::abs(exact.p0 - analytic.p0)) << '\n';
  if (opt.shots > 0) {
    const auto shots = pqm::retrieve_circuit(memory, input, opt.shots, opt.seed);
    out << "shots=" << opt.shots << " count0=" << shots.count0 << " count1=" << shots.count1
        << '\n';
    out << "shot_p0=" << text::format_fixed(shots.estimate.p0, 6) << '\n';
  }
  return kSuccess;
}

void print_summary(std::ostream& os, const evaluation::ArchitectureReport& r) {
  os << "hidden=" << r.architecture.hidden_neurons
     << " score_p0=" << text::format_fixed(r.score_p0, 6)
     << " mean_accuracy=" << text::format_fixed(r.mean_accuracy, 6)
     << " samples=" << r.num_samples << " excluded=" << r.excluded << '\n';
  if (r.repetition) {
    os << "  kappa=" << r.repetition->kappa << " zeros=" << r.repetition->zeros
       << " estimate=" << text::format_fixed(r.repetition->estimate, 6)
       << " stderr=" << text::format_fixed(r.repetition->standard_error, 6) << '\n';
  }
}

int run_evaluate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.print_config) {
    print_config(out, rc, false);
    return kSuccess;
  }
  if (rc.dataset.empty()) throw DataError("evaluate: a dataset path is required");
  if (rc.hidden == 0) throw DataError("evaluate: --hidden must be at least 1");
  const auto cfg = to_evaluation_config(rc);
  const auto dataset = dataio::load_csv(rc.dataset);
  const auto arch = evaluation::architecture_for(dataset, rc.hidden, cfg.activation);

  evaluation::ArchitectureReport result;
  if (rc.exhaustive) {
    const evaluation::WeightGrid grid(parse_levels(rc.levels), arch.weight_count(), rc.budget);
    result = evaluation::evaluate_exhaustive(arch, dataset, grid, cfg);
  } else {
    result = evaluation::evaluate_sampled(arch, dataset, cfg);
  }

  const std::vector<evaluation::ArchitectureReport> reports{result};
  if (rc.out_path.empty()) {
    report::write_csv(out, reports);
    print_summary(err, result);
  } else {
    auto file = open_output(rc.out_path);
    report::write_csv(file, reports);
    print_summary(out, result);
  }
  if (!rc.performances_path.empty()) {
    auto file = open_output(rc.performances_path);
    report::write_performance_matrix(file, result);
  }
  return kSuccess;
}

int run_sweep(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.print_config) {
    print_config(out, rc, true);
    return kSuccess;
  }
  if (rc.dataset.empty()) throw DataError("sweep: a dataset path is required");
  const auto cfg = to_evaluation_config(rc);
  const auto dataset = dataio::load_csv(rc.dataset);

  evaluation::SweepParams params;
  params.hidden_lo = rc.hidden_range[0];
  params.hidden_hi = rc.hidden_range[1];
  params.mode = rc.exhaustive ? evaluation::Mode::exhaustive : evaluation::Mode::sampled;
  params.levels = parse_levels(rc.levels);
  params.grid_budget = rc.budget;

  const auto reports = evaluation::sweep(
      dataset, params, cfg, [&](const evaluation::ArchitectureReport& r) { print_summary(err, r); });

  if (rc.out_path.empty()) {
    report::write_csv(out, reports);
  } else {
    auto file = open_output(rc.out_path);
    report::write_csv(file, reports);
  }
  if (!rc.plot_path.empty()) {
    auto file = open_output(rc.plot_path);
    report::PlotOptions plot;
    plot.title = "QNNAE sweep: " + dataset.name();
    report::write_scatter_svg(file, reports, plot);
  }
  if (!rc.performances_path.empty()) {
    auto file = open_output(rc.performances_path);
    for (const auto& r : reports) report::write_performance_matrix(file, r);
  }
  return kSuccess;
}

int run_synth(const SynthOptions& opt, std::ostream& out) {
  const auto kind = dataio::parse_synthetic_kind(opt.kind);
  const auto ds = dataio::make_synthetic(kind, opt.n, opt.noise, opt.seed);
  auto file = open_output(opt.out_path);
  dataio::write_csv(file, ds);
  out << "wrote " << ds.size() << " rows of " << ds.name() << " to " << opt.out_path << '\n';
  return kSuccess;
}

// Reads `key = value` lines and turns them into command-line tokens. `true`
// and `false` values address flags.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = text::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw DataError(path + ": line " + std::to_string(line_number) + ": expected key=value");
    }
    const std::string key{text::trim(view.substr(0, eq))};
    const std::string value{text::trim(view.substr(eq + 1))};
    if (key.empty()) {
      throw DataError(path + ": line " + std::to_string(line_number) + ": empty key");
    }
    if (value == "true") {
      tokens.push_back("--" + key);
    } else if (value == "false") {
      continue;
    } else if (key == "hidden-range") {
      tokens.push_back("--" + key);
      for (auto part : text::split(value, ' ')) {
        if (!text::trim(part).empty()) tokens.emplace_back(text::trim(part));
      }
    } else {
      tokens.push_back("--" + key + "=" + value);
    }
  }
  return tokens;
}

// Splices config-file tokens in right after the subcommand so that explicit
// flags, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw DataError("--config needs a path");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty() || rest.empty()) return rest;
  std::vector<std::string> expanded{rest.front()};
  const auto tokens = config_tokens(config_path);
  expanded.insert(expanded.end(), tokens.begin(), tokens.end());
  expanded.insert(expanded.end(), rest.begin() + 1, rest.end());
  return expanded;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural-network architecture evaluation with a probabilistic quantum memory",
               "qnnae"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  PqmOptions pqm_opt;
  auto* pqm_cmd = app.add_subcommand("pqm", "Query a pattern memory");
  pqm_cmd->add_option("memory", pqm_opt.memory_file, "Pattern file, one bit string per line")
      ->required();
  pqm_cmd->add_option("input", pqm_opt.input_bits, "Input bit string")->required();
  pqm_cmd->add_option("--shots", pqm_opt.shots, "Sampled measurements of the control qubit");
  pqm_cmd->add_flag("--circuit", pqm_opt.circuit, "Also run the state-vector circuit");
  pqm_cmd->add_option("--seed", pqm_opt.seed, "Seed for shot sampling")->capture_default_str();

  RunConfig eval_rc;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score one architecture");
  eval_cmd->add_option("dataset", eval_rc.dataset, "CSV dataset with a label column");
  eval_cmd->add_option("--hidden", eval_rc.hidden, "Hidden neurons");
  add_run_options(eval_cmd, eval_rc);

  RunConfig sweep_rc;
  auto* sweep_cmd = app.add_subcommand("sweep", "Score every hidden-neuron count in a range");
  sweep_cmd->add_option("dataset", sweep_rc.dataset, "CSV dataset with a label column");
  sweep_cmd->add_option("--hidden-range", sweep_rc.hidden_range, "Half-open range LO HI")
      ->expected(2)
      ->capture_default_str();
  sweep_cmd->add_option("--plot", sweep_rc.plot_path, "SVG scatter output path");
  add_run_options(sweep_cmd, sweep_rc);

  SynthOptions synth_opt;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic two-class dataset");
  synth_cmd->add_option("--kind", synth_opt.kind, "xor, two_gaussians or rings")
      ->capture_default_str();
  synth_cmd->add_option("--n", synth_opt.n, "Rows")->capture_default_str();
  synth_cmd->add_option("--noise", synth_opt.noise, "Gaussian noise level")->capture_default_str();
  synth_cmd->add_option("--seed", synth_opt.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_opt.out_path, "CSV output path")->required();

  try {
    std::vector<std::string> tokens = expand_config(args);
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "qnnae: " << e.what() << '\n';
    return kInputError;
  } catch (const DataError& e) {
    err << "qnnae: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (pqm_cmd->parsed()) return run_pqm(pqm_opt, out);
    if (eval_cmd->parsed()) return run_evaluate(eval_rc, out, err);
    if (sweep_cmd->parsed()) return run_sweep(sweep_rc, out, err);
    if (synth_cmd->parsed()) return run_synth(synth_opt, out);
  } catch (const CapacityError& e) {
    err << "qnnae: " << e.what() << '\n';
    return kResourceError;
  } catch (const std::bad_alloc&) {
    err << "qnnae: out of memory\n";
    return kResourceError;
  } catch (const std::exception& e) {
    err << "qnnae: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace qnnae::cli
