#include "decenergy/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "decenergy/catalog.hpp"
#include "decenergy/dataset.hpp"
#include "decenergy/errors.hpp"
#include "decenergy/estimator.hpp"
#include "decenergy/evaluation.hpp"
#include "decenergy/io_util.hpp"
#include "decenergy/measurement.hpp"
#include "decenergy/synth.hpp"
#include "decenergy/version.hpp"

namespace decenergy {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kRaplPathEnv = "DECENERGY_RAPL_PATH";
constexpr const char* kDefaultRaplPath = "/sys/class/powercap/intel-rapl:0";

void write_json(const fs::path& path, const Json& json) {
  const std::string text = json.dump(2) + "\n";
  write_file_atomically(path, [&](std::ostream& out) { out << text; });
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("cannot parse '" + path.string() + "': " + e.what());
  }
}

void dump_catalog(const FeatureCatalog& cat, std::ostream& out, bool markdown) {
  if (markdown) {
    out << "| column | name | level | category | pel bin |\n"
        << "|---:|---|---|---|---:|\n";
  } else {
    out << "column_index,canonical_name,level,category,pel_bin\n";
  }
  for (std::size_t c = 0; c < cat.column_count(); ++c) {
    const Column& col = cat.columns()[c];
    const FeatureSpec& spec = cat.spec_of_column(c);
    const std::string bin = col.pel_bin ? std::to_string(*col.pel_bin) : "";
    if (markdown) {
      out << "| " << c + 1 << " | `" << col.name << "` | " << to_string(spec.level) << " | "
          << to_string(spec.category) << " | " << bin << " |\n";
    } else {
      out << c + 1 << ',' << col.name << ',' << to_string(spec.level) << ','
          << to_string(spec.category) << ',' << bin << '\n';
    }
  }
}

std::vector<ToolOffPlanEntry> parse_plan(const std::string& text) {
  if (text == "default") return default_tool_off_plan();
  if (text == "none") return {};
  std::vector<ToolOffPlanEntry> plan;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find(':');
    const auto second = item.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos) {
      throw InvalidInput("tool-off plan entries must look like DMVR:RA:92, got '" + item + "'");
    }
    plan.push_back({parse_tool(item.substr(0, first)), item.substr(first + 1, second - first - 1),
                    static_cast<int>(parse_integer(item.substr(second + 1), "tool-off count"))});
  }
  return plan;
}

FitConfig make_fit_config(bool allow_negative, double tol, int max_iter) {
  FitConfig config = allow_negative ? FitConfig::allow_negative() : FitConfig{};
  config.convergence_tol = tol;
  config.max_iterations = max_iter;
  return config;
}

void warn_unconverged(const FitMetadata& meta, std::ostream& err) {
  if (!meta.converged) {
    err << "warning: fit stopped at the iteration cap (" << meta.iterations
        << " solves); the result may not be optimal\n";
  }
}

// Innermost subcommand that was selected, for usage excerpts.
const CLI::App* deepest(const CLI::App* app) {
  for (const CLI::App* sub : app->get_subcommands()) return deepest(sub);
  return app;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bit-stream feature based decoder energy modeling toolkit", std::string(kToolName)};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + std::string(kVersion));
  app.set_config("--config", "", "Read options from a TOML or INI file");

  const std::vector<std::string> model_kinds = {"fv", "fvs"};

  // catalog dump
  auto* catalog_cmd = app.add_subcommand("catalog", "Inspect the feature catalogs");
  catalog_cmd->require_subcommand(1);
  auto* dump_cmd = catalog_cmd->add_subcommand("dump", "Write the column schema of a catalog");
  std::string dump_model = "fv";
  std::string dump_format = "csv";
  std::string dump_out;
  dump_cmd->add_option("--model", dump_model, "Catalog")->check(CLI::IsMember(model_kinds))->required();
  dump_cmd->add_option("--format", dump_format, "csv or markdown")
      ->check(CLI::IsMember({"csv", "markdown"}))
      ->capture_default_str();
  dump_cmd->add_option("-o,--output", dump_out, "Output file (default: standard output)");

  // dataset validate / merge
  auto* dataset_cmd = app.add_subcommand("dataset", "Validate and merge dataset files");
  dataset_cmd->require_subcommand(1);
  auto* validate_cmd = dataset_cmd->add_subcommand("validate", "Check a dataset file");
  std::string validate_path;
  std::string validate_model;
  validate_cmd->add_option("path", validate_path, "Dataset CSV")->required();
  validate_cmd->add_option("--model", validate_model, "Catalog")
      ->check(CLI::IsMember(model_kinds))
      ->required();
  auto* merge_cmd = dataset_cmd->add_subcommand("merge", "Concatenate two datasets");
  std::string merge_a;
  std::string merge_b;
  std::string merge_out;
  merge_cmd->add_option("a", merge_a, "First dataset")->required();
  merge_cmd->add_option("b", merge_b, "Second dataset")->required();
  merge_cmd->add_option("-o,--output", merge_out, "Merged dataset")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_model = "fv";
  int synth_sequences = 23;
  std::vector<int> synth_qps = {22, 27, 32, 37};
  std::vector<std::string> synth_configs = {"RA", "LD", "AI"};
  std::string synth_noise = "none";
  std::uint64_t synth_seed = 0;
  std::string synth_plan = "default";
  std::string synth_out = "synth.csv";
  std::string synth_truth;
  synth_cmd->add_option("--model", synth_model, "Catalog")
      ->check(CLI::IsMember(model_kinds))
      ->capture_default_str();
  synth_cmd->add_option("--sequences", synth_sequences, "Number of sequences")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--qps", synth_qps, "QP list")->delimiter(',')->capture_default_str();
  synth_cmd->add_option("--configs", synth_configs, "Encoder configurations")
      ->delimiter(',')
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth_noise, "none, mult:<sigma> or add:<sigma>")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--tool-off", synth_plan,
                        "default, none, or TOOL:CONFIG:COUNT[,...]")
      ->capture_default_str();
  synth_cmd->add_option("-o,--output", synth_out, "Dataset CSV")->capture_default_str();
  synth_cmd->add_option("--truth", synth_truth, "Write ground-truth coefficients as JSON");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit energy coefficients to a dataset");
  std::string fit_data;
  std::string fit_model;
  std::string fit_out = "model.json";
  bool fit_allow_negative = false;
  double fit_tol = FitConfig{}.convergence_tol;
  int fit_max_iter = FitConfig{}.max_iterations;
  fit_cmd->add_option("--data", fit_data, "Dataset CSV")->required();
  fit_cmd->add_option("--model", fit_model, "Catalog")->check(CLI::IsMember(model_kinds))->required();
  fit_cmd->add_option("-o,--output", fit_out, "Model JSON")->capture_default_str();
  fit_cmd->add_flag("--allow-negative", fit_allow_negative, "Drop the nonnegativity bound");
  fit_cmd->add_option("--tol", fit_tol, "Gradient tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--max-iter", fit_max_iter, "Subproblem solve cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation");
  std::string cv_data;
  std::string cv_model;
  int cv_k = 10;
  std::uint64_t cv_seed = 0;
  std::string cv_out = "report.json";
  std::string cv_scatter;
  std::string cv_stratify = "none";
  unsigned cv_threads = 1;
  bool cv_allow_negative = false;
  double cv_tol = FitConfig{}.convergence_tol;
  int cv_max_iter = FitConfig{}.max_iterations;
  cv_cmd->add_option("--data", cv_data, "Dataset CSV")->required();
  cv_cmd->add_option("--model", cv_model, "Catalog")->check(CLI::IsMember(model_kinds))->required();
  cv_cmd->add_option("--k", cv_k, "Number of folds")->check(CLI::Range(2, 1 << 30))->capture_default_str();
  cv_cmd->add_option("--seed", cv_seed, "Fold assignment seed")->capture_default_str();
  cv_cmd->add_option("-o,--output", cv_out, "Report JSON")->capture_default_str();
  cv_cmd->add_option("--scatter", cv_scatter, "Scatter CSV");
  cv_cmd->add_option("--stratify", cv_stratify, "none, sequence, config or tool_off")
      ->check(CLI::IsMember({"none", "sequence", "config", "tool_off"}))
      ->capture_default_str();
  cv_cmd->add_option("--threads", cv_threads, "Folds fitted concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cv_cmd->add_flag("--allow-negative", cv_allow_negative, "Drop the nonnegativity bound");
  cv_cmd->add_option("--tol", cv_tol, "Gradient tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  cv_cmd->add_option("--max-iter", cv_max_iter, "Subproblem solve cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model on a dataset");
  std::string eval_data;
  std::string eval_coeffs;
  std::string eval_out = "report.json";
  std::string eval_scatter;
  eval_cmd->add_option("--data", eval_data, "Dataset CSV")->required();
  eval_cmd->add_option("--coeffs", eval_coeffs, "Model JSON")->required();
  eval_cmd->add_option("-o,--output", eval_out, "Report JSON")->capture_default_str();
  eval_cmd->add_option("--scatter", eval_scatter, "Scatter CSV");

  // scatter
  auto* scatter_cmd = app.add_subcommand("scatter", "Export scatter data from a report");
  std::string scatter_report;
  std::string scatter_out;
  scatter_cmd->add_option("--report", scatter_report, "Report JSON")->required();
  scatter_cmd->add_option("-o,--output", scatter_out, "Scatter CSV")->required();

  // measure
  auto* measure_cmd = app.add_subcommand("measure", "Measure decoding energy of a command");
  std::string measure_cmd_line;
  SessionConfig session_config;
  std::string measure_source = "rapl";
  std::string measure_rapl_path = kDefaultRaplPath;
  std::string measure_out = "session.json";
  measure_cmd->add_option("--cmd", measure_cmd_line, "Decoder invocation")->required();
  measure_cmd->add_option("--alpha", session_config.alpha, "Interval probability")->capture_default_str();
  measure_cmd->add_option("--beta", session_config.beta, "Allowed relative deviation")->capture_default_str();
  measure_cmd->add_option("--m-min", session_config.m_min, "Minimum sample count")->capture_default_str();
  measure_cmd->add_option("--m-max", session_config.m_max, "Maximum sample count")->capture_default_str();
  measure_cmd->add_option("--source", measure_source, "rapl or mock:<path>")->capture_default_str();
  measure_cmd->add_option("--rapl-path", measure_rapl_path, "Powercap zone directory")
      ->envname(kRaplPathEnv)
      ->capture_default_str();
  measure_cmd->add_option("-o,--output", measure_out, "Session JSON")->capture_default_str();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back(kToolName);
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << kToolName << ": " << e.what() << "\n\n" << deepest(&app)->help();
    return kExitUsage;
  }

  try {
    if (dump_cmd->parsed()) {
      const FeatureCatalog& cat = catalog(parse_catalog_kind(dump_model));
      const bool markdown = dump_format == "markdown";
      if (dump_out.empty()) {
        dump_catalog(cat, out, markdown);
      } else {
        write_file_atomically(dump_out, [&](std::ostream& o) { dump_catalog(cat, o, markdown); });
      }
    } else if (validate_cmd->parsed()) {
      const Dataset d = load_dataset(validate_path, parse_catalog_kind(validate_model));
      err << validate_path << ": ok, " << d.size() << " records, catalog " << validate_model
          << ", setup " << to_string(d.setup()) << "\n";
    } else if (merge_cmd->parsed()) {
      const Dataset a = load_dataset(merge_a);
      const Dataset b = load_dataset(merge_b);
      const Dataset merged = merge_datasets(a, b);
      save_dataset(merge_out, merged);
      err << "merged " << a.size() << " + " << b.size() << " = " << merged.size()
          << " records into " << merge_out << "\n";
    } else if (synth_cmd->parsed()) {
      SynthConfig config;
      config.catalog_kind = parse_catalog_kind(synth_model);
      config.n_sequences = synth_sequences;
      config.qps = synth_qps;
      config.configs = synth_configs;
      config.seed = synth_seed;
      config.noise = NoiseModel::parse(synth_noise);
      config.tool_off_plan = parse_plan(synth_plan);
      const SynthResult result = generate(config);
      save_dataset(synth_out, result.dataset);
      if (!synth_truth.empty()) {
        const FeatureCatalog& cat = catalog(config.catalog_kind);
        Json truth;
        truth["tool"] = kToolName;
        truth["version"] = kVersion;
        truth["catalog"] = to_string(config.catalog_kind);
        truth["seed"] = config.seed;
        truth["noise"] = config.noise.to_string();
        Json coefficients = Json::object();
        for (std::size_t c = 0; c < cat.column_count(); ++c) {
          coefficients[cat.columns()[c].name] = result.e_true[c];
        }
        truth["coefficients"] = std::move(coefficients);
        write_json(synth_truth, truth);
      }
      err << "wrote " << result.dataset.size() << " synthetic records to " << synth_out << "\n";
    } else if (fit_cmd->parsed()) {
      const Dataset d = load_dataset(fit_data, parse_catalog_kind(fit_model));
      const EnergyModel model =
          fit_dataset(d, make_fit_config(fit_allow_negative, fit_tol, fit_max_iter));
      warn_unconverged(model.metadata(), err);
      save_model(fit_out, model);
      err << "fitted " << catalog(model.catalog_kind()).column_count() << " coefficients on "
          << d.size() << " records, residual norm " << model.metadata().residual_norm << "\n";
    } else if (cv_cmd->parsed()) {
      const Dataset d = load_dataset(cv_data, parse_catalog_kind(cv_model));
      const EvaluationReport report =
          cross_validate(d, cv_k, cv_seed, make_fit_config(cv_allow_negative, cv_tol, cv_max_iter),
                         parse_stratify(cv_stratify), cv_threads);
      for (const FitMetadata& m : report.fold_fits) warn_unconverged(m, err);
      write_json(cv_out, report_to_json(report));
      if (!cv_scatter.empty()) scatter_export(report, cv_scatter);
      err << cv_k << "-fold cross-validation over " << d.size()
          << " records: mean relative error " << std::setprecision(6) << report.epsilon_bar
          << "\n";
    } else if (eval_cmd->parsed()) {
      const EnergyModel model = load_model(eval_coeffs);
      const Dataset d = load_dataset(eval_data, model.catalog_kind());
      const EvaluationReport report = evaluate_model(model, d);
      write_json(eval_out, report_to_json(report));
      if (!eval_scatter.empty()) scatter_export(report, eval_scatter);
      err << "mean relative error over " << d.size() << " records: " << std::setprecision(6)
          << report.epsilon_bar << "\n";
    } else if (scatter_cmd->parsed()) {
      const EvaluationReport report = report_from_json(read_json(scatter_report));
      const fs::path identity = scatter_export(report, scatter_out);
      err << "wrote " << scatter_out << " and " << identity.string() << "\n";
    } else if (measure_cmd->parsed()) {
      session_config.validate();
      std::unique_ptr<EnergyCounter> counter;
      if (measure_source == "rapl") {
        counter = std::make_unique<PowercapCounter>(measure_rapl_path);
      } else if (measure_source.rfind("mock:", 0) == 0) {
        counter = std::make_unique<ScriptedCounter>(
            ScriptedCounter::from_file(measure_source.substr(5)));
      } else {
        err << kToolName << ": --source must be rapl or mock:<path>\n\n" << measure_cmd->help();
        return kExitUsage;
      }
      ShellRunner runner(measure_cmd_line);
      SleepWaiter idle;
      const SessionResult result = run_session(runner, *counter, idle, session_config);
      write_json(measure_out, session_to_json(result, measure_cmd_line));
      if (!result.converged) {
        err << "warning: confidence criterion not met after " << result.session.count()
            << " samples\n";
      }
      err << "mean decoding energy " << result.mean_energy_joules << " J over "
          << result.session.count() << " samples"
          << (result.converged ? "" : " (unconverged)") << "\n";
    }
  } catch (const Error& e) {
    err << kToolName << ": error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << kToolName << ": error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace decenergy
