#include "decenergy/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include "decenergy/errors.hpp"
#include "decenergy/io_util.hpp"
#include "decenergy/random.hpp"
#include "decenergy/version.hpp"

namespace decenergy {

double mean_relative_error(std::span<const double> estimates, std::span<const double> measured) {
  if (estimates.size() != measured.size()) {
    throw InvalidInput("estimate and measurement vectors differ in length");
  }
  if (measured.empty()) throw InvalidInput("mean relative error of an empty set");
  double sum = 0.0;
  for (std::size_t n = 0; n < measured.size(); ++n) {
    if (!(measured[n] > 0.0)) {
      throw InvalidInput("measured energy at position " + std::to_string(n) +
                         " is not positive");
    }
    sum += std::fabs((estimates[n] - measured[n]) / measured[n]);
  }
  return sum / static_cast<double>(measured.size());
}

Stratify parse_stratify(std::string_view text) {
  if (text == "none") return Stratify::None;
  if (text == "sequence") return Stratify::Sequence;
  if (text == "config") return Stratify::Config;
  if (text == "tool_off") return Stratify::ToolOff;
  throw InvalidInput("unknown stratification '" + std::string(text) + "'");
}

std::string_view to_string(Stratify stratify) {
  switch (stratify) {
    case Stratify::None: return "none";
    case Stratify::Sequence: return "sequence";
    case Stratify::Config: return "config";
    case Stratify::ToolOff: return "tool_off";
  }
  return "?";
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (const int f : fold) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

namespace {

std::string stratum_key(const BitstreamRecord& r, Stratify stratify) {
  switch (stratify) {
    case Stratify::None: return {};
    case Stratify::Sequence: return r.sequence;
    case Stratify::Config: return r.config;
    case Stratify::ToolOff: return r.tool_off ? std::string(to_string(*r.tool_off)) : "";
  }
  return {};
}

}  // namespace

FoldAssignment make_folds(const Dataset& dataset, int k, std::uint64_t seed, Stratify stratify) {
  if (k < 2) throw InvalidInput("fold count must be at least 2");
  const std::size_t n = dataset.size();
  if (n < static_cast<std::size_t>(k)) {
    throw InvalidInput("dataset has " + std::to_string(n) + " records, fewer than " +
                       std::to_string(k) + " folds");
  }
  FoldAssignment out{seed, k, {}, std::vector<int>(n, 0)};
  out.ids.reserve(n);
  for (const BitstreamRecord& r : dataset.records()) out.ids.push_back(r.id);

  Rng rng(seed);
  const std::size_t folds = static_cast<std::size_t>(k);
  if (stratify == Stratify::None) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    const std::size_t base = n / folds;
    const std::size_t extra = n % folds;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      const std::size_t size = base + (f < extra ? 1 : 0);
      for (std::size_t i = 0; i < size; ++i) out.fold[order[pos++]] = static_cast<int>(f);
    }
    return out;
  }

  std::vector<std::string> keys;
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string key = stratum_key(dataset[i], stratify);
    auto [it, inserted] = strata.try_emplace(key);
    if (inserted) keys.push_back(key);
    it->second.push_back(i);
  }
  std::size_t pos = 0;
  for (const std::string& key : keys) {
    std::vector<std::size_t>& members = strata[key];
    rng.shuffle(std::span<std::size_t>(members));
    for (const std::size_t i : members) out.fold[i] = static_cast<int>(pos++ % folds);
  }
  return out;
}

EvaluationReport cross_validate(const Dataset& dataset, int k, std::uint64_t seed,
                                const FitConfig& config, Stratify stratify, unsigned threads) {
  const FoldAssignment folds = make_folds(dataset, k, seed, stratify);
  const DesignMatrix dm = design_matrix(dataset);
  const Eigen::Index n = dm.features.rows();

  EvaluationReport report;
  report.fold_count = k;
  report.seed = seed;
  report.setup_label = std::string(to_string(dataset.setup()));
  report.catalog_kind = dataset.catalog_kind();
  report.stratify = stratify;
  report.fit_config = config;
  report.fold_fits.resize(static_cast<std::size_t>(k));
  std::vector<double> estimates(static_cast<std::size_t>(n), 0.0);

  auto run_fold = [&](int f) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    for (Eigen::Index i = 0; i < n; ++i) {
      (folds.fold[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    }
    if (train.empty()) throw InvalidInput("fold " + std::to_string(f) + " leaves no training data");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(train.size()), dm.features.cols());
    Eigen::VectorXd e(static_cast<Eigen::Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) {
      a.row(static_cast<Eigen::Index>(r)) = dm.features.row(train[r]);
      e(static_cast<Eigen::Index>(r)) = dm.energy(train[r]);
    }
    FitResult fitted = fit(a, e, config);
    for (const Eigen::Index i : test) {
      const auto& features = dataset[static_cast<std::size_t>(i)].features;
      estimates[static_cast<std::size_t>(i)] = predict(fitted.coefficients, features);
    }
    report.fold_fits[static_cast<std::size_t>(f)] = std::move(fitted.metadata);
  };

  if (threads <= 1) {
    for (int f = 0; f < k; ++f) run_fold(f);
  } else {
    // Folds write disjoint slots, so workers need no locking.
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
    std::atomic<int> next{0};
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < std::min<unsigned>(threads, static_cast<unsigned>(k)); ++t) {
      workers.emplace_back([&] {
        for (int f = next++; f < k; f = next++) {
          try {
            run_fold(f);
          } catch (...) {
            errors[static_cast<std::size_t>(f)] = std::current_exception();
          }
        }
      });
    }
    workers.clear();
    for (const auto& error : errors) {
      if (error) std::rethrow_exception(error);
    }
  }

  std::vector<double> measured(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) measured[static_cast<std::size_t>(i)] = dm.energy(i);
  report.epsilon_bar = mean_relative_error(estimates, measured);
  report.per_record.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    report.per_record.push_back({dataset[i].id, measured[i], estimates[i],
                                 std::fabs((estimates[i] - measured[i]) / measured[i]),
                                 folds.fold[i]});
  }
  return report;
}

EvaluationReport evaluate_model(const EnergyModel& model, const Dataset& dataset) {
  if (model.catalog_kind() != dataset.catalog_kind()) {
    throw InvalidInput("model catalog " + std::string(to_string(model.catalog_kind())) +
                       " does not match dataset catalog " +
                       std::string(to_string(dataset.catalog_kind())));
  }
  if (dataset.empty()) throw InvalidInput("cannot evaluate on an empty dataset");
  EvaluationReport report;
  report.setup_label = std::string(to_string(dataset.setup()));
  report.catalog_kind = dataset.catalog_kind();
  std::vector<double> estimates;
  std::vector<double> measured;
  for (const BitstreamRecord& r : dataset.records()) {
    const double estimate = model.predict(r.features);
    estimates.push_back(estimate);
    measured.push_back(r.energy_joules);
    report.per_record.push_back(
        {r.id, r.energy_joules, estimate,
         std::fabs((estimate - r.energy_joules) / r.energy_joules), -1});
  }
  report.epsilon_bar = mean_relative_error(estimates, measured);
  return report;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["catalog"] = to_string(report.catalog_kind);
  j["setup_label"] = report.setup_label;
  j["fold_count"] = report.fold_count;
  j["seed"] = report.seed;
  j["stratify"] = to_string(report.stratify);
  j["fit_config"] = fit_config_to_json(report.fit_config);
  j["record_count"] = report.per_record.size();
  j["epsilon_bar"] = report.epsilon_bar;
  auto fits = nlohmann::ordered_json::array();
  for (const FitMetadata& m : report.fold_fits) {
    fits.push_back({{"residual_norm", m.residual_norm},
                    {"iterations", m.iterations},
                    {"active_bounds", m.active_bounds},
                    {"converged", m.converged},
                    {"zero_support_count", m.zero_support.size()}});
  }
  j["fold_fits"] = std::move(fits);
  auto rows = nlohmann::ordered_json::array();
  for (const RecordEstimate& r : report.per_record) {
    rows.push_back({{"id", r.id},
                    {"measured_joules", r.measured_joules},
                    {"estimated_joules", r.estimated_joules},
                    {"relative_error", r.relative_error},
                    {"fold", r.fold}});
  }
  j["per_record"] = std::move(rows);
  return j;
}

EvaluationReport report_from_json(const nlohmann::ordered_json& json) {
  try {
    EvaluationReport report;
    report.catalog_kind = parse_catalog_kind(json.at("catalog").get<std::string>());
    report.setup_label = json.at("setup_label").get<std::string>();
    report.fold_count = json.at("fold_count").get<int>();
    report.seed = json.at("seed").get<std::uint64_t>();
    report.stratify = parse_stratify(json.value("stratify", std::string("none")));
    report.epsilon_bar = json.at("epsilon_bar").get<double>();
    for (const auto& row : json.at("per_record")) {
      report.per_record.push_back({row.at("id").get<std::string>(),
                                   row.at("measured_joules").get<double>(),
                                   row.at("estimated_joules").get<double>(),
                                   row.at("relative_error").get<double>(),
                                   row.at("fold").get<int>()});
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed report: ") + e.what());
  }
}

std::filesystem::path identity_line_path(const std::filesystem::path& scatter_path) {
  std::filesystem::path out = scatter_path;
  const std::string ext = scatter_path.has_extension() ? scatter_path.extension().string() : ".csv";
  out.replace_extension();
  out += ".identity" + ext;
  return out;
}

std::filesystem::path scatter_export(const EvaluationReport& report,
                                     const std::filesystem::path& path) {
  if (report.per_record.empty()) throw InvalidInput("cannot export an empty report");
  write_file_atomically(path, [&](std::ostream& out) {
    out << "id,E_measured_joules,E_estimated_joules,relative_error\n";
    for (const RecordEstimate& r : report.per_record) {
      out << r.id << ',' << format_double(r.measured_joules) << ','
          << format_double(r.estimated_joules) << ',' << format_double(r.relative_error) << '\n';
    }
  });
  const auto [lo, hi] = std::minmax_element(
      report.per_record.begin(), report.per_record.end(),
      [](const RecordEstimate& a, const RecordEstimate& b) {
        return a.measured_joules < b.measured_joules;
      });
  const std::filesystem::path identity = identity_line_path(path);
  write_file_atomically(identity, [&](std::ostream& out) {
    out << "E_joules,E_hat_joules\n";
    for (const double v : {lo->measured_joules, hi->measured_joules}) {
      out << format_double(v) << ',' << format_double(v) << '\n';
    }
  });
  return identity;
}

}  // namespace decenergy
