#include "decenergy/estimator.hpp"

#include <cmath>
#include <ostream>

#include "decenergy/bounded_lsq.hpp"
#include "decenergy/errors.hpp"
#include "decenergy/io_util.hpp"
#include "decenergy/version.hpp"

namespace decenergy {

namespace {

Eigen::VectorXd resolve_bounds(double scalar, const std::vector<double>& per_coefficient,
                               Eigen::Index cols, const char* which) {
  if (per_coefficient.empty()) return Eigen::VectorXd::Constant(cols, scalar);
  if (static_cast<Eigen::Index>(per_coefficient.size()) != cols) {
    throw FitError(std::string(which) + " bound vector has " +
                   std::to_string(per_coefficient.size()) + " entries, expected " +
                   std::to_string(cols));
  }
  return Eigen::Map<const Eigen::VectorXd>(per_coefficient.data(), cols);
}

// JSON cannot carry infinities; unbounded sides are written as null.
nlohmann::ordered_json bound_to_json(double value) {
  if (std::isinf(value)) return nullptr;
  return value;
}

}  // namespace

FitResult fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& energy,
              const FitConfig& config) {
  const Eigen::Index cols = features.cols();
  const Eigen::VectorXd lower = resolve_bounds(config.lower, config.lower_per_coefficient, cols, "lower");
  const Eigen::VectorXd upper = resolve_bounds(config.upper, config.upper_per_coefficient, cols, "upper");
  const BoundedLsqResult solved = solve_bounded_lsq(
      features, energy, lower, upper, {config.convergence_tol, config.max_iterations});

  FitResult result;
  result.coefficients.assign(solved.x.data(), solved.x.data() + solved.x.size());
  FitMetadata& meta = result.metadata;
  meta.residual_norm = (features * solved.x - energy).norm();
  meta.iterations = solved.iterations;
  meta.converged = solved.converged;
  for (const BoundState s : solved.state) meta.active_bounds += s != BoundState::Free;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if ((features.col(j).array() == 0.0).all()) {
      meta.zero_support.push_back(static_cast<std::size_t>(j));
    }
  }
  return result;
}

EnergyModel::EnergyModel(CatalogKind kind, std::vector<double> coefficients, FitMetadata metadata)
    : kind_(kind), coefficients_(std::move(coefficients)), metadata_(std::move(metadata)) {
  if (coefficients_.size() != catalog(kind_).column_count()) {
    throw InvalidInput("model has " + std::to_string(coefficients_.size()) +
                       " coefficients, catalog expects " +
                       std::to_string(catalog(kind_).column_count()));
  }
}

double predict(std::span<const double> coefficients, std::span<const double> features) {
  if (coefficients.size() != features.size()) {
    throw InvalidInput("feature vector has " + std::to_string(features.size()) +
                       " entries, model has " + std::to_string(coefficients.size()));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < coefficients.size(); ++j) sum += coefficients[j] * features[j];
  return sum;
}

double EnergyModel::predict(std::span<const double> features) const {
  return decenergy::predict(coefficients_, features);
}

EnergyModel fit_dataset(const Dataset& dataset, const FitConfig& config) {
  const DesignMatrix dm = design_matrix(dataset);
  FitResult result = fit(dm.features, dm.energy, config);
  return EnergyModel(dataset.catalog_kind(), std::move(result.coefficients),
                     std::move(result.metadata));
}

nlohmann::ordered_json fit_config_to_json(const FitConfig& config) {
  nlohmann::ordered_json j;
  j["lower_bound"] = bound_to_json(config.lower);
  j["upper_bound"] = bound_to_json(config.upper);
  if (!config.lower_per_coefficient.empty()) {
    auto& arr = j["lower_per_coefficient"] = nlohmann::ordered_json::array();
    for (const double v : config.lower_per_coefficient) arr.push_back(bound_to_json(v));
  }
  if (!config.upper_per_coefficient.empty()) {
    auto& arr = j["upper_per_coefficient"] = nlohmann::ordered_json::array();
    for (const double v : config.upper_per_coefficient) arr.push_back(bound_to_json(v));
  }
  j["convergence_tol"] = config.convergence_tol;
  j["max_iterations"] = config.max_iterations;
  return j;
}

nlohmann::ordered_json model_to_json(const EnergyModel& model) {
  const FeatureCatalog& cat = catalog(model.catalog_kind());
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["catalog"] = to_string(model.catalog_kind());
  nlohmann::ordered_json coefficients = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < cat.column_count(); ++c) {
    coefficients[cat.columns()[c].name] = model.coefficients()[c];
  }
  j["coefficients"] = std::move(coefficients);
  const FitMetadata& meta = model.metadata();
  nlohmann::ordered_json fit;
  fit["residual_norm"] = meta.residual_norm;
  fit["iterations"] = meta.iterations;
  fit["active_bounds"] = meta.active_bounds;
  fit["converged"] = meta.converged;
  auto zero = nlohmann::ordered_json::array();
  for (const std::size_t c : meta.zero_support) zero.push_back(cat.columns()[c].name);
  fit["zero_support"] = std::move(zero);
  j["fit"] = std::move(fit);
  return j;
}

EnergyModel model_from_json(const nlohmann::ordered_json& json) {
  try {
    const CatalogKind kind = parse_catalog_kind(json.at("catalog").get<std::string>());
    const FeatureCatalog& cat = catalog(kind);
    const auto& coefficients = json.at("coefficients");
    if (coefficients.size() != cat.column_count()) {
      throw InvalidInput("model file lists " + std::to_string(coefficients.size()) +
                         " coefficients, expected " + std::to_string(cat.column_count()));
    }
    std::vector<double> values;
    values.reserve(cat.column_count());
    for (const Column& column : cat.columns()) {
      if (!coefficients.contains(column.name)) {
        throw InvalidInput("model file is missing coefficient '" + column.name + "'");
      }
      values.push_back(coefficients.at(column.name).get<double>());
    }
    FitMetadata meta;
    if (json.contains("fit")) {
      const auto& fit = json.at("fit");
      meta.residual_norm = fit.value("residual_norm", 0.0);
      meta.iterations = fit.value("iterations", 0);
      meta.active_bounds = fit.value("active_bounds", std::size_t{0});
      meta.converged = fit.value("converged", false);
      for (const auto& name : fit.value("zero_support", nlohmann::ordered_json::array())) {
        if (const auto c = cat.column_index(name.get<std::string>())) meta.zero_support.push_back(*c);
      }
    }
    return EnergyModel(kind, std::move(values), std::move(meta));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const EnergyModel& model) {
  const std::string text = model_to_json(model).dump(2) + "\n";
  write_file_atomically(path, [&](std::ostream& out) { out << text; });
}

EnergyModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::ordered_json json;
  try {
    json = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("cannot parse model file '" + path.string() + "': " + e.what());
  }
  return model_from_json(json);
}

}  // namespace decenergy
