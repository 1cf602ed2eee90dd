#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "decenergy/catalog.hpp"
#include "decenergy/dataset.hpp"
#include "json.hpp"

namespace decenergy {

struct FitConfig {
  // Scalar bounds apply to every coefficient unless the per-coefficient
  // vectors are set (they must then match the column count).
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  std::vector<double> lower_per_coefficient;
  std::vector<double> upper_per_coefficient;
  double convergence_tol = 1e-10;
  int max_iterations = 500;

  // No lower bound at all.
  static FitConfig allow_negative() {
    FitConfig config;
    config.lower = -std::numeric_limits<double>::infinity();
    return config;
  }
};

struct FitMetadata {
  double residual_norm = 0.0;  // ||A e - E||_2
  int iterations = 0;          // least-squares subproblem solves
  std::size_t active_bounds = 0;
  bool converged = false;
  // Columns that are identically zero in the training data; their
  // coefficient is not identified by the data.
  std::vector<std::size_t> zero_support;
};

struct FitResult {
  std::vector<double> coefficients;
  FitMetadata metadata;
};

// Minimizes ||A e - E||^2 subject to the configured bounds. Throws FitError
// on non-finite input or infeasible bounds.
FitResult fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& energy,
              const FitConfig& config = {});

class EnergyModel {
 public:
  EnergyModel(CatalogKind kind, std::vector<double> coefficients, FitMetadata metadata = {});

  CatalogKind catalog_kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  const FitMetadata& metadata() const { return metadata_; }

  // Estimated energy: sum over columns of coefficient * count.
  double predict(std::span<const double> features) const;

 private:
  CatalogKind kind_;
  std::vector<double> coefficients_;
  FitMetadata metadata_;
};

double predict(std::span<const double> coefficients, std::span<const double> features);

EnergyModel fit_dataset(const Dataset& dataset, const FitConfig& config = {});

nlohmann::ordered_json fit_config_to_json(const FitConfig& config);
nlohmann::ordered_json model_to_json(const EnergyModel& model);
// Requires every catalog column to be present by canonical name.
EnergyModel model_from_json(const nlohmann::ordered_json& json);

void save_model(const std::filesystem::path& path, const EnergyModel& model);
EnergyModel load_model(const std::filesystem::path& path);

}  // namespace decenergy
