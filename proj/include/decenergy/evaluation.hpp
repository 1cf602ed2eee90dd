#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decenergy/dataset.hpp"
#include "decenergy/estimator.hpp"
#include "json.hpp"

namespace decenergy {

// Mean of |estimate - measured| / measured. Throws InvalidInput on empty or
// mismatched inputs and on any nonpositive measurement.
double mean_relative_error(std::span<const double> estimates, std::span<const double> measured);

// Optional stratification key for fold assignment. Off by default.
enum class Stratify { None, Sequence, Config, ToolOff };

Stratify parse_stratify(std::string_view text);
std::string_view to_string(Stratify stratify);

struct FoldAssignment {
  std::uint64_t seed = 0;
  int k = 0;
  std::vector<std::string> ids;  // dataset record order
  std::vector<int> fold;         // parallel to ids, values in [0, k)

  std::vector<std::size_t> fold_sizes() const;
};

// Shuffles record positions with an Rng seeded by `seed`, then cuts the
// shuffled order into k contiguous near-equal folds (the first N mod k folds
// get one extra record). With stratification, records are shuffled within
// each stratum, the strata are laid end to end in order of first appearance
// and the result is dealt round-robin, so every stratum spreads evenly over
// the folds. Throws InvalidInput when k < 2 or the dataset has fewer than k
// records.
FoldAssignment make_folds(const Dataset& dataset, int k, std::uint64_t seed,
                          Stratify stratify = Stratify::None);

struct RecordEstimate {
  std::string id;
  double measured_joules = 0.0;
  double estimated_joules = 0.0;
  double relative_error = 0.0;
  int fold = -1;  // -1 when the estimate did not come from cross-validation
};

struct EvaluationReport {
  std::vector<RecordEstimate> per_record;
  double epsilon_bar = 0.0;
  int fold_count = 0;
  std::uint64_t seed = 0;
  std::string setup_label;
  CatalogKind catalog_kind = CatalogKind::FV;
  Stratify stratify = Stratify::None;
  FitConfig fit_config;
  // Per-fold fit diagnostics, in fold order.
  std::vector<FitMetadata> fold_fits;
};

// k-fold cross-validation: each fold is predicted by a model trained on the
// other k-1 folds, and the mean relative error is pooled over all records.
// `threads` > 1 fits folds concurrently; the result does not depend on it.
EvaluationReport cross_validate(const Dataset& dataset, int k, std::uint64_t seed,
                                const FitConfig& config = {}, Stratify stratify = Stratify::None,
                                unsigned threads = 1);

// Applies a trained model to every record of a dataset.
EvaluationReport evaluate_model(const EnergyModel& model, const Dataset& dataset);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::ordered_json& json);

// Path of the identity-line companion file: "scatter.csv" ->
// "scatter.identity.csv".
std::filesystem::path identity_line_path(const std::filesystem::path& scatter_path);

// Writes the (E, E_hat) pairs as CSV plus the identity-line endpoints
// (min E, min E) and (max E, max E). Returns the identity-line path.
std::filesystem::path scatter_export(const EvaluationReport& report,
                                     const std::filesystem::path& path);

}  // namespace decenergy
