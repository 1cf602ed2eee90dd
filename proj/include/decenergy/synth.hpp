#pragma once

// Synthetic corpora with known ground-truth coefficients. A corpus mimics a
// common-test-conditions set (every sequence x QP x configuration) plus
// tool-off augmentation, and its energies are exact linear combinations of
// the generated feature counts, optionally perturbed by measurement noise.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decenergy/dataset.hpp"
#include "decenergy/random.hpp"

namespace decenergy {

struct NoiseModel {
  enum class Kind { None, Multiplicative, Additive };
  Kind kind = Kind::None;
  double sigma = 0.0;  // relative for Multiplicative, joules for Additive

  // "none", "mult:<sigma_rel>" or "add:<sigma_joules>".
  static NoiseModel parse(std::string_view text);
  std::string to_string() const;
};

struct ToolOffPlanEntry {
  Tool tool;
  std::string config;
  int count = 0;
};

// ALF, BDOF, DMVR, LFNST, MTS and TPM at RA with 92 streams each; ISP and
// MIP at AI with 104 each. 760 streams in total.
std::vector<ToolOffPlanEntry> default_tool_off_plan();

struct SynthConfig {
  CatalogKind catalog_kind = CatalogKind::FV;
  int n_sequences = 23;
  std::vector<int> qps = {22, 27, 32, 37};
  // RA: random access (B slices), LD: low delay (P slices), AI: all intra.
  std::vector<std::string> configs = {"RA", "LD", "AI"};
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> e_true;  // generated when empty
  NoiseModel noise;
  std::vector<ToolOffPlanEntry> tool_off_plan = default_tool_off_plan();

  void validate() const;
};

struct SynthResult {
  Dataset dataset;
  std::vector<double> e_true;
};

SynthResult generate(const SynthConfig& config);

// Coefficients drawn log-uniformly per counting level inside
// [1e-8, 1e-4] J per occurrence.
std::vector<double> generate_coefficients(CatalogKind kind, std::uint64_t seed);

// Multiplicative: E (1 + N(0, sigma)); additive: E + N(0, sigma). Draws
// that would leave the energy nonpositive are resampled.
double perturb_energy(double clean_joules, const NoiseModel& noise, Rng& rng);

}  // namespace decenergy
