#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decenergy/catalog.hpp"

namespace decenergy {

// Coding tools that can be switched off to augment the training corpus.
enum class Tool { ALF, BDOF, DMVR, ISP, LFNST, MIP, MTS, TPM };

inline constexpr std::array<Tool, 8> kAllTools = {Tool::ALF, Tool::BDOF, Tool::DMVR,
                                                  Tool::ISP, Tool::LFNST, Tool::MIP,
                                                  Tool::MTS, Tool::TPM};

std::string_view to_string(Tool tool);
// Acronym as written in dataset files ("DMVR"). Throws InvalidInput.
Tool parse_tool(std::string_view text);

enum class SetupLabel { CTC, ToolOff, Merge, Synthetic };

std::string_view to_string(SetupLabel label);

struct BitstreamRecord {
  std::string id;
  std::string sequence;
  std::string config;  // encoder configuration label: RA, AI, LD, ...
  int qp = 0;
  std::optional<Tool> tool_off;
  double energy_joules = 0.0;   // mean measured decoding energy
  double energy_stddev = 0.0;   // standard deviation over the samples
  int sample_count = 1;
  std::vector<double> features;  // dense, catalog column order
};

// Metadata columns that precede the catalog's feature columns.
inline constexpr std::array<std::string_view, 8> kMetadataColumns = {
    "id", "sequence", "config", "qp", "tool_off",
    "energy_joules", "energy_stddev", "sample_count"};

class Dataset {
 public:
  Dataset(CatalogKind kind, SetupLabel setup) : kind_(kind), setup_(setup) {}

  CatalogKind catalog_kind() const { return kind_; }
  SetupLabel setup() const { return setup_; }
  void set_setup(SetupLabel setup) { setup_ = setup; }

  const std::vector<BitstreamRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const BitstreamRecord& operator[](std::size_t i) const { return records_[i]; }

  // Validates the record against the catalog and id uniqueness. `row` is
  // only used in error messages (1-based data row).
  void add(BitstreamRecord record, std::size_t row = 0);

 private:
  CatalogKind kind_;
  SetupLabel setup_;
  std::vector<BitstreamRecord> records_;
  std::vector<std::string> sorted_ids_;
};

// Throws ValidationError naming the row and field.
void validate_record(const BitstreamRecord& record, CatalogKind kind, std::size_t row);

std::vector<std::string> dataset_header(CatalogKind kind);

// Guesses the catalog from a header line by its feature column count.
CatalogKind detect_catalog_kind(std::string_view header_line);

// Setup inferred from tool_off fields: none set -> CTC, all set -> ToolOff,
// mixed -> Merge.
SetupLabel infer_setup(const Dataset& dataset);

Dataset read_dataset(std::istream& in, CatalogKind kind);
Dataset load_dataset(const std::filesystem::path& path, CatalogKind kind);
Dataset load_dataset(const std::filesystem::path& path);  // kind from header

void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

// Concatenation labeled Merge. Throws InvalidInput on catalog mismatch or a
// shared record id.
Dataset merge_datasets(const Dataset& a, const Dataset& b);

struct DesignMatrix {
  Eigen::MatrixXd features;  // N x J
  Eigen::VectorXd energy;    // N
};

DesignMatrix design_matrix(const Dataset& dataset);

}  // namespace decenergy
