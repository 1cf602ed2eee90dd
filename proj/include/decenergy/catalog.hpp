#pragma once

// Feature catalogs of the FV (fine, 230 columns) and FVS (simple) decoder
// energy models. A catalog fixes the column space of every feature vector,
// dataset file and coefficient vector in the toolkit.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace decenergy {

enum class CatalogKind { FV, FVS };

enum class CountingLevel { Slice, Pel, PelLog, CTB, Boundary, Blockpel, Scalar };

enum class Category { General, Intra, Inter, Transform, InLoopFilter };

std::string_view to_string(CatalogKind kind);
std::string_view to_string(CountingLevel level);
std::string_view to_string(Category category);

// Accepts "fv" / "fvs" in any case.
CatalogKind parse_catalog_kind(std::string_view text);

// Pel counts of the 13 blockpel bins: 4, 8, ..., 16384.
inline constexpr std::size_t kBlockpelBinCount = 13;
inline constexpr std::array<int, kBlockpelBinCount> kBlockpelBins = {
    4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384};

struct BlockShape {
  int width = 0;
  int height = 0;
};

// Maps a block to the bin holding width*height pels. Blocks with fewer than
// 4 pels (1x1, 1x2, 2x1) clamp to bin 0. Dimensions must be powers of two in
// [1, 128]; anything else throws InvalidInput.
std::size_t blockpel_bin(BlockShape shape);

// Inclusive, 1-based column range in the FV column space.
struct IndexRange {
  int first = 0;
  int last = 0;
  int width() const { return last - first + 1; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct FeatureSpec {
  std::string name;   // canonical snake_case base name, e.g. "intra_blocks"
  std::string label;  // display label, e.g. "IntraBlocks"
  CountingLevel level = CountingLevel::Scalar;
  Category category = Category::General;
  // Position of this feature in the FV catalog. Empty for FVS aggregates
  // (pb_slice, inter_cu, bs, sao, alf) that have no FV row of their own.
  std::optional<IndexRange> fv_index_range;
  std::size_t first_column = 0;  // 0-based, in the owning catalog

  std::size_t column_width() const {
    return level == CountingLevel::Blockpel ? kBlockpelBinCount : 1;
  }
  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct Column {
  std::string name;                // e.g. "intra_blocks_256" or "coeff"
  std::size_t feature = 0;         // index into FeatureCatalog::specs()
  std::optional<int> pel_bin;      // bin pel count for blockpel columns
  friend bool operator==(const Column&, const Column&) = default;
};

class FeatureCatalog {
 public:
  FeatureCatalog(CatalogKind kind, std::vector<FeatureSpec> specs);

  CatalogKind kind() const { return kind_; }
  std::span<const FeatureSpec> specs() const { return specs_; }
  std::span<const Column> columns() const { return columns_; }
  std::size_t column_count() const { return columns_.size(); }

  const FeatureSpec& spec_of_column(std::size_t column) const {
    return specs_[columns_[column].feature];
  }

  // Lookups return nullopt / nullptr when the name is absent.
  std::optional<std::size_t> column_index(std::string_view column_name) const;
  const FeatureSpec* find_feature(std::string_view feature_name) const;

  // Column of a named feature; `bin` selects the blockpel bin (0..12) and
  // must be 0 for single-column features. Throws InvalidInput when absent.
  std::size_t column_of(std::string_view feature_name, std::size_t bin = 0) const;

  friend bool operator==(const FeatureCatalog&, const FeatureCatalog&) = default;

 private:
  CatalogKind kind_;
  std::vector<FeatureSpec> specs_;
  std::vector<Column> columns_;
};

FeatureCatalog build_catalog(CatalogKind kind);

// Shared immutable instances.
const FeatureCatalog& catalog(CatalogKind kind);

// Column name of a blockpel feature bin, e.g. ("intra_blocks", 0) ->
// "intra_blocks_4".
std::string blockpel_column_name(std::string_view feature_name, std::size_t bin);

// FV feature names folded into each FVS feature. Identity entries list the
// FV feature of the same name.
struct AggregationRule {
  std::string fvs_feature;
  std::vector<std::string> fv_features;
};
std::span<const AggregationRule> fv_to_fvs_rules();

// Folds an FV feature vector into the FVS column space. FV-only tool
// features are dropped. Throws InvalidInput on a length mismatch.
std::vector<double> aggregate_fv_to_fvs(std::span<const double> fv_counts);

}  // namespace decenergy
