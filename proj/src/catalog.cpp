#include "decenergy/catalog.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <string>
#include <unordered_set>

#include "decenergy/errors.hpp"

namespace decenergy {

std::string_view to_string(CatalogKind kind) {
  return kind == CatalogKind::FV ? "fv" : "fvs";
}

std::string_view to_string(CountingLevel level) {
  switch (level) {
    case CountingLevel::Slice: return "Slice";
    case CountingLevel::Pel: return "Pel";
    case CountingLevel::PelLog: return "PelLog";
    case CountingLevel::CTB: return "CTB";
    case CountingLevel::Boundary: return "Boundary";
    case CountingLevel::Blockpel: return "Blockpel";
    case CountingLevel::Scalar: return "Scalar";
  }
  return "?";
}

std::string_view to_string(Category category) {
  switch (category) {
    case Category::General: return "General";
    case Category::Intra: return "Intra";
    case Category::Inter: return "Inter";
    case Category::Transform: return "Transform";
    case Category::InLoopFilter: return "InLoopFilter";
  }
  return "?";
}

CatalogKind parse_catalog_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "fv") return CatalogKind::FV;
  if (lower == "fvs") return CatalogKind::FVS;
  throw InvalidInput("unknown model kind '" + std::string(text) + "' (expected fv or fvs)");
}

std::size_t blockpel_bin(BlockShape shape) {
  auto valid = [](int d) {
    return d >= 1 && d <= 128 && std::has_single_bit(static_cast<unsigned>(d));
  };
  if (!valid(shape.width) || !valid(shape.height)) {
    throw InvalidInput("block shape " + std::to_string(shape.width) + "x" +
                       std::to_string(shape.height) +
                       " is not a power-of-two size in [1, 128]");
  }
  const unsigned pels = static_cast<unsigned>(shape.width * shape.height);
  const int log2 = std::bit_width(pels) - 1;
  return log2 < 2 ? 0 : static_cast<std::size_t>(log2 - 2);
}

std::string blockpel_column_name(std::string_view feature_name, std::size_t bin) {
  return std::string(feature_name) + "_" + std::to_string(kBlockpelBins.at(bin));
}

namespace {

struct Row {
  const char* name;
  const char* label;
  CountingLevel level;
  Category category;
  int fv_first;  // 0 for FVS-only aggregates
  bool in_fv;
  bool in_fvs;
};

using L = CountingLevel;
using C = Category;

// Table order. fv_first is the 1-based FV index of the row's first column.
constexpr Row kRows[] = {
    {"eo", "EO", L::Scalar, C::General, 1, true, true},
    {"i_slice", "ISlice", L::Slice, C::General, 2, true, true},
    {"p_slice", "PSlice", L::Slice, C::General, 3, true, false},
    {"b_slice", "BSlice", L::Slice, C::General, 4, true, false},
    {"pb_slice", "PBSlice", L::Slice, C::General, 0, false, true},
    {"intra_blocks", "IntraBlocks", L::Blockpel, C::Intra, 5, true, true},
    {"isp", "ISP", L::Blockpel, C::Intra, 18, true, false},
    {"intra_pdpc", "IntraPDPC", L::Blockpel, C::Intra, 31, true, false},
    {"mip", "MIP", L::Blockpel, C::Intra, 44, true, false},
    {"ibc", "IBC", L::Blockpel, C::Intra, 57, true, false},
    {"inter_inter", "InterInter", L::Blockpel, C::Inter, 70, true, false},
    {"inter_merge", "InterMerge", L::Blockpel, C::Inter, 83, true, false},
    {"inter_cu", "InterCU", L::Blockpel, C::Inter, 0, false, true},
    {"inter_skip", "InterSkip", L::Blockpel, C::Inter, 96, true, true},
    {"affine", "Affine", L::Blockpel, C::Inter, 109, true, false},
    {"triangle_split", "TriangleSplit", L::Blockpel, C::Inter, 122, true, false},
    {"dmvr", "DMVR", L::Blockpel, C::Inter, 135, true, false},
    {"bdof", "BDOF", L::Blockpel, C::Inter, 148, true, false},
    {"uni", "Uni", L::Pel, C::Inter, 161, true, true},
    {"bi", "Bi", L::Pel, C::Inter, 162, true, true},
    {"frac_pel_hor", "FracPelHor", L::Pel, C::Inter, 163, true, true},
    {"frac_pel_ver", "FracPelVer", L::Pel, C::Inter, 164, true, true},
    {"frac_pel_both", "FracPelBoth", L::Pel, C::Inter, 165, true, true},
    {"copy_pel", "CopyPel", L::Pel, C::Inter, 166, true, true},
    {"transform", "Transform", L::Blockpel, C::Transform, 167, true, true},
    {"transform_skip", "TransformSkip", L::Blockpel, C::Transform, 180, true, false},
    {"transform_no_cbf", "TransformNoCbf", L::Blockpel, C::Transform, 193, true, false},
    {"lfnst", "LFNST", L::Blockpel, C::Transform, 206, true, false},
    {"coeff", "Coeff", L::Pel, C::Transform, 219, true, true},
    {"coeff_g1", "CoeffG1", L::Pel, C::Transform, 220, true, false},
    {"val", "Val", L::PelLog, C::Transform, 221, true, true},
    {"bs0", "BS0", L::Boundary, C::InLoopFilter, 222, true, false},
    {"bs1", "BS1", L::Boundary, C::InLoopFilter, 223, true, false},
    {"bs2", "BS2", L::Boundary, C::InLoopFilter, 224, true, false},
    {"bs", "BS", L::Boundary, C::InLoopFilter, 0, false, true},
    {"sao_luma_bo", "SAO Luma BO", L::CTB, C::InLoopFilter, 225, true, false},
    {"sao_luma_eo", "SAO Luma EO", L::CTB, C::InLoopFilter, 226, true, false},
    {"sao_chroma_bo", "SAO Chroma BO", L::CTB, C::InLoopFilter, 227, true, false},
    {"sao_chroma_eo", "SAO Chroma EO", L::CTB, C::InLoopFilter, 228, true, false},
    {"sao", "SAO", L::CTB, C::InLoopFilter, 0, false, true},
    {"alf_luma", "ALF Luma", L::CTB, C::InLoopFilter, 229, true, false},
    {"alf_chroma", "ALF Chroma", L::CTB, C::InLoopFilter, 230, true, false},
    {"alf", "ALF", L::CTB, C::InLoopFilter, 0, false, true},
};

const std::vector<AggregationRule>& rules() {
  static const std::vector<AggregationRule> table = [] {
    std::vector<AggregationRule> out;
    for (const Row& row : kRows) {
      if (!row.in_fvs) continue;
      AggregationRule rule{row.name, {}};
      const std::string name = row.name;
      if (name == "pb_slice") {
        rule.fv_features = {"p_slice", "b_slice"};
      } else if (name == "inter_cu") {
        rule.fv_features = {"inter_inter", "inter_merge"};
      } else if (name == "bs") {
        rule.fv_features = {"bs0", "bs1", "bs2"};
      } else if (name == "sao") {
        rule.fv_features = {"sao_luma_bo", "sao_luma_eo", "sao_chroma_bo", "sao_chroma_eo"};
      } else if (name == "alf") {
        rule.fv_features = {"alf_luma", "alf_chroma"};
      } else {
        rule.fv_features = {name};
      }
      out.push_back(std::move(rule));
    }
    return out;
  }();
  return table;
}

}  // namespace

FeatureCatalog::FeatureCatalog(CatalogKind kind, std::vector<FeatureSpec> specs)
    : kind_(kind), specs_(std::move(specs)) {
  std::unordered_set<std::string> seen;
  for (std::size_t f = 0; f < specs_.size(); ++f) {
    FeatureSpec& spec = specs_[f];
    if (!seen.insert(spec.name).second) {
      throw InvalidInput("duplicate feature name '" + spec.name + "'");
    }
    spec.first_column = columns_.size();
    if (spec.level == CountingLevel::Blockpel) {
      for (std::size_t bin = 0; bin < kBlockpelBinCount; ++bin) {
        columns_.push_back({blockpel_column_name(spec.name, bin), f, kBlockpelBins[bin]});
      }
    } else {
      columns_.push_back({spec.name, f, std::nullopt});
    }
  }
}

std::optional<std::size_t> FeatureCatalog::column_index(std::string_view column_name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].name == column_name) return c;
  }
  return std::nullopt;
}

const FeatureSpec* FeatureCatalog::find_feature(std::string_view feature_name) const {
  for (const FeatureSpec& spec : specs_) {
    if (spec.name == feature_name) return &spec;
  }
  return nullptr;
}

std::size_t FeatureCatalog::column_of(std::string_view feature_name, std::size_t bin) const {
  const FeatureSpec* spec = find_feature(feature_name);
  if (spec == nullptr) {
    throw InvalidInput("feature '" + std::string(feature_name) + "' is not in the " +
                       std::string(to_string(kind_)) + " catalog");
  }
  if (bin >= spec->column_width()) {
    throw InvalidInput("bin " + std::to_string(bin) + " out of range for feature '" +
                       spec->name + "'");
  }
  return spec->first_column + bin;
}

FeatureCatalog build_catalog(CatalogKind kind) {
  std::vector<FeatureSpec> specs;
  for (const Row& row : kRows) {
    if (kind == CatalogKind::FV ? !row.in_fv : !row.in_fvs) continue;
    FeatureSpec spec;
    spec.name = row.name;
    spec.label = row.label;
    spec.level = row.level;
    spec.category = row.category;
    if (row.fv_first > 0) {
      const int width = static_cast<int>(spec.column_width());
      spec.fv_index_range = IndexRange{row.fv_first, row.fv_first + width - 1};
    }
    specs.push_back(std::move(spec));
  }
  return FeatureCatalog(kind, std::move(specs));
}

const FeatureCatalog& catalog(CatalogKind kind) {
  static const FeatureCatalog fv = build_catalog(CatalogKind::FV);
  static const FeatureCatalog fvs = build_catalog(CatalogKind::FVS);
  return kind == CatalogKind::FV ? fv : fvs;
}

std::span<const AggregationRule> fv_to_fvs_rules() { return rules(); }

std::vector<double> aggregate_fv_to_fvs(std::span<const double> fv_counts) {
  const FeatureCatalog& fv = catalog(CatalogKind::FV);
  const FeatureCatalog& fvs = catalog(CatalogKind::FVS);
  if (fv_counts.size() != fv.column_count()) {
    throw InvalidInput("FV feature vector has " + std::to_string(fv_counts.size()) +
                       " entries, expected " + std::to_string(fv.column_count()));
  }
  std::vector<double> out(fvs.column_count(), 0.0);
  for (const AggregationRule& rule : rules()) {
    const FeatureSpec& target = *fvs.find_feature(rule.fvs_feature);
    for (const std::string& source_name : rule.fv_features) {
      const FeatureSpec& source = *fv.find_feature(source_name);
      for (std::size_t bin = 0; bin < target.column_width(); ++bin) {
        out[target.first_column + bin] += fv_counts[source.first_column + bin];
      }
    }
  }
  return out;
}

}  // namespace decenergy
