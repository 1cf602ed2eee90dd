#include "decenergy/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "decenergy/errors.hpp"
#include "decenergy/io_util.hpp"

namespace decenergy {

std::string_view to_string(Tool tool) {
  switch (tool) {
    case Tool::ALF: return "ALF";
    case Tool::BDOF: return "BDOF";
    case Tool::DMVR: return "DMVR";
    case Tool::ISP: return "ISP";
    case Tool::LFNST: return "LFNST";
    case Tool::MIP: return "MIP";
    case Tool::MTS: return "MTS";
    case Tool::TPM: return "TPM";
  }
  return "?";
}

Tool parse_tool(std::string_view text) {
  for (const Tool tool : kAllTools) {
    if (to_string(tool) == text) return tool;
  }
  throw InvalidInput("unknown tool acronym '" + std::string(text) + "'");
}

std::string_view to_string(SetupLabel label) {
  switch (label) {
    case SetupLabel::CTC: return "CTC";
    case SetupLabel::ToolOff: return "ToolOff";
    case SetupLabel::Merge: return "Merge";
    case SetupLabel::Synthetic: return "Synthetic";
  }
  return "?";
}

namespace {

bool field_is_clean(std::string_view s) {
  return s.find_first_of(",\"\r\n") == std::string_view::npos;
}

}  // namespace

void validate_record(const BitstreamRecord& record, CatalogKind kind, std::size_t row) {
  const FeatureCatalog& cat = catalog(kind);
  auto fail = [&](const std::string& field, const std::string& why) {
    throw ValidationError(row, field,
                          "row " + std::to_string(row) + ", field '" + field + "': " + why);
  };
  if (record.id.empty()) fail("id", "empty id");
  for (const auto& [name, value] :
       {std::pair{"id", &record.id}, {"sequence", &record.sequence}, {"config", &record.config}}) {
    if (!field_is_clean(*value)) fail(name, "contains a comma, quote or line break");
  }
  if (!(std::isfinite(record.energy_joules) && record.energy_joules > 0.0)) {
    fail("energy_joules", "energy must be positive, got " + format_double(record.energy_joules));
  }
  if (!(std::isfinite(record.energy_stddev) && record.energy_stddev >= 0.0)) {
    fail("energy_stddev", "standard deviation must be nonnegative");
  }
  if (record.sample_count < 1) fail("sample_count", "sample count must be at least 1");
  if (record.features.size() != cat.column_count()) {
    fail("features", "expected " + std::to_string(cat.column_count()) + " feature values, got " +
                         std::to_string(record.features.size()));
  }
  for (std::size_t c = 0; c < record.features.size(); ++c) {
    const double v = record.features[c];
    const Column& column = cat.columns()[c];
    if (!std::isfinite(v) || v < 0.0) {
      fail(column.name, "feature count must be a finite nonnegative number");
    }
    if (cat.spec_of_column(c).level != CountingLevel::PelLog && v != std::floor(v)) {
      fail(column.name, "feature count must be integral");
    }
  }
}

void Dataset::add(BitstreamRecord record, std::size_t row) {
  validate_record(record, kind_, row);
  const auto it = std::lower_bound(sorted_ids_.begin(), sorted_ids_.end(), record.id);
  if (it != sorted_ids_.end() && *it == record.id) {
    throw ValidationError(row, "id", "duplicate record id '" + record.id + "'");
  }
  sorted_ids_.insert(it, record.id);
  records_.push_back(std::move(record));
}

std::vector<std::string> dataset_header(CatalogKind kind) {
  std::vector<std::string> header(kMetadataColumns.begin(), kMetadataColumns.end());
  for (const Column& column : catalog(kind).columns()) header.push_back(column.name);
  return header;
}

CatalogKind detect_catalog_kind(std::string_view header_line) {
  const std::size_t fields = split_csv_line(header_line).size();
  for (const CatalogKind kind : {CatalogKind::FV, CatalogKind::FVS}) {
    if (fields == kMetadataColumns.size() + catalog(kind).column_count()) return kind;
  }
  throw SchemaError("", "header has " + std::to_string(fields) +
                            " columns, which matches neither the fv nor the fvs schema");
}

SetupLabel infer_setup(const Dataset& dataset) {
  std::size_t with_tool = 0;
  for (const BitstreamRecord& r : dataset.records()) with_tool += r.tool_off.has_value();
  if (with_tool == 0) return SetupLabel::CTC;
  if (with_tool == dataset.size()) return SetupLabel::ToolOff;
  return SetupLabel::Merge;
}

Dataset read_dataset(std::istream& in, CatalogKind kind) {
  const std::vector<std::string> expected = dataset_header(kind);
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("", "missing header row");
  }
  const auto header = split_csv_line(line);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size()) {
      throw SchemaError(expected[i], "missing column '" + expected[i] + "' at position " +
                                         std::to_string(i + 1));
    }
    if (header[i] != expected[i]) {
      const bool elsewhere = std::find(header.begin(), header.end(), expected[i]) != header.end();
      throw SchemaError(expected[i], std::string(elsewhere ? "misordered" : "missing") +
                                         " column '" + expected[i] + "' at position " +
                                         std::to_string(i + 1) + " (found '" +
                                         std::string(header[i]) + "')");
    }
  }
  if (header.size() > expected.size()) {
    const std::string extra(header[expected.size()]);
    throw SchemaError(extra, "unexpected extra column '" + extra + "'");
  }

  Dataset dataset(kind, SetupLabel::CTC);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected.size()) {
      throw ValidationError(row, "", "row " + std::to_string(row) + " has " +
                                         std::to_string(fields.size()) + " fields, expected " +
                                         std::to_string(expected.size()));
    }
    auto parse_field = [&](auto parser, std::size_t col) {
      try {
        return parser(fields[col], expected[col]);
      } catch (const InvalidInput& e) {
        throw ValidationError(row, expected[col],
                              "row " + std::to_string(row) + ", field '" + expected[col] +
                                  "': " + e.what());
      }
    };
    BitstreamRecord r;
    r.id = std::string(fields[0]);
    r.sequence = std::string(fields[1]);
    r.config = std::string(fields[2]);
    r.qp = static_cast<int>(parse_field(parse_integer, 3));
    if (!fields[4].empty()) {
      try {
        r.tool_off = parse_tool(fields[4]);
      } catch (const InvalidInput& e) {
        throw ValidationError(row, "tool_off",
                              "row " + std::to_string(row) + ", field 'tool_off': " + e.what());
      }
    }
    r.energy_joules = parse_field(parse_double, 5);
    r.energy_stddev = parse_field(parse_double, 6);
    r.sample_count = static_cast<int>(parse_field(parse_integer, 7));
    r.features.reserve(expected.size() - kMetadataColumns.size());
    for (std::size_t c = kMetadataColumns.size(); c < fields.size(); ++c) {
      r.features.push_back(parse_field(parse_double, c));
    }
    dataset.add(std::move(r), row);
  }
  dataset.set_setup(infer_setup(dataset));
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path, CatalogKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return read_dataset(in, kind);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::string header;
  std::getline(in, header);
  const CatalogKind kind = detect_catalog_kind(header);
  in.clear();
  in.seekg(0);
  return read_dataset(in, kind);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  const std::vector<std::string> header = dataset_header(dataset.catalog_kind());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const BitstreamRecord& r : dataset.records()) {
    out << r.id << ',' << r.sequence << ',' << r.config << ',' << r.qp << ','
        << (r.tool_off ? to_string(*r.tool_off) : "") << ',' << format_double(r.energy_joules)
        << ',' << format_double(r.energy_stddev) << ',' << r.sample_count;
    for (const double v : r.features) out << ',' << format_double(v);
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_file_atomically(path, [&](std::ostream& out) { write_dataset(out, dataset); });
}

Dataset merge_datasets(const Dataset& a, const Dataset& b) {
  if (a.catalog_kind() != b.catalog_kind()) {
    throw InvalidInput("cannot merge a " + std::string(to_string(a.catalog_kind())) +
                       " dataset with a " + std::string(to_string(b.catalog_kind())) + " dataset");
  }
  Dataset merged(a.catalog_kind(), SetupLabel::Merge);
  std::size_t row = 0;
  for (const Dataset* part : {&a, &b}) {
    for (const BitstreamRecord& r : part->records()) {
      try {
        merged.add(r, ++row);
      } catch (const ValidationError& e) {
        if (e.field() == "id") throw InvalidInput("duplicate record id '" + r.id + "' in merge");
        throw;
      }
    }
  }
  return merged;
}

DesignMatrix design_matrix(const Dataset& dataset) {
  if (dataset.empty()) throw InvalidInput("design matrix requested for an empty dataset");
  const std::size_t n = dataset.size();
  const std::size_t j = catalog(dataset.catalog_kind()).column_count();
  DesignMatrix dm{Eigen::MatrixXd(n, j), Eigen::VectorXd(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const BitstreamRecord& r = dataset[i];
    dm.features.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(r.features.data(), static_cast<Eigen::Index>(j));
    dm.energy(static_cast<Eigen::Index>(i)) = r.energy_joules;
  }
  return dm;
}

}  // namespace decenergy
