#include <cmath>

#include "decenergy/catalog.hpp"
#include "decenergy/errors.hpp"
#include "decenergy/estimator.hpp"
#include "decenergy/io_util.hpp"
#include "decenergy/synth.hpp"
#include "doctest.h"

using namespace decenergy;

namespace {

std::size_t count_tool(const Dataset& d, Tool t) {
  std::size_t n = 0;
  for (const BitstreamRecord& r : d.records()) n += r.tool_off == t;
  return n;
}

}  // namespace

TEST_CASE("noise model parsing") {
  CHECK(NoiseModel::parse("none").kind == NoiseModel::Kind::None);
  const NoiseModel m = NoiseModel::parse("mult:0.02");
  CHECK(m.kind == NoiseModel::Kind::Multiplicative);
  CHECK(m.sigma == 0.02);
  CHECK(m.to_string() == "mult:0.02");
  CHECK(NoiseModel::parse("add:1.5").kind == NoiseModel::Kind::Additive);
  CHECK_THROWS_AS(NoiseModel::parse("gauss:1"), InvalidInput);
  CHECK_THROWS_AS(NoiseModel::parse("mult:-1"), InvalidInput);
  CHECK_THROWS_AS(NoiseModel::parse("mult:x"), InvalidInput);
}

TEST_CASE("default plan has 760 tool-off streams") {
  int total = 0;
  for (const ToolOffPlanEntry& e : default_tool_off_plan()) {
    total += e.count;
    if (e.tool == Tool::ISP || e.tool == Tool::MIP) {
      CHECK(e.config == "AI");
      CHECK(e.count == 104);
    } else {
      CHECK(e.config == "RA");
      CHECK(e.count == 92);
    }
  }
  CHECK(total == 6 * 92 + 2 * 104);
  CHECK(default_tool_off_plan().size() == 8);
}

TEST_CASE("default corpus has merge scale") {
  const SynthResult s = generate(SynthConfig{});
  CHECK(s.dataset.size() == 1036);
  std::size_t ctc = 0;
  for (const BitstreamRecord& r : s.dataset.records()) ctc += !r.tool_off.has_value();
  CHECK(ctc == 276);
  CHECK(count_tool(s.dataset, Tool::DMVR) == 92);
  CHECK(count_tool(s.dataset, Tool::MIP) == 104);
}

TEST_CASE("noiseless energies equal the linear model") {
  for (const CatalogKind kind : {CatalogKind::FV, CatalogKind::FVS}) {
    SynthConfig config;
    config.catalog_kind = kind;
    config.seed = 77;
    const SynthResult s = generate(config);
    CHECK(s.e_true.size() == catalog(kind).column_count());
    for (const BitstreamRecord& r : s.dataset.records()) {
      CHECK(r.energy_joules == predict(s.e_true, r.features));
      CHECK(r.energy_stddev == 0.0);
    }
  }
}

TEST_CASE("tool-off records zero the tool's columns") {
  const SynthResult s = generate(SynthConfig{});
  const FeatureCatalog& fv = catalog(CatalogKind::FV);
  const std::pair<Tool, std::vector<const char*>> cases[] = {
      {Tool::DMVR, {"dmvr"}},   {Tool::BDOF, {"bdof"}},
      {Tool::ISP, {"isp"}},     {Tool::MIP, {"mip"}},
      {Tool::LFNST, {"lfnst"}}, {Tool::TPM, {"triangle_split"}},
      {Tool::ALF, {"alf_luma", "alf_chroma"}},
  };
  for (const auto& [tool, features] : cases) {
    for (const BitstreamRecord& r : s.dataset.records()) {
      if (r.tool_off != tool) continue;
      for (const char* f : features) {
        const FeatureSpec& spec = *fv.find_feature(f);
        for (std::size_t i = 0; i < spec.column_width(); ++i) {
          CHECK(r.features[spec.first_column + i] == 0.0);
        }
      }
    }
  }
}

TEST_CASE("tool columns are exercised when the tool is on") {
  SynthConfig config;
  config.tool_off_plan.clear();
  const Dataset d = generate(config).dataset;
  const FeatureCatalog& fv = catalog(CatalogKind::FV);
  for (const char* f : {"dmvr", "bdof", "isp", "mip", "lfnst", "triangle_split"}) {
    double total = 0;
    for (const BitstreamRecord& r : d.records()) total += r.features[fv.column_of(f, 6)];
    CAPTURE(f);
    CHECK(total > 0.0);
  }
}

TEST_CASE("TPM-off moves triangle blocks into merge") {
  SynthConfig config;
  config.n_sequences = 1;
  config.qps = {22};
  config.configs = {"RA"};
  config.tool_off_plan = {{Tool::TPM, "RA", 1}};
  const Dataset d = generate(config).dataset;
  REQUIRE(d.size() == 2);
  const FeatureCatalog& fv = catalog(CatalogKind::FV);
  double on = 0;
  double off = 0;
  for (std::size_t b = 0; b < 13; ++b) {
    on += d[0].features[fv.column_of("inter_merge", b)] + d[0].features[fv.column_of("triangle_split", b)];
    off += d[1].features[fv.column_of("inter_merge", b)];
  }
  // Equal up to the 5% jitter applied to tool-off streams.
  CHECK(off == doctest::Approx(on).epsilon(0.1));
}

TEST_CASE("intra-only records have no inter features") {
  for (const CatalogKind kind : {CatalogKind::FV, CatalogKind::FVS}) {
    SynthConfig config;
    config.catalog_kind = kind;
    const SynthResult s = generate(config);
    const FeatureCatalog& cat = catalog(kind);
    for (const BitstreamRecord& r : s.dataset.records()) {
      if (r.config != "AI") continue;
      for (std::size_t c = 0; c < cat.column_count(); ++c) {
        if (cat.spec_of_column(c).category == Category::Inter) CHECK(r.features[c] == 0.0);
      }
    }
  }
}

TEST_CASE("counts are nonnegative, integral except val, and fall with QP") {
  const SynthResult s = generate(SynthConfig{});
  const FeatureCatalog& fv = catalog(CatalogKind::FV);
  for (const BitstreamRecord& r : s.dataset.records()) {
    for (std::size_t c = 0; c < r.features.size(); ++c) {
      CHECK(r.features[c] >= 0.0);
      if (fv.spec_of_column(c).level != CountingLevel::PelLog) CHECK(r.features[c] == std::floor(r.features[c]));
    }
  }
  // Coefficient counts fall with QP on average.
  double low = 0;
  double high = 0;
  for (const BitstreamRecord& r : s.dataset.records()) {
    if (r.tool_off) continue;
    if (r.qp == 22) low += r.features[fv.column_of("coeff")];
    if (r.qp == 37) high += r.features[fv.column_of("coeff")];
  }
  CHECK(low > 2 * high);
}

TEST_CASE("generation is deterministic per seed") {
  SynthConfig config;
  config.seed = 5;
  config.noise = NoiseModel::parse("mult:0.02");
  const SynthResult a = generate(config);
  const SynthResult b = generate(config);
  REQUIRE(a.dataset.size() == b.dataset.size());
  for (std::size_t i = 0; i < a.dataset.size(); ++i) {
    CHECK(a.dataset[i].features == b.dataset[i].features);
    CHECK(a.dataset[i].energy_joules == b.dataset[i].energy_joules);
  }
  config.seed = 6;
  CHECK(generate(config).dataset[0].energy_joules != a.dataset[0].energy_joules);
}

TEST_CASE("coefficients follow the per-level ranges") {
  const auto e = generate_coefficients(CatalogKind::FV, 1);
  const FeatureCatalog& fv = catalog(CatalogKind::FV);
  for (std::size_t c = 0; c < e.size(); ++c) {
    CHECK(e[c] >= 1e-8);
    CHECK(e[c] <= 1e-4);
    if (fv.spec_of_column(c).level == CountingLevel::Pel) CHECK(e[c] <= 1e-7);
  }
  CHECK(generate_coefficients(CatalogKind::FVS, 1).size() == 66);
}

TEST_CASE("supplied ground truth is used") {
  SynthConfig config;
  config.catalog_kind = CatalogKind::FVS;
  config.e_true = std::vector<double>(66, 1e-6);
  config.n_sequences = 1;
  const SynthResult s = generate(config);
  CHECK(s.e_true == *config.e_true);
  config.e_true = std::vector<double>(65, 1e-6);
  CHECK_THROWS_AS(generate(config), InvalidInput);
  config.e_true = std::vector<double>(66, -1.0);
  CHECK_THROWS_AS(generate(config), InvalidInput);
}

TEST_CASE("perturbation examples") {
  Rng rng(1);
  CHECK(perturb_energy(12.0, NoiseModel{}, rng) == 12.0);
  CHECK(perturb_energy(12.0, NoiseModel::parse("mult:0"), rng) == 12.0);
  CHECK_THROWS_AS(perturb_energy(0.0, NoiseModel{}, rng), InvalidInput);
  // Resampling keeps heavy additive noise positive.
  for (int i = 0; i < 1000; ++i) CHECK(perturb_energy(1.0, NoiseModel::parse("add:5"), rng) > 0.0);
}

TEST_CASE("multiplicative noise has the requested spread") {
  Rng rng(99);
  const NoiseModel noise = NoiseModel::parse("mult:0.02");
  const int n = 10000;
  double sum = 0;
  double sq = 0;
  for (int i = 0; i < n; ++i) {
    const double r = perturb_energy(50.0, noise, rng) / 50.0 - 1.0;
    sum += r;
    sq += r * r;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  CHECK(sd > 0.018);
  CHECK(sd < 0.022);
}

TEST_CASE("invalid configurations") {
  SynthConfig config;
  config.n_sequences = 0;
  CHECK_THROWS_AS(generate(config), InvalidInput);
  config = {};
  config.qps.clear();
  CHECK_THROWS_AS(generate(config), InvalidInput);
  config = {};
  config.configs = {"R,A"};
  CHECK_THROWS_AS(generate(config), InvalidInput);
  config = {};
  config.tool_off_plan = {{Tool::ALF, "RA", -1}};
  CHECK_THROWS_AS(generate(config), InvalidInput);
}
