#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "decenergy/errors.hpp"
#include "decenergy/evaluation.hpp"
#include "decenergy/io_util.hpp"
#include "decenergy/synth.hpp"
#include "doctest.h"
#include "scratch_dir.hpp"

using namespace decenergy;

namespace {

Dataset plain_dataset(std::size_t n) {
  Dataset d(CatalogKind::FVS, SetupLabel::CTC);
  for (std::size_t i = 0; i < n; ++i) {
    BitstreamRecord r;
    r.id = "r" + std::to_string(i);
    r.sequence = "s" + std::to_string(i % 5);
    r.config = i % 2 ? "RA" : "AI";
    r.energy_joules = 1.0 + static_cast<double>(i);
    r.features.assign(66, 0.0);
    r.features[0] = 1.0;
    d.add(r);
  }
  return d;
}

SynthResult small_corpus(std::uint64_t seed, const char* noise = "none") {
  SynthConfig config;
  config.seed = seed;
  config.noise = NoiseModel::parse(noise);
  return generate(config);
}

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

}  // namespace

TEST_CASE("mean relative error examples") {
  const std::vector<double> e{100, 250, 3};
  CHECK(mean_relative_error(e, e) == 0.0);
  CHECK(mean_relative_error(std::vector<double>{110, 90}, std::vector<double>{100, 100}) ==
        doctest::Approx(0.10).epsilon(1e-15));
  CHECK(mean_relative_error(std::vector<double>{105}, std::vector<double>{100}) ==
        doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("mean relative error errors") {
  CHECK_THROWS_AS(mean_relative_error(std::vector<double>{}, std::vector<double>{}), InvalidInput);
  CHECK_THROWS_AS(mean_relative_error(std::vector<double>{1}, std::vector<double>{1, 2}), InvalidInput);
  CHECK_THROWS_AS(mean_relative_error(std::vector<double>{1}, std::vector<double>{0}), InvalidInput);
  CHECK_THROWS_AS(mean_relative_error(std::vector<double>{1}, std::vector<double>{-3}), InvalidInput);
}

TEST_CASE("mean relative error is scale invariant and zero only on equality") {
  Rng rng(2);
  std::vector<double> est(40), meas(40), est_s(40), meas_s(40);
  for (std::size_t i = 0; i < 40; ++i) {
    meas[i] = rng.uniform(1, 100);
    est[i] = meas[i] * (1 + rng.normal(0, 0.05));
    est_s[i] = 8.0 * est[i];
    meas_s[i] = 8.0 * meas[i];
  }
  CHECK(mean_relative_error(est_s, meas_s) == doctest::Approx(mean_relative_error(est, meas)).epsilon(1e-13));
  CHECK(mean_relative_error(est, meas) > 0.0);
  est = meas;
  est[7] = std::nextafter(est[7], 1e9);
  CHECK(mean_relative_error(est, meas) > 0.0);
}

TEST_CASE("fold examples") {
  const FoldAssignment ten = make_folds(plain_dataset(10), 10, 1);
  for (const std::size_t s : ten.fold_sizes()) CHECK(s == 1);

  const FoldAssignment big = make_folds(plain_dataset(1036), 10, 7);
  const auto sizes = big.fold_sizes();
  CHECK(std::count(sizes.begin(), sizes.end(), 104u) == 6);
  CHECK(std::count(sizes.begin(), sizes.end(), 103u) == 4);

  const FoldAssignment again = make_folds(plain_dataset(1036), 10, 7);
  CHECK(again.fold == big.fold);
  CHECK(again.ids == big.ids);
  CHECK(make_folds(plain_dataset(1036), 10, 8).fold != big.fold);
}

TEST_CASE("fold errors") {
  CHECK_THROWS_AS(make_folds(plain_dataset(5), 1, 0), InvalidInput);
  CHECK_THROWS_AS(make_folds(plain_dataset(5), 6, 0), InvalidInput);
}

TEST_CASE("fold sizes differ by at most one for every n and k") {
  for (std::size_t n = 2; n < 60; n += 3) {
    for (int k = 2; k <= static_cast<int>(n) && k <= 12; ++k) {
      for (const Stratify s : {Stratify::None, Stratify::Sequence, Stratify::Config}) {
        const auto sizes = make_folds(plain_dataset(n), k, n * 31 + static_cast<std::size_t>(k), s).fold_sizes();
        const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
        CHECK(*hi - *lo <= 1);
        std::size_t total = 0;
        for (const std::size_t v : sizes) total += v;
        CHECK(total == n);
      }
    }
  }
}

TEST_CASE("stratified folds spread each stratum evenly") {
  const Dataset d = plain_dataset(100);
  const FoldAssignment f = make_folds(d, 5, 3, Stratify::Sequence);
  std::map<std::string, std::vector<int>> per_stratum;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto& v = per_stratum[d[i].sequence];
    v.resize(5);
    ++v[static_cast<std::size_t>(f.fold[i])];
  }
  for (const auto& [key, counts] : per_stratum) {
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("noiseless cross-validation is exact") {
  const SynthResult s = small_corpus(21);
  const EvaluationReport r = cross_validate(s.dataset, 10, 7);
  CHECK(r.epsilon_bar <= 1e-6);
  CHECK(r.fold_count == 10);
  CHECK(r.per_record.size() == s.dataset.size());
  std::set<std::string> ids;
  for (const RecordEstimate& e : r.per_record) {
    ids.insert(e.id);
    CHECK(e.fold >= 0);
    CHECK(e.fold < 10);
  }
  CHECK(ids.size() == s.dataset.size());
}

TEST_CASE("epsilon bar is the mean of per-record errors") {
  const SynthResult s = small_corpus(22, "mult:0.02");
  const EvaluationReport r = cross_validate(s.dataset, 10, 3);
  double sum = 0.0;
  for (const RecordEstimate& e : r.per_record) {
    sum += e.relative_error;
    CHECK(e.relative_error == std::fabs((e.estimated_joules - e.measured_joules) / e.measured_joules));
  }
  CHECK(r.epsilon_bar == doctest::Approx(sum / static_cast<double>(r.per_record.size())).epsilon(1e-14));
  CHECK(r.epsilon_bar > 0.01);
  CHECK(r.epsilon_bar < 0.04);
}

TEST_CASE("cross-validation does not depend on thread count") {
  const SynthResult s = small_corpus(23, "mult:0.02");
  const auto one = report_to_json(cross_validate(s.dataset, 10, 5, {}, Stratify::None, 1)).dump();
  const auto four = report_to_json(cross_validate(s.dataset, 10, 5, {}, Stratify::None, 4)).dump();
  CHECK(one == four);
}

TEST_CASE("permuted input stays exact on noiseless data") {
  const SynthResult s = small_corpus(24);
  Dataset reversed(s.dataset.catalog_kind(), s.dataset.setup());
  for (std::size_t i = s.dataset.size(); i-- > 0;) reversed.add(s.dataset[i]);
  CHECK(cross_validate(reversed, 10, 7).epsilon_bar <= 1e-6);
}

TEST_CASE("leave-one-out on a tiny set") {
  SynthConfig config;
  config.n_sequences = 1;
  config.tool_off_plan.clear();
  const Dataset d = generate(config).dataset;
  REQUIRE(d.size() == 12);
  const EvaluationReport r = cross_validate(d, 12, 1);
  CHECK(r.per_record.size() == 12);
  for (const std::size_t s : make_folds(d, 12, 1).fold_sizes()) CHECK(s == 1);
}

TEST_CASE("evaluate a trained model") {
  const SynthResult s = small_corpus(25);
  const EnergyModel m(CatalogKind::FV, s.e_true);
  const EvaluationReport r = evaluate_model(m, s.dataset);
  CHECK(r.epsilon_bar < 1e-12);
  CHECK(r.per_record.front().fold == -1);
  CHECK_THROWS_AS(evaluate_model(EnergyModel(CatalogKind::FVS, std::vector<double>(66, 0.0)), s.dataset),
                  InvalidInput);
}

TEST_CASE("report JSON round trip and determinism") {
  const SynthResult s = small_corpus(26, "mult:0.02");
  const EvaluationReport r = cross_validate(s.dataset, 10, 9);
  const auto j = report_to_json(r);
  CHECK(j["tool"] == "decenergy");
  CHECK(j.contains("version"));
  CHECK(j["fold_count"] == 10);
  CHECK(j["seed"] == 9);
  CHECK(j["catalog"] == "fv");
  CHECK(j["fit_config"]["lower_bound"] == 0.0);
  const EvaluationReport back = report_from_json(j);
  CHECK(back.epsilon_bar == r.epsilon_bar);
  REQUIRE(back.per_record.size() == r.per_record.size());
  CHECK(back.per_record[5].estimated_joules == r.per_record[5].estimated_joules);
  CHECK(report_to_json(cross_validate(s.dataset, 10, 9)).dump() == j.dump());
  CHECK_THROWS_AS(report_from_json(nlohmann::ordered_json::object()), InvalidInput);
}

TEST_CASE("scatter export") {
  ScratchDir dir("scatter");
  EvaluationReport r;
  r.per_record = {{"a", 55, 50, 5.0 / 55, 0}, {"b", 10, 11, 0.1, 1}, {"c", 200, 190, 0.05, 2}};
  const auto identity = scatter_export(r, dir / "scatter.csv");
  CHECK(identity == dir / "scatter.identity.csv");
  std::istringstream rows(slurp(dir / "scatter.csv"));
  std::string line;
  int count = 0;
  std::getline(rows, line);
  CHECK(line == "id,E_measured_joules,E_estimated_joules,relative_error");
  while (std::getline(rows, line)) ++count;
  CHECK(count == 3);
  CHECK(slurp(identity) == "E_joules,E_hat_joules\n10,10\n200,200\n");

  EvaluationReport perfect;
  perfect.per_record = {{"x", 3, 3, 0, -1}, {"y", 4, 4, 0, -1}};
  scatter_export(perfect, dir / "p.csv");
  std::istringstream prow(slurp(dir / "p.csv"));
  std::getline(prow, line);
  while (std::getline(prow, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");

  CHECK_THROWS_AS(scatter_export(EvaluationReport{}, dir / "e.csv"), InvalidInput);
  CHECK_THROWS(scatter_export(r, "/nonexistent/dir/s.csv"));
  CHECK(identity_line_path("out/plot") == std::filesystem::path("out/plot.identity.csv"));
}
