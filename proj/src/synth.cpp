#include "decenergy/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "decenergy/errors.hpp"
#include "decenergy/estimator.hpp"
#include "decenergy/io_util.hpp"

namespace decenergy {

NoiseModel NoiseModel::parse(std::string_view text) {
  if (text == "none") return {};
  const std::size_t colon = text.find(':');
  if (colon != std::string_view::npos) {
    const std::string_view kind = text.substr(0, colon);
    const double sigma = parse_double(text.substr(colon + 1), "noise sigma");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("noise sigma must be >= 0");
    if (kind == "mult") return {Kind::Multiplicative, sigma};
    if (kind == "add") return {Kind::Additive, sigma};
  }
  throw InvalidInput("noise model must be none, mult:<sigma> or add:<sigma>, got '" +
                     std::string(text) + "'");
}

std::string NoiseModel::to_string() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Multiplicative: return "mult:" + format_double(sigma);
    case Kind::Additive: return "add:" + format_double(sigma);
  }
  return "none";
}

std::vector<ToolOffPlanEntry> default_tool_off_plan() {
  return {{Tool::ALF, "RA", 92},  {Tool::BDOF, "RA", 92},  {Tool::DMVR, "RA", 92},
          {Tool::ISP, "AI", 104}, {Tool::LFNST, "RA", 92}, {Tool::MIP, "AI", 104},
          {Tool::MTS, "RA", 92},  {Tool::TPM, "RA", 92}};
}

void SynthConfig::validate() const {
  if (n_sequences < 1) throw InvalidInput("synthetic corpus needs at least one sequence");
  if (qps.empty()) throw InvalidInput("synthetic corpus needs at least one QP");
  for (const std::string& c : configs) {
    if (c.empty() || c.find_first_of(",\"\r\n") != std::string::npos) {
      throw InvalidInput("invalid configuration label '" + c + "'");
    }
  }
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
    throw InvalidInput("noise sigma must be >= 0");
  }
  for (const ToolOffPlanEntry& entry : tool_off_plan) {
    if (entry.count < 0) throw InvalidInput("tool-off stream count must be >= 0");
    if (entry.config.empty()) throw InvalidInput("tool-off plan entry needs a configuration");
  }
  if (e_true) {
    if (e_true->size() != catalog(catalog_kind).column_count()) {
      throw InvalidInput("e_true has " + std::to_string(e_true->size()) +
                         " entries, catalog expects " +
                         std::to_string(catalog(catalog_kind).column_count()));
    }
    for (const double v : *e_true) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("e_true must be finite and >= 0");
    }
  }
}

namespace {

// Per-level coefficient ranges, chosen so that the typical contribution of
// every column to the total energy lies within a few decades.
std::pair<double, double> coefficient_range(CountingLevel level) {
  switch (level) {
    case CountingLevel::Scalar:
    case CountingLevel::Slice: return {1e-5, 1e-4};
    case CountingLevel::CTB: return {1e-6, 1e-5};
    case CountingLevel::Blockpel:
    case CountingLevel::Boundary: return {1e-7, 1e-6};
    case CountingLevel::Pel:
    case CountingLevel::PelLog: return {1e-8, 1e-7};
  }
  return {1e-8, 1e-4};
}

struct SequenceTraits {
  double scale;  // resolution-like multiplier on all block and pel counts
  int frames;
};

SequenceTraits sequence_traits(std::uint64_t seed, const std::string& sequence) {
  Rng rng(mix_seed(seed, hash_label("sequence/" + sequence)));
  SequenceTraits traits{};
  traits.scale = rng.log_uniform(0.5, 2.0);
  traits.frames = 32 + static_cast<int>(rng.below(33));
  return traits;
}

class CountBuilder {
 public:
  CountBuilder(const FeatureCatalog& fv, Rng& rng) : fv_(fv), rng_(rng), counts_(fv.column_count(), 0.0) {}

  void set(std::string_view feature, double value, std::size_t bin = 0) {
    counts_[fv_.column_of(feature, bin)] = value;
  }
  double get(std::string_view feature, std::size_t bin = 0) const {
    return counts_[fv_.column_of(feature, bin)];
  }

  // Independent log-uniform draw per bin.
  void blockpel(std::string_view feature, double lo, double hi, double factor) {
    for (std::size_t bin = 0; bin < kBlockpelBinCount; ++bin) {
      set(feature, std::round(rng_.log_uniform(lo, hi) * factor), bin);
    }
  }

  // Per-bin random fraction of a parent blockpel feature.
  void subset(std::string_view feature, std::string_view parent, double lo, double hi) {
    for (std::size_t bin = 0; bin < kBlockpelBinCount; ++bin) {
      set(feature, std::round(get(parent, bin) * rng_.uniform(lo, hi)), bin);
    }
  }

  std::vector<double> take() { return std::move(counts_); }

 private:
  const FeatureCatalog& fv_;
  Rng& rng_;
  std::vector<double> counts_;
};

// FV-space counts of one CTC stream.
std::vector<double> base_counts(std::uint64_t seed, const std::string& sequence,
                                const std::string& config, int qp) {
  const FeatureCatalog& fv = catalog(CatalogKind::FV);
  const SequenceTraits traits = sequence_traits(seed, sequence);
  Rng rng(mix_seed(seed, hash_label("stream/" + sequence + "/" + config + "/" +
                                    std::to_string(qp))));
  CountBuilder b(fv, rng);
  const bool intra_only = config == "AI";
  const bool low_delay = config == "LD";
  const double s = traits.scale;
  const double q = std::exp2(-(qp - 22) / 6.0);  // fewer residuals at higher QP
  const int frames = traits.frames;

  b.set("eo", 1.0);
  if (intra_only) {
    b.set("i_slice", frames);
  } else if (low_delay) {
    b.set("i_slice", 1.0);
    b.set("p_slice", frames - 1);
  } else {
    const int intra = (frames + 31) / 32;
    b.set("i_slice", intra);
    b.set("b_slice", frames - intra);
  }

  const double intra_share = intra_only ? 1.0 : 0.1;
  b.blockpel("intra_blocks", 20.0, 4000.0, s * intra_share);
  b.subset("isp", "intra_blocks", 0.05, 0.3);
  b.subset("intra_pdpc", "intra_blocks", 0.2, 0.6);
  b.subset("mip", "intra_blocks", 0.05, 0.3);
  b.subset("ibc", "intra_blocks", 0.01, 0.1);

  if (!intra_only) {
    b.blockpel("inter_inter", 20.0, 4000.0, s);
    b.blockpel("inter_merge", 20.0, 4000.0, s);
    b.blockpel("inter_skip", 20.0, 4000.0, s);
    b.subset("affine", "inter_inter", 0.05, 0.25);
    if (!low_delay) {
      b.subset("triangle_split", "inter_merge", 0.02, 0.15);
      b.subset("dmvr", "inter_merge", 0.1, 0.5);
      b.subset("bdof", "inter_merge", 0.1, 0.5);
    }
    for (const char* pel : {"uni", "frac_pel_hor", "frac_pel_ver", "frac_pel_both", "copy_pel"}) {
      b.set(pel, std::round(rng.log_uniform(1e5, 1e7) * s));
    }
    if (!low_delay) b.set("bi", std::round(rng.log_uniform(1e5, 1e7) * s));
  }

  b.blockpel("transform", 20.0, 4000.0, s * q);
  b.subset("transform_skip", "transform", 0.02, 0.2);
  b.blockpel("transform_no_cbf", 20.0, 4000.0, s / std::sqrt(q));
  b.subset("lfnst", "transform", 0.05, 0.4);

  const double coeff = std::round(rng.log_uniform(1e5, 1e7) * s * q);
  b.set("coeff", coeff);
  b.set("coeff_g1", std::round(coeff * rng.uniform(0.2, 0.5)));
  b.set("val", coeff * rng.uniform(0.5, 2.0));

  for (const char* bs : {"bs0", "bs1", "bs2"}) {
    b.set(bs, std::round(rng.log_uniform(1e3, 1e5) * s));
  }
  for (const char* ctb : {"sao_luma_bo", "sao_luma_eo", "sao_chroma_bo", "sao_chroma_eo",
                          "alf_luma", "alf_chroma"}) {
    b.set(ctb, std::round(rng.log_uniform(10.0, 1000.0) * s));
  }
  return b.take();
}

// Disabling a tool changes mode decisions slightly everywhere (jitter) and
// removes the tool's own occurrences; triangle blocks fall back to merge.
void apply_tool_off(std::vector<double>& counts, Tool tool, Rng& rng) {
  const FeatureCatalog& fv = catalog(CatalogKind::FV);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0.0 || fv.spec_of_column(c).level == CountingLevel::Scalar ||
        fv.spec_of_column(c).level == CountingLevel::Slice) {
      continue;
    }
    const double jittered = std::max(0.0, counts[c] * (1.0 + 0.05 * rng.normal()));
    counts[c] = fv.spec_of_column(c).level == CountingLevel::PelLog ? jittered
                                                                     : std::round(jittered);
  }
  auto zero = [&](std::string_view feature) {
    const FeatureSpec& spec = *fv.find_feature(feature);
    for (std::size_t i = 0; i < spec.column_width(); ++i) counts[spec.first_column + i] = 0.0;
  };
  switch (tool) {
    case Tool::ALF:
      zero("alf_luma");
      zero("alf_chroma");
      break;
    case Tool::BDOF: zero("bdof"); break;
    case Tool::DMVR: zero("dmvr"); break;
    case Tool::ISP: zero("isp"); break;
    case Tool::LFNST: zero("lfnst"); break;
    case Tool::MIP: zero("mip"); break;
    case Tool::MTS: break;  // no dedicated feature column
    case Tool::TPM:
      for (std::size_t bin = 0; bin < kBlockpelBinCount; ++bin) {
        counts[fv.column_of("inter_merge", bin)] += counts[fv.column_of("triangle_split", bin)];
      }
      zero("triangle_split");
      break;
  }
}

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string sequence_name(int index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 2) digits.insert(0, 2 - digits.size(), '0');
  return "seq" + digits;
}

}  // namespace

std::vector<double> generate_coefficients(CatalogKind kind, std::uint64_t seed) {
  const FeatureCatalog& cat = catalog(kind);
  Rng rng(mix_seed(seed, hash_label("coefficients")));
  std::vector<double> e(cat.column_count());
  for (std::size_t c = 0; c < e.size(); ++c) {
    const auto [lo, hi] = coefficient_range(cat.spec_of_column(c).level);
    e[c] = rng.log_uniform(lo, hi);
  }
  return e;
}

double perturb_energy(double clean_joules, const NoiseModel& noise, Rng& rng) {
  if (!(clean_joules > 0.0)) throw InvalidInput("clean energy must be positive");
  if (noise.kind == NoiseModel::Kind::None || noise.sigma == 0.0) return clean_joules;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double draw = rng.normal();
    const double value = noise.kind == NoiseModel::Kind::Multiplicative
                             ? clean_joules * (1.0 + noise.sigma * draw)
                             : clean_joules + noise.sigma * draw;
    if (value > 0.0) return value;
  }
  return clean_joules;
}

SynthResult generate(const SynthConfig& config) {
  config.validate();
  const CatalogKind kind = config.catalog_kind;
  std::vector<double> e_true =
      config.e_true ? *config.e_true : generate_coefficients(kind, config.seed);

  struct Pending {
    BitstreamRecord record;
    std::vector<double> fv_counts;
  };
  std::vector<Pending> pending;
  for (int s = 0; s < config.n_sequences; ++s) {
    const std::string seq = sequence_name(s);
    for (const std::string& cfg : config.configs) {
      for (const int qp : config.qps) {
        BitstreamRecord r;
        r.id = seq + "_" + cfg + "_qp" + std::to_string(qp);
        r.sequence = seq;
        r.config = cfg;
        r.qp = qp;
        pending.push_back({std::move(r), base_counts(config.seed, seq, cfg, qp)});
      }
    }
  }
  const std::size_t nq = config.qps.size();
  const std::size_t ns = static_cast<std::size_t>(config.n_sequences);
  for (const ToolOffPlanEntry& entry : config.tool_off_plan) {
    for (int i = 0; i < entry.count; ++i) {
      const std::size_t idx = static_cast<std::size_t>(i);
      const int qp = config.qps[idx % nq];
      const std::size_t seq_index = (idx / nq) % ns;
      const std::size_t rep = idx / (nq * ns);
      const std::string seq = sequence_name(static_cast<int>(seq_index));
      BitstreamRecord r;
      r.id = seq + "_" + entry.config + "_qp" + std::to_string(qp) + "_" +
             lower(to_string(entry.tool)) + "_off" + (rep ? "_r" + std::to_string(rep) : "");
      r.sequence = seq;
      r.config = entry.config;
      r.qp = qp;
      r.tool_off = entry.tool;
      std::vector<double> counts = base_counts(config.seed, seq, entry.config, qp);
      Rng jitter(mix_seed(config.seed, hash_label("tool-off/" + r.id)));
      apply_tool_off(counts, entry.tool, jitter);
      pending.push_back({std::move(r), std::move(counts)});
    }
  }

  Rng noise_rng(mix_seed(config.seed, hash_label("noise")));
  Dataset dataset(kind, SetupLabel::Synthetic);
  std::size_t row = 0;
  for (Pending& p : pending) {
    BitstreamRecord& r = p.record;
    r.features = kind == CatalogKind::FV ? std::move(p.fv_counts) : aggregate_fv_to_fvs(p.fv_counts);
    const double clean = predict(e_true, r.features);
    r.energy_joules = perturb_energy(clean, config.noise, noise_rng);
    switch (config.noise.kind) {
      case NoiseModel::Kind::None: r.energy_stddev = 0.0; break;
      case NoiseModel::Kind::Multiplicative: r.energy_stddev = config.noise.sigma * clean; break;
      case NoiseModel::Kind::Additive: r.energy_stddev = config.noise.sigma; break;
    }
    r.sample_count = 1;
    dataset.add(std::move(r), ++row);
  }
  return {std::move(dataset), std::move(e_true)};
}

}  // namespace decenergy
