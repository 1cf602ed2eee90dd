#pragma once

// Decode-energy measurement campaigns. Each iteration measures the energy of
// one decoder run and then the idle energy over the same wall-clock duration;
// the difference is one net sample. Iterations continue until the confidence
// interval of the mean is narrow enough relative to the mean itself.

#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace decenergy {

struct EnergySample {
  double decode_energy_joules = 0.0;
  double decode_duration_s = 0.0;
  double idle_energy_joules = 0.0;
  double net_energy_joules = 0.0;  // decode - idle

  static EnergySample from_phases(double decode_joules, double duration_s, double idle_joules);
};

struct SessionConfig {
  double alpha = 0.99;  // two-sided interval probability
  double beta = 0.02;   // allowed relative deviation of the mean
  int m_min = 5;
  int m_max = 50;

  // Throws InvalidInput unless 0 < alpha < 1, 0 < beta < 1, 2 <= m_min <= m_max.
  void validate() const;
};

class MeasurementSession {
 public:
  explicit MeasurementSession(SessionConfig config = {});

  const SessionConfig& config() const { return config_; }
  const std::vector<EnergySample>& samples() const { return samples_; }
  int count() const { return static_cast<int>(samples_.size()); }

  void add(const EnergySample& sample);

  // Sample mean and (n-1) standard deviation of the net energies.
  double mean() const;
  double stddev() const;

  // Full interval width 2 * sigma/sqrt(m) * t(alpha, m-1).
  double interval_width() const;

 private:
  SessionConfig config_;
  std::vector<EnergySample> samples_;
};

// True iff m >= m_min and 2*(sigma/sqrt(m))*t(alpha, m-1) < beta*mean.
// Needs at least two samples; throws MeasurementError when the mean net
// energy is not positive.
bool confidence_satisfied(const MeasurementSession& session);

// Difference of two cumulative counter readings with at most one wrap.
// An infinite wrap range means the counter never wraps; a decrease is then
// an error.
double counter_delta(double before, double after, double wrap_range);

class EnergyCounter {
 public:
  virtual ~EnergyCounter() = default;
  virtual double read_cumulative_joules() = 0;
  virtual double wrap_range_joules() const = 0;
};

// Linux powercap layout: <dir>/energy_uj and <dir>/max_energy_range_uj, both
// integer microjoules.
class PowercapCounter final : public EnergyCounter {
 public:
  explicit PowercapCounter(std::filesystem::path zone_dir);
  double read_cumulative_joules() override;
  double wrap_range_joules() const override { return wrap_joules_; }

 private:
  std::filesystem::path zone_dir_;
  double wrap_joules_;
};

// Replays a fixed list of readings in joules; running out is a read failure.
class ScriptedCounter final : public EnergyCounter {
 public:
  explicit ScriptedCounter(std::vector<double> readings,
                           double wrap_range = std::numeric_limits<double>::infinity());

  // One reading per line; blank lines and '#' comments are skipped. An
  // optional "wrap=<joules>" line declares the wrap range.
  static ScriptedCounter from_file(const std::filesystem::path& path);

  double read_cumulative_joules() override;
  double wrap_range_joules() const override { return wrap_; }
  std::size_t remaining() const { return readings_.size() - next_; }

 private:
  std::vector<double> readings_;
  double wrap_;
  std::size_t next_ = 0;
};

// Runs the decoder once to completion and returns its wall-clock duration.
class DecodeRunner {
 public:
  virtual ~DecodeRunner() = default;
  virtual double run() = 0;
};

// Executes a command line through /bin/sh. A nonzero exit status throws
// MeasurementError.
class ShellRunner final : public DecodeRunner {
 public:
  explicit ShellRunner(std::string command) : command_(std::move(command)) {}
  double run() override;

 private:
  std::string command_;
};

class IdleWaiter {
 public:
  virtual ~IdleWaiter() = default;
  virtual void wait(double seconds) = 0;
};

class SleepWaiter final : public IdleWaiter {
 public:
  void wait(double seconds) override;
};

struct SessionResult {
  MeasurementSession session;
  double mean_energy_joules = 0.0;
  bool converged = false;
};

// Samples until the confidence test passes or m_max samples are taken.
SessionResult run_session(DecodeRunner& runner, EnergyCounter& counter, IdleWaiter& idle,
                          const SessionConfig& config);

nlohmann::ordered_json session_to_json(const SessionResult& result, const std::string& command);

}  // namespace decenergy
