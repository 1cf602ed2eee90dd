#include "decenergy/measurement.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "decenergy/errors.hpp"
#include "decenergy/io_util.hpp"
#include "decenergy/student_t.hpp"
#include "decenergy/version.hpp"

namespace decenergy {

EnergySample EnergySample::from_phases(double decode_joules, double duration_s,
                                       double idle_joules) {
  if (!(duration_s > 0.0)) throw MeasurementError("decode duration must be positive");
  return {decode_joules, duration_s, idle_joules, decode_joules - idle_joules};
}

void SessionConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("beta must lie in (0, 1)");
  if (m_min < 2) throw InvalidInput("m_min must be at least 2");
  if (m_max < m_min) throw InvalidInput("m_max must be at least m_min");
}

MeasurementSession::MeasurementSession(SessionConfig config) : config_(config) {
  config_.validate();
}

void MeasurementSession::add(const EnergySample& sample) { samples_.push_back(sample); }

double MeasurementSession::mean() const {
  if (samples_.empty()) throw MeasurementError("no samples");
  double sum = 0.0;
  for (const EnergySample& s : samples_) sum += s.net_energy_joules;
  return sum / static_cast<double>(samples_.size());
}

double MeasurementSession::stddev() const {
  if (samples_.size() < 2) throw MeasurementError("standard deviation needs two samples");
  const double mu = mean();
  double ss = 0.0;
  for (const EnergySample& s : samples_) {
    const double d = s.net_energy_joules - mu;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(samples_.size() - 1));
}

double MeasurementSession::interval_width() const {
  const int m = count();
  return 2.0 * stddev() / std::sqrt(static_cast<double>(m)) * t_critical(config_.alpha, m - 1);
}

bool confidence_satisfied(const MeasurementSession& session) {
  if (session.count() < 2) throw MeasurementError("confidence test needs at least two samples");
  const double mean = session.mean();
  if (!(mean > 0.0)) {
    throw MeasurementError("mean net energy " + format_double(mean) +
                           " J is not positive; idle energy exceeds decode energy");
  }
  if (session.count() < session.config().m_min) return false;
  return session.interval_width() < session.config().beta * mean;
}

double counter_delta(double before, double after, double wrap_range) {
  if (!(wrap_range > 0.0)) throw InvalidInput("wrap range must be positive");
  for (const double reading : {before, after}) {
    if (!(reading >= 0.0 && reading < wrap_range)) {
      throw InvalidInput("counter reading " + format_double(reading) + " outside [0, " +
                         format_double(wrap_range) + ")");
    }
  }
  if (after >= before) return after - before;
  if (std::isinf(wrap_range)) throw MeasurementError("non-wrapping counter decreased");
  return after + wrap_range - before;
}

namespace {

double read_microjoules(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::string text;
  if (!in || !(in >> text)) throw MeasurementError("cannot read energy counter '" + file.string() + "'");
  try {
    return static_cast<double>(parse_integer(text, file.string()));
  } catch (const InvalidInput& e) {
    throw MeasurementError(e.what());
  }
}

}  // namespace

PowercapCounter::PowercapCounter(std::filesystem::path zone_dir)
    : zone_dir_(std::move(zone_dir)),
      wrap_joules_(read_microjoules(zone_dir_ / "max_energy_range_uj") * 1e-6) {
  if (!(wrap_joules_ > 0.0)) throw MeasurementError("powercap zone reports a zero energy range");
}

double PowercapCounter::read_cumulative_joules() {
  return read_microjoules(zone_dir_ / "energy_uj") * 1e-6;
}

ScriptedCounter::ScriptedCounter(std::vector<double> readings, double wrap_range)
    : readings_(std::move(readings)), wrap_(wrap_range) {
  if (!(wrap_ > 0.0)) throw InvalidInput("wrap range must be positive");
}

ScriptedCounter ScriptedCounter::from_file(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<double> readings;
  double wrap = std::numeric_limits<double>::infinity();
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line.rfind("wrap=", 0) == 0) {
      wrap = parse_double(std::string_view(line).substr(5), "wrap range");
      continue;
    }
    readings.push_back(parse_double(line, "counter reading"));
  }
  return ScriptedCounter(std::move(readings), wrap);
}

double ScriptedCounter::read_cumulative_joules() {
  if (next_ >= readings_.size()) throw MeasurementError("scripted counter exhausted");
  return readings_[next_++];
}

double ShellRunner::run() {
  const auto start = std::chrono::steady_clock::now();
  const int status = std::system(command_.c_str());
  const auto stop = std::chrono::steady_clock::now();
  if (status == -1) throw MeasurementError("cannot launch decoder command");
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw MeasurementError("decoder command failed with status " +
                           std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : status));
  }
  return std::chrono::duration<double>(stop - start).count();
}

void SleepWaiter::wait(double seconds) {
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

SessionResult run_session(DecodeRunner& runner, EnergyCounter& counter, IdleWaiter& idle,
                          const SessionConfig& config) {
  SessionResult result{MeasurementSession(config), 0.0, false};
  MeasurementSession& session = result.session;
  const double wrap = counter.wrap_range_joules();
  while (session.count() < config.m_max) {
    const double decode_start = counter.read_cumulative_joules();
    const double duration = runner.run();
    const double decode_end = counter.read_cumulative_joules();

    const double idle_start = counter.read_cumulative_joules();
    idle.wait(duration);
    const double idle_end = counter.read_cumulative_joules();

    session.add(EnergySample::from_phases(counter_delta(decode_start, decode_end, wrap),
                                          // guard against a zero-length timer reading
                                          duration > 0.0 ? duration : 1e-9,
                                          counter_delta(idle_start, idle_end, wrap)));
    if (session.count() >= config.m_min && confidence_satisfied(session)) {
      result.converged = true;
      break;
    }
  }
  result.mean_energy_joules = session.mean();
  if (!(result.mean_energy_joules > 0.0)) {
    throw MeasurementError("mean net energy is not positive");
  }
  return result;
}

nlohmann::ordered_json session_to_json(const SessionResult& result, const std::string& command) {
  const MeasurementSession& s = result.session;
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["command"] = command;
  j["alpha"] = s.config().alpha;
  j["beta"] = s.config().beta;
  j["m_min"] = s.config().m_min;
  j["m_max"] = s.config().m_max;
  j["converged"] = result.converged;
  j["sample_count"] = s.count();
  j["mean_energy_joules"] = result.mean_energy_joules;
  j["stddev_joules"] = s.count() >= 2 ? s.stddev() : 0.0;
  j["interval_width_joules"] = s.count() >= 2 ? s.interval_width() : 0.0;
  auto samples = nlohmann::ordered_json::array();
  for (const EnergySample& e : s.samples()) {
    samples.push_back({{"decode_energy_joules", e.decode_energy_joules},
                       {"decode_duration_s", e.decode_duration_s},
                       {"idle_energy_joules", e.idle_energy_joules},
                       {"net_energy_joules", e.net_energy_joules}});
  }
  j["samples"] = std::move(samples);
  return j;
}

}  // namespace decenergy
