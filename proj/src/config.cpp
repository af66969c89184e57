#include "qdcavity/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qdc::config {

using nlohmann::json;

void CorrelationConfig::validate() const {
  if (!(bin_ns > 0.0)) throw std::invalid_argument("correlation.bin_ns must be positive");
  if (!(window_ns >= bin_ns)) throw std::invalid_argument("correlation.window_ns must be >= bin_ns");
  if (!(cw_duration_ns > 0.0)) throw std::invalid_argument("correlation.cw_duration_ns must be positive");
  if (!(uncorrelated_fraction >= 0.0 && uncorrelated_fraction < 1.0)) {
    throw std::invalid_argument("correlation.uncorrelated_fraction must be in [0, 1)");
  }
  if (admixture_block_pulses < 1) throw std::invalid_argument("correlation.admixture_block_pulses must be >= 1");
  if (!(peak_half_window_ns >= 0.0)) throw std::invalid_argument("correlation.peak_half_window_ns must be >= 0");
}

void RunConfig::validate() const {
  try {
    system.validate();
    instrument.validate();
    pulses.validate(system.emitter_levels);
    telegraph.validate(system.g_GHz);
    correlation.validate();
    if (trajectories.threads < 1) throw std::invalid_argument("trajectories.threads must be >= 1");
    if (!(trajectories.jump_time_tolerance_ns > 0.0)) {
      throw std::invalid_argument("trajectories.jump_time_tolerance_ns must be positive");
    }
    if (!(trajectories.cw_segment_ns > 0.0)) throw std::invalid_argument("trajectories.cw_segment_ns must be positive");
    if (trajectories.pulses_per_block < 1) throw std::invalid_argument("trajectories.pulses_per_block must be >= 1");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

// Reads the keys of one section, rejecting anything not consumed.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + " must be an object");
  }
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key " + name_ + "." + k);
    }
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("bad value for " + name_ + "." + key);
    }
  }

  void get_number(const char* key, double& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (v.is_null()) out = std::nan("");
    else if (v.is_number()) out = v.get<double>();
    else throw ConfigError("bad value for " + name_ + "." + key);
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

hbt::Estimator estimator_from(const std::string& s) {
  if (s == "all_pairs") return hbt::Estimator::all_pairs;
  if (s == "start_stop") return hbt::Estimator::start_stop;
  throw ConfigError("correlation.estimator must be all_pairs or start_stop");
}

std::string estimator_name(hbt::Estimator e) {
  return e == hbt::Estimator::all_pairs ? "all_pairs" : "start_stop";
}

RunConfig from_json(const json& root) {
  RunConfig c;
  Section top(root, "config");
  if (const json* j = top.sub("system")) {
    Section s(*j, "system");
    auto& p = c.system;
    s.get_number("lambda_m_nm", p.lambda_m_nm);
    s.get_number("lambda_x_nm", p.lambda_x_nm);
    s.get_number("g_GHz", p.g_GHz);
    s.get_number("gamma_x_GHz", p.gamma_x_GHz);
    s.get_number("gamma_m_GHz", p.gamma_m_GHz);
    s.get_number("gamma_b_GHz", p.gamma_b_GHz);
    s.get_number("pump_GHz", p.pump_GHz);
    s.get_number("transfer_GHz", p.transfer_GHz);
    s.get("n_max", p.n_max);
    s.get("emitter_levels", p.emitter_levels);
    s.get_number("feeder_pump_GHz", p.feeder_pump_GHz);
    s.get_number("feeder_decay_GHz", p.feeder_decay_GHz);
    s.finish();
  }
  if (const json* j = top.sub("instrument")) {
    Section s(*j, "instrument");
    auto& i = c.instrument;
    s.get_number("spectral_resolution_pm", i.spectral_resolution_pm);
    s.get_number("apd_irf_ps", i.apd_irf_ps);
    s.get_number("efficiency", i.efficiency);
    s.get_number("rep_rate_MHz", i.rep_rate_MHz);
    s.finish();
  }
  if (const json* j = top.sub("pulses")) {
    Section s(*j, "pulses");
    auto& p = c.pulses;
    s.get_number("rep_rate_MHz", p.rep_rate_MHz);
    s.get_number("mean_captures_per_pulse", p.mean_captures_per_pulse);
    s.get_number("capture_delay_ns", p.capture_delay_ns);
    s.get("n_pulses", p.n_pulses);
    s.get("allow_reexcitation", p.allow_reexcitation);
    std::string level = p.capture_level == hilbert::kFeeder ? "feeder" : "exciton";
    s.get("capture_level", level);
    if (level == "exciton") p.capture_level = hilbert::kExciton;
    else if (level == "feeder") p.capture_level = hilbert::kFeeder;
    else throw ConfigError("pulses.capture_level must be exciton or feeder");
    s.finish();
  }
  if (const json* j = top.sub("telegraph")) {
    Section s(*j, "telegraph");
    s.get_number("resonant_fraction", c.telegraph.resonant_fraction);
    s.get_number("detuned_offset_GHz", c.telegraph.detuned_offset_GHz);
    std::string regime = "quasi_static";
    s.get("regime", regime);
    if (regime != "quasi_static") throw ConfigError("telegraph.regime must be quasi_static");
    s.finish();
  }
  if (const json* j = top.sub("trajectories")) {
    Section s(*j, "trajectories");
    auto& t = c.trajectories;
    s.get("threads", t.threads);
    s.get_number("jump_time_tolerance_ns", t.jump_time_tolerance_ns);
    s.get_number("cw_segment_ns", t.cw_segment_ns);
    s.get("pulses_per_block", t.pulses_per_block);
    if (const json* r = s.sub("recorded")) {
      if (!r->is_array()) throw ConfigError("trajectories.recorded must be an array");
      t.recorded.clear();
      for (const auto& name : *r) {
        try {
          t.recorded.push_back(hilbert::channel_from_string(name.get<std::string>()));
        } catch (const std::exception&) {
          throw ConfigError("unknown channel in trajectories.recorded");
        }
      }
    }
    s.finish();
  }
  if (const json* j = top.sub("correlation")) {
    Section s(*j, "correlation");
    auto& k = c.correlation;
    s.get_number("bin_ns", k.bin_ns);
    s.get_number("window_ns", k.window_ns);
    std::string est = estimator_name(k.estimator);
    s.get("estimator", est);
    k.estimator = estimator_from(est);
    s.get_number("cw_duration_ns", k.cw_duration_ns);
    s.get_number("uncorrelated_fraction", k.uncorrelated_fraction);
    s.get("admixture_block_pulses", k.admixture_block_pulses);
    s.get_number("peak_half_window_ns", k.peak_half_window_ns);
    s.finish();
  }
  if (const json* j = top.sub("seed"); j && !j->is_null()) {
    if (!j->is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j->get<std::uint64_t>();
  }
  top.get("output_dir", c.output_dir);
  top.finish();
  return c;
}

json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

RunConfig parse(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  RunConfig c = from_json(root);
  c.validate();
  return c;
}

RunConfig load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string canonical_json(const RunConfig& c) {
  json j;
  const auto& p = c.system;
  j["system"] = {{"lambda_m_nm", p.lambda_m_nm},   {"lambda_x_nm", p.lambda_x_nm},
                 {"g_GHz", p.g_GHz},               {"gamma_x_GHz", p.gamma_x_GHz},
                 {"gamma_m_GHz", p.gamma_m_GHz},   {"gamma_b_GHz", p.gamma_b_GHz},
                 {"pump_GHz", p.pump_GHz},         {"transfer_GHz", p.transfer_GHz},
                 {"n_max", p.n_max},               {"emitter_levels", p.emitter_levels},
                 {"feeder_pump_GHz", p.feeder_pump_GHz}, {"feeder_decay_GHz", p.feeder_decay_GHz}};
  const auto& i = c.instrument;
  j["instrument"] = {{"spectral_resolution_pm", i.spectral_resolution_pm},
                     {"apd_irf_ps", i.apd_irf_ps},
                     {"efficiency", i.efficiency},
                     {"rep_rate_MHz", i.rep_rate_MHz}};
  const auto& u = c.pulses;
  j["pulses"] = {{"rep_rate_MHz", u.rep_rate_MHz},
                 {"mean_captures_per_pulse", u.mean_captures_per_pulse},
                 {"capture_delay_ns", u.capture_delay_ns},
                 {"n_pulses", u.n_pulses},
                 {"allow_reexcitation", u.allow_reexcitation},
                 {"capture_level", u.capture_level == hilbert::kFeeder ? "feeder" : "exciton"}};
  j["telegraph"] = {{"resonant_fraction", c.telegraph.resonant_fraction},
                    {"detuned_offset_GHz", num(c.telegraph.detuned_offset_GHz)},
                    {"regime", "quasi_static"}};
  const auto& t = c.trajectories;
  json rec = json::array();
  for (auto ch : t.recorded) rec.push_back(std::string(hilbert::to_string(ch)));
  // threads is deliberately left out: results do not depend on it.
  j["trajectories"] = {{"jump_time_tolerance_ns", t.jump_time_tolerance_ns},
                       {"cw_segment_ns", t.cw_segment_ns},
                       {"pulses_per_block", t.pulses_per_block},
                       {"recorded", rec}};
  const auto& k = c.correlation;
  j["correlation"] = {{"bin_ns", k.bin_ns},
                      {"window_ns", k.window_ns},
                      {"estimator", estimator_name(k.estimator)},
                      {"cw_duration_ns", k.cw_duration_ns},
                      {"uncorrelated_fraction", k.uncorrelated_fraction},
                      {"admixture_block_pulses", k.admixture_block_pulses},
                      {"peak_half_window_ns", k.peak_half_window_ns}};
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return j.dump();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int default_threads() {
  const char* v = std::getenv("QDC_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) throw ConfigError("QDC_THREADS must be a positive integer");
  return static_cast<int>(n);
}

}  // namespace qdc::config
