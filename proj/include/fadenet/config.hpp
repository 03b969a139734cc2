#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fadenet/attractor.hpp"

namespace fadenet {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialSpec {
  enum class Kind { kZero, kConstant, kBall };
  Kind kind = Kind::kZero;
  std::vector<double> values;  // kConstant
  double radius = 1.0;         // kBall
};

struct RunSection {
  bool inclusion = false;
  std::optional<double> eps;
  std::vector<double> eps_list;
  StepMethod method = StepMethod::kEuler;
  double step = 0.01;
  double horizon = 1.0;
  double start = 0.0;
  std::optional<double> residual_tol;
  std::optional<double> window;
  InitialSpec initial;
  std::vector<SelectorPolicy> policies;
};

struct AttractorSection {
  double time = 0.0;
  std::vector<double> tau_list;
  std::size_t samples_per_tau = 8;
  std::vector<double> eps_list = {0.0};
  double step = 0.01;
  std::optional<double> window;
  StepMethod method = StepMethod::kEuler;
  std::vector<SelectorPolicy> policies;
};

struct ExperimentConfig {
  NetworkParams network;
  RunSection run;
  std::optional<AttractorSection> attractor;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 1;
  std::string output_dir = "out";
  std::string fingerprint;  // hash of the raw config bytes

  // window large enough that the tail weight of the initial data falls below
  // the quadrature tolerance, rounded up to the grid
  double default_window(double initial_norm, double step) const {
    const double target =
        std::log(std::max(1.0, initial_norm) * 1e9) / network.gamma;
    const double cells = std::ceil(std::max(1.0, target / step));
    return cells * step;
  }
};

inline std::string fingerprint_bytes(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace cfg_detail {

using json = nlohmann::json;

[[noreturn]] inline void bad(const std::string& where, const std::string& msg) {
  throw config_error(where + ": " + msg);
}

inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) ok = true;
    if (!ok) bad(where, "unknown key '" + it.key() + "'");
  }
}

inline double number(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) bad(where, std::string("missing key '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) bad(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const std::string& where, const char* key,
                        double fallback) {
  return obj.contains(key) ? number(obj, where, key) : fallback;
}

inline DecayFn parse_decay(const json& obj, const std::string& where) {
  if (!obj.is_object()) bad(where, "decay entry must be an object");
  check_keys(obj, where, {"kind", "value", "base", "slope", "cap", "amp", "rate"});
  const std::string kind = obj.value("kind", "");
  if (kind == "constant") return DecayFn::constant(number(obj, where, "value"));
  if (kind == "affine_clipped")
    return DecayFn::affine_clipped(number(obj, where, "base"),
                                   number(obj, where, "slope"),
                                   number(obj, where, "cap"));
  if (kind == "logistic_offset")
    return DecayFn::logistic_offset(number(obj, where, "base"),
                                    number(obj, where, "amp"),
                                    number(obj, where, "rate"));
  bad(where, "unknown decay kind '" + kind + "'");
}

inline StimulusFn parse_stimulus(const json& obj, const std::string& where) {
  if (!obj.is_object()) bad(where, "stimulus entry must be an object");
  check_keys(obj, where,
             {"kind", "value", "amp", "freq", "phase", "center", "width", "terms"});
  const std::string kind = obj.value("kind", "");
  if (kind == "constant") return StimulusFn::constant(number(obj, where, "value"));
  if (kind == "sinusoid")
    return StimulusFn::sinusoid(number(obj, where, "amp"), number(obj, where, "freq"),
                                number_or(obj, where, "phase", 0.0));
  if (kind == "gaussian_pulse")
    return StimulusFn::gaussian_pulse(number(obj, where, "amp"),
                                      number(obj, where, "center"),
                                      number(obj, where, "width"));
  if (kind == "sum") {
    if (!obj.contains("terms") || !obj.at("terms").is_array())
      bad(where, "sum stimulus needs a 'terms' array");
    std::vector<StimulusFn> terms;
    for (const auto& term : obj.at("terms"))
      terms.push_back(parse_stimulus(term, where + ".terms"));
    return StimulusFn::sum(std::move(terms));
  }
  bad(where, "unknown stimulus kind '" + kind + "'");
}

inline DelayMeasure parse_measure(const json& obj, const std::string& where) {
  if (!obj.is_object()) bad(where, "measure entry must be an object");
  check_keys(obj, where, {"atoms", "densities"});
  std::vector<DelayMeasure::Atom> atoms;
  std::vector<DelayMeasure::ExpTerm> terms;
  if (obj.contains("atoms")) {
    for (const auto& a : obj.at("atoms")) {
      check_keys(a, where + ".atoms", {"location", "weight"});
      atoms.push_back({number(a, where, "location"), number(a, where, "weight")});
    }
  }
  if (obj.contains("densities")) {
    for (const auto& d : obj.at("densities")) {
      check_keys(d, where + ".densities", {"coeff", "rate"});
      terms.push_back({number(d, where, "coeff"), number(d, where, "rate")});
    }
  }
  try {
    return DelayMeasure(std::move(atoms), std::move(terms));
  } catch (const invalid_input& e) {
    bad(where, e.what());
  }
}

// scalar broadcast or per-entry array
inline std::vector<double> parse_numbers(const json& v, const std::string& where,
                                         std::size_t count) {
  std::vector<double> out;
  if (v.is_number()) {
    out.assign(count, v.get<double>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) bad(where, "expected numbers");
      out.push_back(e.get<double>());
    }
  } else {
    bad(where, "expected a number or an array of numbers");
  }
  if (out.size() != count)
    bad(where, "expected " + std::to_string(count) + " entries, got " +
                   std::to_string(out.size()));
  return out;
}

template <class T, class Parse>
std::vector<T> parse_list(const json& v, const std::string& where, std::size_t count,
                          Parse&& parse) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(parse(e, where));
    if (out.size() != count)
      bad(where, "expected " + std::to_string(count) + " entries, got " +
                     std::to_string(out.size()));
  } else {
    out.assign(count, parse(v, where));
  }
  return out;
}

inline SelectorPolicy parse_policy(const json& v, const std::string& where,
                                   std::uint64_t base_seed) {
  SelectorPolicy pol;
  std::string kind;
  if (v.is_string()) {
    kind = v.get<std::string>();
  } else if (v.is_object()) {
    check_keys(v, where, {"kind", "seed", "period"});
    kind = v.value("kind", "");
    if (v.contains("seed")) pol.seed = v.at("seed").get<std::uint64_t>();
    pol.period = number_or(v, where, "period", 1.0);
  } else {
    bad(where, "policy must be a string or an object");
  }
  if (kind == "lower") pol.kind = SelectorPolicy::Kind::kLower;
  else if (kind == "upper") pol.kind = SelectorPolicy::Kind::kUpper;
  else if (kind == "midpoint") pol.kind = SelectorPolicy::Kind::kMidpoint;
  else if (kind == "random") pol.kind = SelectorPolicy::Kind::kRandom;
  else if (kind == "bang_bang") pol.kind = SelectorPolicy::Kind::kBangBang;
  else bad(where, "unknown policy '" + kind + "'");
  if (pol.kind == SelectorPolicy::Kind::kRandom && pol.seed == 0)
    pol.seed = Rng::mix(base_seed, 0x9e3779b9);
  return pol;
}

inline NetworkParams parse_network(const json& obj) {
  if (!obj.is_object()) bad("network", "must be an object");
  check_keys(obj, "network",
             {"n", "gamma", "alpha", "decay_x", "decay_z", "inhibition", "hebbian",
              "thresholds", "measures", "stimuli"});
  NetworkParams p;
  const double n = number(obj, "network", "n");
  if (n < 1 || n != std::floor(n)) bad("network", "'n' must be a positive integer");
  p.n = static_cast<std::size_t>(n);
  p.gamma = number(obj, "network", "gamma");
  p.alpha = number(obj, "network", "alpha");
  if (!obj.contains("decay_x")) bad("network", "missing 'decay_x'");
  p.decay_x = parse_list<DecayFn>(obj.at("decay_x"), "network.decay_x", p.n, parse_decay);
  if (!obj.contains("decay_z")) bad("network", "missing 'decay_z'");
  p.decay_z =
      parse_list<DecayFn>(obj.at("decay_z"), "network.decay_z", p.pairs(), parse_decay);
  if (!obj.contains("inhibition")) bad("network", "missing 'inhibition'");
  p.inhibition = parse_numbers(obj.at("inhibition"), "network.inhibition", p.pairs());
  if (!obj.contains("hebbian")) bad("network", "missing 'hebbian'");
  p.hebbian = parse_numbers(obj.at("hebbian"), "network.hebbian", p.pairs());
  if (!obj.contains("thresholds")) bad("network", "missing 'thresholds'");
  p.threshold = parse_numbers(obj.at("thresholds"), "network.thresholds", p.n);
  if (!obj.contains("measures")) bad("network", "missing 'measures'");
  p.delay = parse_list<DelayMeasure>(obj.at("measures"), "network.measures", p.pairs(),
                                     parse_measure);
  if (!obj.contains("stimuli")) bad("network", "missing 'stimuli'");
  p.stimulus = parse_list<StimulusFn>(obj.at("stimuli"), "network.stimuli", p.n,
                                      parse_stimulus);
  try {
    p.check_structure();
  } catch (const invalid_input& e) {
    bad("network", e.what());
  }
  return p;
}

inline StepMethod parse_method(const json& obj, const std::string& where) {
  const std::string m = obj.value("method", "euler");
  if (m == "euler") return StepMethod::kEuler;
  if (m == "rk4_interp") return StepMethod::kRk4Interp;
  bad(where, "unknown method '" + m + "'");
}

inline InitialSpec parse_initial(const json& v, const std::string& where) {
  InitialSpec spec;
  if (!v.is_object()) bad(where, "initial must be an object");
  check_keys(v, where, {"kind", "values", "radius"});
  const std::string kind = v.value("kind", "zero");
  if (kind == "zero") {
    spec.kind = InitialSpec::Kind::kZero;
  } else if (kind == "constant") {
    spec.kind = InitialSpec::Kind::kConstant;
    if (!v.contains("values") || !v.at("values").is_array())
      bad(where, "constant initial needs a 'values' array");
    for (const auto& e : v.at("values")) spec.values.push_back(e.get<double>());
  } else if (kind == "ball") {
    spec.kind = InitialSpec::Kind::kBall;
    spec.radius = number(v, where, "radius");
  } else {
    bad(where, "unknown initial kind '" + kind + "'");
  }
  return spec;
}

}  // namespace cfg_detail

inline ExperimentConfig parse_config(const std::string& text, const std::string& name) {
  using cfg_detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // map the byte offset to line/column for the diagnostic
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw config_error(name + ":" + std::to_string(line) + ":" + std::to_string(col) +
                       ": " + e.what());
  }

  cfg_detail::check_keys(root, "config",
                         {"seed", "threads", "output_dir", "network", "run", "attractor"});
  ExperimentConfig cfg;
  cfg.fingerprint = fingerprint_bytes(text);
  if (root.contains("seed")) {
    cfg.seed = root.at("seed").get<std::uint64_t>();
    cfg.seed_given = true;
  }
  if (root.contains("threads")) {
    const auto t = root.at("threads").get<long long>();
    if (t < 1) cfg_detail::bad("config", "'threads' must be >= 1");
    cfg.threads = static_cast<unsigned>(t);
  }
  cfg.output_dir = root.value("output_dir", "out");

  if (!root.contains("network")) cfg_detail::bad("config", "missing 'network'");
  cfg.network = cfg_detail::parse_network(root.at("network"));

  if (root.contains("run")) {
    const json& r = root.at("run");
    cfg_detail::check_keys(r, "run",
                           {"mode", "eps", "eps_list", "method", "step", "horizon",
                            "start", "residual_tol", "window", "initial", "policies"});
    const std::string mode = r.value("mode", "sigmoidal");
    if (mode == "inclusion") cfg.run.inclusion = true;
    else if (mode != "sigmoidal") cfg_detail::bad("run", "unknown mode '" + mode + "'");
    if (r.contains("eps")) cfg.run.eps = cfg_detail::number(r, "run", "eps");
    if (r.contains("eps_list"))
      for (const auto& e : r.at("eps_list")) cfg.run.eps_list.push_back(e.get<double>());
    cfg.run.method = cfg_detail::parse_method(r, "run");
    cfg.run.step = cfg_detail::number_or(r, "run", "step", 0.01);
    cfg.run.horizon = cfg_detail::number_or(r, "run", "horizon", 1.0);
    cfg.run.start = cfg_detail::number_or(r, "run", "start", 0.0);
    if (r.contains("residual_tol"))
      cfg.run.residual_tol = cfg_detail::number(r, "run", "residual_tol");
    if (r.contains("window")) cfg.run.window = cfg_detail::number(r, "run", "window");
    if (r.contains("initial"))
      cfg.run.initial = cfg_detail::parse_initial(r.at("initial"), "run.initial");
    if (r.contains("policies"))
      for (const auto& e : r.at("policies"))
        cfg.run.policies.push_back(cfg_detail::parse_policy(e, "run.policies", cfg.seed));
  }

  if (root.contains("attractor")) {
    const json& a = root.at("attractor");
    cfg_detail::check_keys(a, "attractor",
                           {"time", "tau_list", "samples_per_tau", "eps_list", "step",
                            "window", "method", "policies"});
    AttractorSection sec;
    sec.time = cfg_detail::number(a, "attractor", "time");
    if (!a.contains("tau_list")) cfg_detail::bad("attractor", "missing 'tau_list'");
    for (const auto& e : a.at("tau_list")) sec.tau_list.push_back(e.get<double>());
    sec.samples_per_tau = a.value("samples_per_tau", std::size_t{8});
    if (a.contains("eps_list")) {
      sec.eps_list.clear();
      for (const auto& e : a.at("eps_list")) sec.eps_list.push_back(e.get<double>());
    }
    sec.step = cfg_detail::number_or(a, "attractor", "step", 0.01);
    if (a.contains("window"))
      sec.window = cfg_detail::number(a, "attractor", "window");
    sec.method = cfg_detail::parse_method(a, "attractor");
    if (a.contains("policies"))
      for (const auto& e : a.at("policies"))
        sec.policies.push_back(cfg_detail::parse_policy(e, "attractor.policies", cfg.seed));
    cfg.attractor = std::move(sec);
  }

  const bool stochastic =
      cfg.run.initial.kind == InitialSpec::Kind::kBall || cfg.attractor.has_value() ||
      std::any_of(cfg.run.policies.begin(), cfg.run.policies.end(),
                  [](const SelectorPolicy& p) {
                    return p.kind == SelectorPolicy::Kind::kRandom;
                  });
  if (stochastic && !cfg.seed_given)
    cfg_detail::bad("config", "a seed is required for stochastic elements");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace fadenet
