// ptproc command-line front end. Talks to the library only through ptproc.h.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <sys/utsname.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptproc/ptproc.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitEngine = 3;
constexpr int kExitIo = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EngineFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- handles

struct Deleter {
  void operator()(ptproc_model* p) const noexcept { ptproc_model_destroy(p); }
  void operator()(ptproc_statistic* p) const noexcept { ptproc_statistic_destroy(p); }
  void operator()(ptproc_pattern* p) const noexcept { ptproc_pattern_destroy(p); }
  void operator()(ptproc_mh_chain* p) const noexcept { ptproc_mh_chain_destroy(p); }
};
template <class T>
using Handle = std::unique_ptr<T, Deleter>;

// Invalid arguments surface as configuration errors; anything else is an engine failure.
void check(ptproc_status status, const std::string& context) {
  if (status == PTPROC_OK) return;
  const std::string msg = context + ": " + ptproc_last_error();
  if (status == PTPROC_ERR_INVALID_ARGUMENT) throw ConfigError(msg);
  throw EngineFailure(msg);
}

// ---------------------------------------------------------------- output

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class Output {
 public:
  explicit Output(const std::optional<std::string>& path) : path_(path.value_or("")) {
    if (path) {
      file_.open(*path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoFailure("cannot open '" + *path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close() {
    if (file_.is_open()) {
      file_.close();
      if (file_.fail()) throw IoFailure("failed writing '" + path_ + "'");
    } else {
      std::cout.flush();
    }
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void write_json(const Json& j, const std::optional<std::string>& path) {
  Output out(path);
  out.stream() << j.dump(2) << '\n';
  out.close();
}

// ---------------------------------------------------------------- config reading

std::string normalize_name(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  return s;
}

// Reads one JSON object with defaults, recording every resolved field in `out`
// and rejecting keys it was never asked about.
class Reader {
 public:
  Reader(const Json* raw, std::string path) : raw_(raw), path_(std::move(path)) {
    if (raw_ && raw_->is_null()) raw_ = nullptr;
    if (raw_ && !raw_->is_object()) throw ConfigError(where() + "expected an object");
  }

  const Json* get(const char* key) {
    seen_.emplace_back(key);
    if (!raw_) return nullptr;
    const auto it = raw_->find(key);
    return it == raw_->end() || it->is_null() ? nullptr : &*it;
  }

  double real(const char* key, double fallback) {
    const Json* v = get(key);
    const double x = v ? as_real(*v, key) : fallback;
    out[key] = x;
    return x;
  }

  double required_real(const char* key, const std::string& hint) {
    const Json* v = get(key);
    if (!v) throw ConfigError(where() + key + ": required (" + hint + ")");
    const double x = as_real(*v, key);
    out[key] = x;
    return x;
  }

  std::uint64_t count(const char* key, std::uint64_t fallback) {
    const Json* v = get(key);
    std::uint64_t x = fallback;
    if (v) {
      if (v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        x = v->get<std::uint64_t>();
      } else {
        throw ConfigError(where() + key + ": expected a nonnegative integer");
      }
    }
    out[key] = x;
    return x;
  }

  bool flag(const char* key, bool fallback) {
    const Json* v = get(key);
    if (v && !v->is_boolean()) throw ConfigError(where() + key + ": expected true or false");
    const bool x = v ? v->get<bool>() : fallback;
    out[key] = x;
    return x;
  }

  std::string name(const char* key, const std::string& fallback) {
    const Json* v = get(key);
    if (v && !v->is_string()) throw ConfigError(where() + key + ": expected a string");
    std::string x = v ? normalize_name(v->get<std::string>()) : fallback;
    out[key] = x;
    return x;
  }

  void forbid(const char* key, const std::string& why) {
    if (get(key)) throw ConfigError(where() + key + ": " + why);
  }

  void finish() const {
    if (!raw_) return;
    for (const auto& [key, value] : raw_->items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw ConfigError(where() + key + ": unknown field");
      }
    }
  }

  std::string where() const { return path_.empty() ? std::string() : path_ + "."; }

  Json out = Json::object();

 private:
  double as_real(const Json& v, const char* key) const {
    if (!v.is_number()) throw ConfigError(where() + key + ": expected a number");
    return v.get<double>();
  }

  const Json* raw_;
  std::string path_;
  std::vector<std::string> seen_;
};

Json load_config(const std::optional<std::string>& path) {
  if (!path) return Json::object();
  std::ifstream in(*path, std::ios::binary);
  if (!in) throw ConfigError("--config: cannot open '" + *path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config: '" + *path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("--config: top level must be an object");
  // A previous report can be fed back as its own config.
  if (j.contains("config") && j["config"].is_object()) return j["config"];
  return j;
}

Json& child(Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_object()) j[key] = Json::object();
  return j[key];
}

// ---------------------------------------------------------------- shared flags

struct ModelFlags {
  std::optional<std::string> model;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<double> r;
  std::optional<double> alpha;
  std::optional<std::string> stat;
  std::optional<double> band;
  std::optional<std::string> window;

  void attach(CLI::App& app) {
    app.add_option("--model", model, "Model kind: strauss or inhom-strauss");
    app.add_option("--beta", beta, "Activity beta > 0");
    app.add_option("--gamma", gamma, "Interaction parameter in (0, 1]");
    app.add_option("--r", r, "Interaction range (default 0.1)");
    app.add_option("--alpha", alpha, "Vertical decay for inhom-strauss (default 1)");
    app.add_option("--stat", stat, "Statistic: papangelou-origin, boundary-count or point-count");
    app.add_option("--band", band, "Band for boundary-count (default 0.49)");
    app.add_option("--window", window, "Window as lo:hi per axis, comma separated, e.g. --window=-0.5:0.5,-0.5:0.5");
  }

  void apply(Json& raw) const {
    if (model || beta || gamma || r || alpha) {
      Json& m = child(raw, "model");
      if (model) m["kind"] = *model;
      if (beta) m["beta"] = *beta;
      if (gamma) m["gamma"] = *gamma;
      if (r) m["r"] = *r;
      if (alpha) m["alpha"] = *alpha;
    }
    if (stat || band) {
      Json& s = child(raw, "statistic");
      if (stat) s["kind"] = *stat;
      if (band) s["band"] = *band;
    }
    if (window) raw["window"] = parse_window_flag(*window);
  }

  static Json parse_window_flag(const std::string& text) {
    Json lower = Json::array(), upper = Json::array();
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t comma = std::min(text.find(',', start), text.size());
      const std::string axis = text.substr(start, comma - start);
      const std::size_t colon = axis.find(':');
      double lo = 0.0, hi = 0.0;
      const auto parse = [&](const std::string& s, double& v) {
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
      };
      if (colon == std::string::npos || !parse(axis.substr(0, colon), lo) || !parse(axis.substr(colon + 1), hi)) {
        throw ConfigError("--window: expected lo:hi[,lo:hi...], got '" + text + "'");
      }
      lower.push_back(lo);
      upper.push_back(hi);
      start = comma + 1;
    }
    return Json{{"lower", lower}, {"upper", upper}};
  }
};

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  bool trace = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "JSON config file; flags override its fields");
    app.add_option("--seed", seed, "Master seed (64-bit)");
    app.add_option("--threads", threads, "Worker threads; results do not depend on it")
        ->envname("PTPROC_THREADS")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out, "Output path (default: stdout)");
    app.add_flag("--trace", trace, "Emit a per-step trace alongside the output");
  }

  void apply(Json& raw) const {
    if (seed) raw["seed"] = *seed;
    if (threads) raw["threads"] = *threads;
    if (trace) raw["trace"] = true;
  }
};

// ---------------------------------------------------------------- resolution

constexpr const char* kModelHint = "set --beta / --gamma or the model block in --config";

Json resolve_model(const Json* raw) {
  Reader rd(raw, "model");
  const std::string kind = rd.name("kind", "strauss");
  if (kind != "strauss" && kind != "inhom_strauss") {
    throw ConfigError("model.kind: expected strauss or inhom_strauss, got '" + kind + "'");
  }
  rd.required_real("beta", kModelHint);
  rd.required_real("gamma", kModelHint);
  rd.real("r", 0.1);
  if (kind == "inhom_strauss") {
    rd.real("alpha", 1.0);
  } else {
    rd.forbid("alpha", "only valid for inhom_strauss");
  }
  rd.finish();
  return rd.out;
}

Json resolve_window(const Json* raw) {
  if (!raw || raw->is_null()) return Json{{"lower", {-0.5, -0.5}}, {"upper", {0.5, 0.5}}};
  Reader rd(raw, "window");
  const auto bounds = [&](const char* key) {
    const Json* v = rd.get(key);
    if (!v) throw ConfigError(std::string("window.") + key + ": required");
    if (!v->is_array() || v->empty()) throw ConfigError(std::string("window.") + key + ": expected a list of numbers");
    Json list = Json::array();
    for (const auto& x : *v) {
      if (!x.is_number()) throw ConfigError(std::string("window.") + key + ": expected a list of numbers");
      list.push_back(x.get<double>());
    }
    return list;
  };
  Json out{{"lower", bounds("lower")}, {"upper", bounds("upper")}};
  if (out["lower"].size() != out["upper"].size()) throw ConfigError("window: lower and upper differ in length");
  rd.finish();
  return out;
}

Json resolve_statistic(const Json* raw, const std::string& fallback) {
  Reader rd(raw, "statistic");
  const std::string kind = rd.name("kind", fallback);
  if (kind == "boundary_count") {
    rd.real("band", 0.49);
  } else if (kind == "papangelou_origin" || kind == "point_count") {
    rd.forbid("band", "only valid for boundary_count");
  } else {
    throw ConfigError("statistic.kind: expected papangelou_origin, boundary_count or point_count, got '" + kind + "'");
  }
  rd.finish();
  return rd.out;
}

std::string resolve_engine_name(Reader& rd, const char* key, const std::string& fallback) {
  const std::string e = rd.name(key, fallback);
  if (e != "ais" && e != "mh" && e != "cftp") throw ConfigError(std::string(key) + ": expected ais, mh or cftp, got '" + e + "'");
  return e;
}

ptproc_engine engine_from_name(const std::string& e) {
  if (e == "mh") return PTPROC_ENGINE_MH;
  if (e == "cftp") return PTPROC_ENGINE_CFTP;
  return PTPROC_ENGINE_AIS;
}

const char* engine_name(ptproc_engine e) {
  switch (e) {
    case PTPROC_ENGINE_MH: return "mh";
    case PTPROC_ENGINE_CFTP: return "cftp";
    case PTPROC_ENGINE_AIS: break;
  }
  return "ais";
}

// Fills the engine blocks and sampling limits into `top.out`.
ptproc_engine_config resolve_engine_config(Reader& top, const Json* raw) {
  ptproc_engine_config cfg;
  ptproc_engine_config_default(&cfg);
  const auto sub = [&](const char* key) -> const Json* { return raw && raw->contains(key) ? &(*raw)[key] : nullptr; };

  cfg.seed = top.count("seed", cfg.seed);
  const std::uint64_t threads = top.count("threads", cfg.threads);
  if (threads < 1 || threads > 4096) throw ConfigError("threads: expected 1..4096");
  cfg.threads = static_cast<uint32_t>(threads);
  cfg.min_samples = top.count("min_samples", cfg.min_samples);
  cfg.max_samples = top.count("max_samples", cfg.max_samples);

  top.get("ais");
  Reader ais(sub("ais"), "ais");
  cfg.ais.rho0 = ais.real("rho0", cfg.ais.rho0);
  cfg.ais.m_rho = ais.real("m_rho", cfg.ais.m_rho);
  cfg.ais.M_rho = ais.real("M_rho", cfg.ais.M_rho);
  cfg.ais.n1 = ais.count("n1", cfg.ais.n1);
  cfg.ais.n_t = ais.count("n_t", cfg.ais.n_t);
  cfg.ais.eta2 = ais.real("eta2", cfg.ais.eta2);
  cfg.ais.min_steps = ais.count("min_steps", cfg.ais.min_steps);
  cfg.ais.max_steps = ais.count("max_steps", cfg.ais.max_steps);
  ais.finish();
  top.out["ais"] = ais.out;

  top.get("mh");
  Reader mh(sub("mh"), "mh");
  cfg.mh.p_birth = mh.real("p_birth", cfg.mh.p_birth);
  cfg.mh.burn_in = mh.count("burn_in", cfg.mh.burn_in);
  cfg.mh.thin = mh.count("thin", cfg.mh.thin);
  cfg.mh.initial_rho = mh.real("initial_rho", cfg.mh.initial_rho);
  mh.finish();
  top.out["mh"] = mh.out;

  top.get("cftp");
  Reader cftp(sub("cftp"), "cftp");
  const std::uint64_t t_max = cftp.count("t_max", cfg.cftp.t_max);
  if (t_max > 64) throw ConfigError("cftp.t_max: expected at most 64");
  cfg.cftp.t_max = static_cast<uint32_t>(t_max);
  cfg.cftp.initial_horizon = cftp.real("initial_horizon", cfg.cftp.initial_horizon);
  cftp.finish();
  top.out["cftp"] = cftp.out;
  return cfg;
}

// ---------------------------------------------------------------- construction

struct WindowBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

WindowBounds window_bounds(const Json& window) {
  return {window["lower"].get<std::vector<double>>(), window["upper"].get<std::vector<double>>()};
}

Handle<ptproc_model> build_model(const Json& model, const Json& window) {
  const WindowBounds w = window_bounds(window);
  const std::string kind = model["kind"].get<std::string>();
  const double beta = model["beta"].get<double>(), gamma = model["gamma"].get<double>(), r = model["r"].get<double>();
  ptproc_model* raw = nullptr;
  if (kind == "inhom_strauss") {
    check(ptproc_model_inhom_strauss_create(w.lower.size(), w.lower.data(), w.upper.data(), beta, gamma, r,
                                            model["alpha"].get<double>(), &raw),
          "model");
  } else {
    check(ptproc_model_strauss_create(w.lower.size(), w.lower.data(), w.upper.data(), beta, gamma, r, &raw), "model");
  }
  return Handle<ptproc_model>(raw);
}

Handle<ptproc_statistic> build_statistic(const Json& stat, const ptproc_model* model) {
  const std::string kind = stat["kind"].get<std::string>();
  ptproc_statistic* raw = nullptr;
  if (kind == "papangelou_origin") {
    check(ptproc_statistic_papangelou_origin_create(model, &raw), "statistic");
  } else if (kind == "boundary_count") {
    check(ptproc_statistic_boundary_count_create(stat["band"].get<double>(), &raw), "statistic");
  } else {
    check(ptproc_statistic_point_count_create(&raw), "statistic");
  }
  return Handle<ptproc_statistic>(raw);
}

Json report_json(ptproc_engine engine, const ptproc_report& r) {
  Json j;
  j["engine"] = engine_name(engine);
  j["mu_hat"] = r.mu_hat;
  j["se"] = r.se;
  j["rho_final"] = r.has_rho_final ? Json(r.rho_final) : Json(nullptr);
  j["steps"] = r.steps;
  j["n_total"] = r.n_total;
  j["stop_reason"] = r.stop_reason == PTPROC_STOP_CONVERGED ? "converged" : "max_steps";
  j["wall_seconds"] = r.wall_seconds;
  j["time_variance"] = r.time_variance;
  return j;
}

std::string coordinate_header(std::size_t dim) {
  static constexpr const char* kNames[] = {"x", "y", "z", "w"};
  std::string h;
  for (std::size_t i = 0; i < dim; ++i) {
    if (i) h += ',';
    h += i < 4 ? kNames[i] : "x" + std::to_string(i + 1);
  }
  return h;
}

void write_pattern_csv(const ptproc_pattern* x, const std::string& path) {
  Output out(path);
  std::ostream& os = out.stream();
  const std::size_t n = ptproc_pattern_size(x), d = ptproc_pattern_dim(x);
  const double* c = ptproc_pattern_coords(x);
  os << coordinate_header(d) << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) os << (k ? "," : "") << format_number(c[i * d + k]);
    os << '\n';
  }
  out.close();
}

// ---------------------------------------------------------------- estimate

struct EstimateFlags {
  CommonFlags common;
  ModelFlags model;
  std::optional<std::string> engine;
  std::optional<double> target;
  std::optional<std::string> trace_out;
};

struct TraceSink {
  std::ostream* os = nullptr;
};

void on_trace(const ptproc_ais_trace_record* rec, void* user) {
  std::ostream& os = *static_cast<TraceSink*>(user)->os;
  os << rec->t << ',' << format_number(rec->rho_hat) << ',' << format_number(rec->mu_hat) << ','
     << format_number(rec->sigma2_hat) << ',' << rec->n_total << '\n';
}

int cmd_estimate(const EstimateFlags& f) {
  Json raw = load_config(f.common.config);
  f.common.apply(raw);
  f.model.apply(raw);
  if (f.engine) raw["engine"] = *f.engine;
  if (f.target) raw["target_rel_se"] = *f.target;

  Reader top(&raw, "");
  const std::string engine = resolve_engine_name(top, "engine", "ais");
  top.out["model"] = resolve_model(top.get("model"));
  top.out["window"] = resolve_window(top.get("window"));
  top.out["statistic"] = resolve_statistic(top.get("statistic"), "papangelou_origin");
  const double target = top.real("target_rel_se", 0.05);
  ptproc_engine_config cfg = resolve_engine_config(top, &raw);
  const bool trace = top.flag("trace", false);
  top.finish();
  const Json& resolved = top.out;

  const auto model = build_model(resolved["model"], resolved["window"]);
  const auto stat = build_statistic(resolved["statistic"], model.get());

  std::optional<Output> trace_file;
  TraceSink sink{&std::cerr};
  const ptproc_engine kind = engine_from_name(engine);
  if (trace && kind == PTPROC_ENGINE_AIS) {
    std::optional<std::string> path = f.trace_out;
    if (!path && f.common.out) path = *f.common.out + ".trace.csv";
    if (path) {
      trace_file.emplace(path);
      sink.os = &trace_file->stream();
    }
    *sink.os << "t,rho_hat,mu_hat,sigma2_hat,n_total\n";
  } else if (trace) {
    std::cerr << "note: only the ais engine emits an estimation trace\n";
  }

  ptproc_report report{};
  check(ptproc_estimate(kind, model.get(), stat.get(), target, &cfg, trace && kind == PTPROC_ENGINE_AIS ? on_trace : nullptr,
                        &sink, &report),
        "estimate");
  if (trace_file) trace_file->close();

  write_json(Json{{"config", resolved}, {"report", report_json(kind, report)}}, f.common.out);
  return 0;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkFlags {
  CommonFlags common;
  std::optional<std::string> preset;
  std::vector<std::string> engines;
  std::optional<double> target;
  std::optional<std::string> meta;
};

Json preset_cases(const std::string& preset) {
  const std::string p = normalize_name(preset);
  if (p != "paper_tables" && p != "paper_tables_full") {
    throw ConfigError("preset: expected paper-tables or paper-tables-full, got '" + preset + "'");
  }
  std::vector<double> strauss_gammas{0.4, 0.6, 0.8};
  if (p == "paper_tables_full") strauss_gammas.insert(strauss_gammas.begin(), 0.2);
  Json cases = Json::array();
  for (double beta : {50.0, 100.0}) {
    for (double gamma : strauss_gammas) {
      cases.push_back({{"model", {{"kind", "strauss"}, {"beta", beta}, {"gamma", gamma}, {"r", 0.1}}},
                       {"statistic", {{"kind", "papangelou_origin"}}}});
    }
  }
  for (double beta : {50.0, 100.0}) {
    for (double gamma : {0.4, 0.8}) {
      cases.push_back(
          {{"model", {{"kind", "inhom_strauss"}, {"beta", beta}, {"gamma", gamma}, {"r", 0.1}, {"alpha", 1.0}}},
           {"statistic", {{"kind", "boundary_count"}, {"band", 0.49}}}});
    }
  }
  return cases;
}

Json hardware_metadata() {
  Json h;
  utsname u{};
  if (uname(&u) == 0) {
    h["hostname"] = u.nodename;
    h["system"] = u.sysname;
    h["release"] = u.release;
    h["machine"] = u.machine;
  }
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) h["cpu_model"] = line.substr(line.find_first_not_of(' ', colon + 1));
      break;
    }
  }
  h["hardware_concurrency"] = std::thread::hardware_concurrency();
  h["compiler"] = __VERSION__;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  h["generated_at"] = stamp;
  return h;
}

int cmd_benchmark(const BenchmarkFlags& f) {
  Json raw = load_config(f.common.config);
  f.common.apply(raw);
  if (f.preset) raw["preset"] = *f.preset;
  if (!f.engines.empty()) raw["engines"] = f.engines;
  if (f.target) raw["target_rel_se"] = *f.target;

  Reader top(&raw, "");
  std::optional<std::string> preset;
  if (const Json* p = top.get("preset")) {
    if (!p->is_string()) throw ConfigError("preset: expected a string");
    preset = p->get<std::string>();
  }
  const Json* cases_raw = top.get("cases");
  if (preset && cases_raw) throw ConfigError("cases: cannot be combined with a preset");
  const Json cases_in = preset ? preset_cases(*preset) : (cases_raw ? *cases_raw : Json::array());
  if (!cases_in.is_array()) throw ConfigError("cases: expected a list");

  std::vector<ptproc_engine> engines;
  Json engine_names = Json::array();
  if (const Json* e = top.get("engines")) {
    if (!e->is_array()) throw ConfigError("engines: expected a list of engine names");
    for (const auto& name : *e) {
      if (!name.is_string()) throw ConfigError("engines: expected a list of engine names");
      const std::string n = normalize_name(name.get<std::string>());
      if (n != "ais" && n != "mh" && n != "cftp") throw ConfigError("engines: unknown engine '" + n + "'");
      engines.push_back(engine_from_name(n));
      engine_names.push_back(n);
    }
  } else {
    engines = {PTPROC_ENGINE_AIS, PTPROC_ENGINE_MH, PTPROC_ENGINE_CFTP};
    engine_names = {"ais", "mh", "cftp"};
  }
  top.out["engines"] = engine_names;

  Json cases_out = Json::array();
  std::vector<Handle<ptproc_model>> models;
  std::vector<Handle<ptproc_statistic>> stats;
  std::vector<ptproc_benchmark_case> cases;
  for (std::size_t i = 0; i < cases_in.size(); ++i) {
    const std::string path = "cases[" + std::to_string(i) + "]";
    Reader rc(&cases_in[i], "");
    Json c;
    try {
      c["model"] = resolve_model(rc.get("model"));
      c["window"] = resolve_window(rc.get("window"));
      c["statistic"] = resolve_statistic(rc.get("statistic"), "papangelou_origin");
      rc.finish();
    } catch (const ConfigError& e) {
      throw ConfigError(path + "." + e.what());
    }
    models.push_back(build_model(c["model"], c["window"]));
    stats.push_back(build_statistic(c["statistic"], models.back().get()));
    cases.push_back({models.back().get(), stats.back().get(), c["model"]["beta"].get<double>(),
                     c["model"]["gamma"].get<double>()});
    cases_out.push_back(c);
  }
  top.out["cases"] = cases_out;
  const double target = top.real("target_rel_se", 0.05);
  ptproc_engine_config cfg = resolve_engine_config(top, &raw);
  top.flag("trace", false);
  top.finish();

  std::vector<ptproc_benchmark_row> rows(cases.size() * engines.size());
  check(ptproc_benchmark(cases.data(), cases.size(), engines.data(), engines.size(), target, &cfg, rows.data()),
        "benchmark");

  Output out(f.common.out);
  std::ostream& os = out.stream();
  os << ptproc_benchmark_csv_header() << '\n';
  for (const auto& r : rows) {
    os << engine_name(r.engine) << ',' << format_number(r.beta) << ',' << format_number(r.gamma) << ','
       << format_number(r.mu_hat) << ',' << format_number(r.se) << ',' << format_number(r.wall_seconds) << ','
       << r.n_samples << ',' << format_number(r.time_variance) << ',' << format_number(r.tv_ratio_vs_ais) << '\n';
  }
  out.close();

  std::optional<std::string> meta = f.meta;
  if (!meta && f.common.out) meta = *f.common.out + ".meta.json";
  if (meta) {
    Json m;
    m["ptproc_version"] = ptproc_version();
    if (preset) m["preset"] = *preset;
    m["hardware"] = hardware_metadata();
    m["rows_per_case"] = engines.size();
    m["config"] = top.out;
    write_json(m, meta);
  }
  return 0;
}

// ---------------------------------------------------------------- oracle

struct OracleFlags {
  CommonFlags common;
  ModelFlags model;
  std::optional<std::string> preset;
  std::optional<std::uint32_t> n_max;
  std::optional<std::uint64_t> mc_points;
  std::optional<std::uint32_t> batches;
  std::optional<double> tail_tolerance;
};

Json oracle_preset(const std::string& preset) {
  const std::string p = normalize_name(preset);
  double gamma = 0.0;
  if (p == "tiny_strauss") {
    gamma = 0.5;
  } else if (p == "tiny_poisson") {
    gamma = 1.0;
  } else {
    throw ConfigError("preset: expected tiny-strauss or tiny-poisson, got '" + preset + "'");
  }
  return {{"model", {{"kind", "strauss"}, {"beta", 50.0}, {"gamma", gamma}, {"r", 0.1}}},
          {"window", {{"lower", {0.0, 0.0}}, {"upper", {0.2, 0.2}}}},
          {"statistic", {{"kind", "point_count"}}},
          {"n_max", 12},
          {"mc_points", 1000000}};
}

int cmd_oracle(const OracleFlags& f) {
  Json raw = load_config(f.common.config);
  if (f.preset) raw["preset"] = *f.preset;
  if (raw.contains("preset")) {
    if (!raw["preset"].is_string()) throw ConfigError("preset: expected a string");
    Json merged = oracle_preset(raw["preset"].get<std::string>());
    raw.erase("preset");
    merged.merge_patch(raw);
    raw = std::move(merged);
  }
  f.common.apply(raw);
  f.model.apply(raw);
  if (f.n_max) raw["n_max"] = *f.n_max;
  if (f.mc_points) raw["mc_points"] = *f.mc_points;
  if (f.batches) raw["batches"] = *f.batches;
  if (f.tail_tolerance) raw["tail_tolerance"] = *f.tail_tolerance;

  ptproc_oracle_spec spec;
  ptproc_oracle_spec_default(&spec);
  Reader top(&raw, "");
  top.out["model"] = resolve_model(top.get("model"));
  top.out["window"] = resolve_window(top.get("window"));
  top.out["statistic"] = resolve_statistic(top.get("statistic"), "point_count");
  const std::uint64_t n_max = top.count("n_max", spec.n_max);
  const std::uint64_t batches = top.count("batches", spec.batches);
  if (n_max > 10000) throw ConfigError("n_max: expected at most 10000");
  if (batches > 1000000) throw ConfigError("batches: expected at most 1000000");
  spec.n_max = static_cast<uint32_t>(n_max);
  spec.batches = static_cast<uint32_t>(batches);
  spec.mc_points = top.count("mc_points", spec.mc_points);
  spec.tail_tolerance = top.real("tail_tolerance", spec.tail_tolerance);
  spec.seed = top.count("seed", spec.seed);
  const std::uint64_t threads = top.count("threads", 1);
  if (threads < 1 || threads > 4096) throw ConfigError("threads: expected 1..4096");
  spec.threads = static_cast<uint32_t>(threads);
  top.flag("trace", false);
  top.finish();

  const auto model = build_model(top.out["model"], top.out["window"]);
  const auto stat = build_statistic(top.out["statistic"], model.get());
  ptproc_oracle_result result{};
  const ptproc_status status = ptproc_oracle(model.get(), stat.get(), &spec, &result);
  if (status == PTPROC_ERR_TAIL_BOUND) {
    const Json bound{{"tail_bound", result.tail_bound}, {"tail_tolerance", spec.tail_tolerance}, {"n_max", spec.n_max}};
    write_json(Json{{"config", top.out}, {"error", bound}}, f.common.out);
    std::cerr << "error: tail bound " << format_number(result.tail_bound) << " exceeds tolerance "
              << format_number(spec.tail_tolerance) << " at n_max " << spec.n_max << "; raise --n-max\n";
    return kExitEngine;
  }
  check(status, "oracle");
  write_json(Json{{"config", top.out},
                  {"result", {{"mu", result.mu}, {"tail_bound", result.tail_bound}, {"mc_se", result.mc_se}}}},
             f.common.out);
  return 0;
}

// ---------------------------------------------------------------- sample

struct SampleFlags {
  CommonFlags common;
  ModelFlags model;
  std::optional<std::string> sampler;
  std::optional<double> rho;
  std::optional<std::uint64_t> replications;
};

int cmd_sample(const SampleFlags& f) {
  Json raw = load_config(f.common.config);
  f.common.apply(raw);
  f.model.apply(raw);
  if (f.sampler) raw["sampler"] = *f.sampler;
  if (f.rho) raw["rho"] = *f.rho;
  if (f.replications) raw["replications"] = *f.replications;

  Reader top(&raw, "");
  const std::string sampler = top.name("sampler", "poisson");
  if (sampler != "poisson" && sampler != "cftp" && sampler != "mh") {
    throw ConfigError("sampler: expected poisson, cftp or mh, got '" + sampler + "'");
  }
  if (sampler == "poisson") {
    top.forbid("model", "not used by the poisson sampler");
    top.required_real("rho", "set --rho or rho in --config");
  } else {
    top.out["model"] = resolve_model(top.get("model"));
    top.forbid("rho", "only used by the poisson sampler");
  }
  top.out["window"] = resolve_window(top.get("window"));
  const std::uint64_t replications = top.count("replications", 1);
  if (replications < 1) throw ConfigError("replications: expected at least 1");
  ptproc_engine_config cfg = resolve_engine_config(top, &raw);
  const bool trace = top.flag("trace", false);
  top.finish();
  const Json& resolved = top.out;

  const std::string prefix = f.common.out.value_or("sample");
  const auto file_for = [&](std::uint64_t r) { return prefix + "-" + std::to_string(r) + ".csv"; };
  Json files = Json::array();
  Json counts = Json::array();
  const auto emit = [&](const ptproc_pattern* x, std::uint64_t r) {
    write_pattern_csv(x, file_for(r));
    files.push_back(file_for(r));
    counts.push_back(ptproc_pattern_size(x));
  };

  Json manifest{{"config", resolved}};
  if (sampler == "poisson") {
    const WindowBounds w = window_bounds(resolved["window"]);
    for (std::uint64_t r = 0; r < replications; ++r) {
      ptproc_pattern* raw_x = nullptr;
      check(ptproc_sample_poisson(w.lower.size(), w.lower.data(), w.upper.data(), resolved["rho"].get<double>(), cfg.seed,
                                  r, &raw_x),
            "sample");
      const Handle<ptproc_pattern> x(raw_x);
      emit(x.get(), r);
    }
  } else if (sampler == "cftp") {
    const auto model = build_model(resolved["model"], resolved["window"]);
    for (std::uint64_t r = 0; r < replications; ++r) {
      ptproc_pattern* raw_x = nullptr;
      check(ptproc_sample_cftp(model.get(), &cfg.cftp, cfg.seed, r, &raw_x), "sample");
      const Handle<ptproc_pattern> x(raw_x);
      emit(x.get(), r);
    }
  } else {
    // Snapshot r is the chain state after burn_in + r * thin steps.
    const auto model = build_model(resolved["model"], resolved["window"]);
    ptproc_mh_chain* raw_chain = nullptr;
    check(ptproc_mh_chain_create(model.get(), &cfg.mh, cfg.seed, &raw_chain), "sample");
    const Handle<ptproc_mh_chain> chain(raw_chain);
    std::optional<Output> trace_out;
    if (trace) {
      trace_out.emplace(prefix + "-trace.csv");
      trace_out->stream() << "step,n\n" << 0 << ',' << ptproc_mh_chain_count(chain.get()) << '\n';
      manifest["trace"] = prefix + "-trace.csv";
    }
    const auto advance = [&](std::uint64_t steps) {
      if (!trace_out) {
        check(ptproc_mh_chain_advance(chain.get(), steps), "sample");
        return;
      }
      for (std::uint64_t i = 0; i < steps; ++i) {
        check(ptproc_mh_chain_advance(chain.get(), 1), "sample");
        trace_out->stream() << ptproc_mh_chain_steps(chain.get()) << ',' << ptproc_mh_chain_count(chain.get()) << '\n';
      }
    };
    for (std::uint64_t r = 0; r < replications; ++r) {
      advance(r == 0 ? cfg.mh.burn_in : cfg.mh.thin);
      ptproc_pattern* raw_x = nullptr;
      check(ptproc_mh_chain_pattern(chain.get(), &raw_x), "sample");
      const Handle<ptproc_pattern> x(raw_x);
      emit(x.get(), r);
    }
    if (trace_out) trace_out->close();
  }
  if (trace && sampler != "mh") std::cerr << "note: only the mh sampler emits a trace\n";
  manifest["files"] = files;
  manifest["counts"] = counts;
  write_json(manifest, std::nullopt);
  return 0;
}

template <class Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const EngineFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEngine;
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expectations of statistics of locally stable point processes"};
  app.set_version_flag("--version", std::string(ptproc_version()));
  app.require_subcommand(1);

  EstimateFlags est;
  CLI::App* estimate = app.add_subcommand("estimate", "Estimate E_f[K] to a target relative standard error");
  est.common.attach(*estimate);
  est.model.attach(*estimate);
  estimate->add_option("--engine", est.engine, "ais, mh or cftp (default ais)");
  estimate->add_option("--target-rel-se", est.target, "Target relative standard error (default 0.05)");
  estimate->add_option("--trace-out", est.trace_out, "AIS trace CSV path (default <out>.trace.csv, else stderr)");

  BenchmarkFlags bench;
  CLI::App* benchmark = app.add_subcommand("benchmark", "Time-variance comparison across engines as CSV");
  bench.common.attach(*benchmark);
  benchmark->add_option("--preset", bench.preset, "paper-tables or paper-tables-full");
  benchmark->add_option("--engines", bench.engines, "Comma separated engines (default ais,mh,cftp)")->delimiter(',');
  benchmark->add_option("--target-rel-se", bench.target, "Target relative standard error (default 0.05)");
  benchmark->add_option("--meta", bench.meta, "Hardware metadata JSON path (default <out>.meta.json)");

  OracleFlags orc;
  CLI::App* oracle = app.add_subcommand("oracle", "Brute-force truncated-series expectation on a small window");
  orc.common.attach(*oracle);
  orc.model.attach(*oracle);
  oracle->add_option("--preset", orc.preset, "tiny-strauss or tiny-poisson");
  oracle->add_option("--n-max", orc.n_max, "Series truncation order");
  oracle->add_option("--mc-points", orc.mc_points, "Monte Carlo draws per order");
  oracle->add_option("--batches", orc.batches, "Batches for the Monte Carlo standard error");
  oracle->add_option("--tail-tolerance", orc.tail_tolerance, "Largest admissible truncation tail bound");

  SampleFlags smp;
  CLI::App* sample = app.add_subcommand("sample", "Write raw patterns as CSV, one file per replication");
  smp.common.attach(*sample);
  smp.model.attach(*sample);
  sample->add_option("--sampler", smp.sampler, "poisson, cftp or mh (default poisson)");
  sample->add_option("--rho", smp.rho, "Intensity for the poisson sampler");
  sample->add_option("--replications", smp.replications, "Number of patterns (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*estimate) return run_guarded([&] { return cmd_estimate(est); });
  if (*benchmark) return run_guarded([&] { return cmd_benchmark(bench); });
  if (*oracle) return run_guarded([&] { return cmd_oracle(orc); });
  return run_guarded([&] { return cmd_sample(smp); });
}
