#include "config.hpp"

#include <cstdio>
#include <set>

namespace dioph::cli {

using nlohmann::json;

namespace {

/// Reads the keys of one object and rejects whatever is left unread.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing key " + where(key));
    return j_.at(key);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  Rational rational(const std::string& key) { return to_rational(get(key), where(key)); }
  std::optional<Rational> rational_opt(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return to_rational(*v, where(key));
  }

  long integer(const std::string& key, long fallback, long lo, long hi) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    long x = v->get<long>();
    if (x < lo || x > hi) {
      throw ConfigError(where(key) + " must lie in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    return x;
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
    return v->get<std::string>();
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key " + where(key));
    }
  }

  static Rational to_rational(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a rational string \"p/q\"");
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::exception&) {
      throw ConfigError(where + ": not a rational literal: " + v.get<std::string>());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ApproxFunction parse_function(const json& j, const std::string& path) {
  Block b(j, path);
  std::string kind = b.string("kind", "");
  ApproxFunction f;
  if (kind == "power") {
    f = ApproxFunction::power(b.rational("coef"), b.rational("exponent"));
  } else if (kind == "power-log") {
    f = ApproxFunction::power_log(b.rational("coef"), b.rational("exponent"),
                                  b.rational("log_exponent"));
  } else if (kind == "table") {
    const json& pts = b.get("breakpoints");
    if (!pts.is_array() || pts.empty()) throw ConfigError(path + ".breakpoints must be a non-empty array");
    std::vector<std::pair<Rational, Rational>> table;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string w = path + ".breakpoints[" + std::to_string(i) + "]";
      if (!pts[i].is_array() || pts[i].size() != 2) throw ConfigError(w + " must be a pair");
      table.emplace_back(Block::to_rational(pts[i][0], w), Block::to_rational(pts[i][1], w));
    }
    try {
      f = ApproxFunction::table(std::move(table));
    } catch (const std::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  } else {
    throw ConfigError(path + ".kind must be one of power, power-log, table");
  }
  b.finish();
  return f;
}

Ball parse_ball(const json& j, const std::string& path, unsigned d) {
  Block b(j, path);
  const json& c = b.get("center");
  if (!c.is_array() || c.size() != d) {
    throw ConfigError(path + ".center must list " + std::to_string(d) + " coordinates");
  }
  Point center;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Rational x = Block::to_rational(c[i], path + ".center");
    if (x < 0 || x > 1) throw ConfigError(path + ".center must lie in [0,1]^d");
    center.push_back(x);
  }
  Rational r = b.rational("radius");
  if (r <= 0) throw ConfigError(path + ".radius must be positive");
  b.finish();
  return Ball(center, r);
}

std::size_t as_size(long x) { return static_cast<std::size_t>(x); }

}  // namespace

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(json doc, std::optional<std::uint64_t> seed,
                              std::optional<long> depth, std::optional<std::string> out) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (seed) doc["params"]["seed"] = *seed;
  if (depth) doc["params"]["depth"] = *depth;
  if (out) doc["output"]["directory"] = *out;

  ExperimentConfig cfg;
  Block top(doc, "config");

  {
    Block b(top.get("system"), "system");
    std::string kind = b.string("kind", "");
    long d = b.integer("d", 1, 1, 8);
    std::string p_range = b.string("p_range", "unit-cube");
    if (p_range != "unit-cube") throw ConfigError("system.p_range must be \"unit-cube\"");
    Rational c = b.rational_opt("c").value_or(Rational(1, 2));
    if (c <= 0) throw ConfigError("system.c must be positive");
    cfg.system.offset = b.integer("offset", 0, 0, 1000000);
    const json* t = b.find("t");
    if (kind == "base-power") {
      if (d != 1) throw ConfigError("system.d must be 1 for base-power");
      long base = b.integer("b", 2, 2, 1000000);
      cfg.system.sys = ApproxSystem::base_power(Integer(base), c);
      if (t) {
        if (t->is_string() && t->get<std::string>() == "auto") {
          throw ConfigError("system.t = \"auto\" applies to rationals only");
        }
        cfg.system.t = Block::to_rational(*t, "system.t");
      } else {
        cfg.system.t = Rational(1, base);
      }
    } else if (kind == "rationals") {
      if (b.has("b")) throw ConfigError("system.b applies to base-power only");
      cfg.system.sys = ApproxSystem::rationals(static_cast<unsigned>(d), c);
      if (!t) throw ConfigError("missing key system.t (a rational or \"auto\")");
      if (!(t->is_string() && t->get<std::string>() == "auto")) {
        cfg.system.t = Block::to_rational(*t, "system.t");
      }
    } else {
      throw ConfigError("system.kind must be base-power or rationals");
    }
    if (cfg.system.t && (*cfg.system.t <= 0 || *cfg.system.t >= 1)) {
      throw ConfigError("system.t must lie in (0, 1)");
    }
    b.finish();
  }
  const unsigned d = cfg.system.sys.d;

  {
    Block b(top.get("functions"), "functions");
    cfg.functions.phi = parse_function(b.get("phi"), "functions.phi");
    const json* rho = b.find("rho");
    if (!rho || (rho->is_string() && rho->get<std::string>() == "default")) {
      cfg.functions.rho = cfg.system.sys.default_rho();
    } else {
      cfg.functions.rho = parse_function(*rho, "functions.rho");
    }
    if (const json* psi = b.find("psi")) cfg.functions.psi = parse_function(*psi, "functions.psi");
    b.finish();
  }

  {
    Block b(top.get("params"), "params");
    auto& p = cfg.params;
    p.delta = b.rational_opt("delta").value_or(Rational(static_cast<long>(d)));
    if (p.delta != Rational(static_cast<long>(d))) {
      throw ConfigError("params.delta must equal d for Lebesgue measure on [0,1]^d");
    }
    p.s = b.rational("s");
    if (p.s <= 0 || p.s >= p.delta) throw ConfigError("s must lie in (0, delta)");
    p.eta = b.rational_opt("eta").value_or(Rational(1));
    if (p.eta <= 0) throw ConfigError("params.eta must be positive");
    p.kappa = b.rational_opt("kappa").value_or(Rational(1));
    if (p.kappa <= 0 || p.kappa > 1) throw ConfigError("params.kappa must lie in (0, 1]");
    p.r0 = b.rational_opt("r0").value_or(Rational(1, 4));
    if (p.r0 <= 0) throw ConfigError("params.r0 must be positive");
    std::string regime = b.string("regime", "finite-G");
    if (regime == "finite-G") {
      p.regime = Regime::finite_g;
    } else if (regime == "infinite-G") {
      p.regime = Regime::infinite_g;
    } else {
      throw ConfigError("params.regime must be finite-G or infinite-G");
    }
    if (const json* root = b.find("root")) {
      p.root = parse_ball(*root, "params.root", d);
    } else {
      p.root = Ball(Point(d, Rational(1, 2)), Rational(1, 8));
    }
    if (p.root.radius > p.r0) throw ConfigError("params.root.radius must not exceed params.r0");
    p.depth = b.integer("depth", 2, 1, 8);
    p.population_cap = as_size(b.integer("population_cap", 16, 1, 1000000));
    p.exhaustive_limit = as_size(b.integer("exhaustive_limit", 512, 1, 100000000));
    p.n_max = b.integer("n_max", 4000, 1, 1000000);
    p.k_cap = b.integer("k_cap", 1, 1, 1000);
    if (const json* sd = b.find("seed")) {
      if (!sd->is_number_unsigned() && !(sd->is_number_integer() && sd->get<long long>() >= 0)) {
        throw ConfigError("params.seed must be a non-negative integer");
      }
      p.seed = sd->get<std::uint64_t>();
    }
    b.finish();
  }

  if (const json* j = top.find("classify")) {
    Block b(*j, "classify");
    ClassifyBlock c;
    const json& targets = b.get("targets");
    if (!targets.is_array()) throw ConfigError("classify.targets must be an array");
    for (const auto& t : targets) {
      if (!t.is_string()) throw ConfigError("classify.targets entries must be strings");
      c.targets.push_back(t.get<std::string>());
    }
    c.q_max = b.integer("q_max", 200, 1, 100000000);
    if (const json* eps = b.find("epsilons")) {
      if (!eps->is_array()) throw ConfigError("classify.epsilons must be an array");
      for (const auto& e : *eps) {
        Rational x = Block::to_rational(e, "classify.epsilons");
        if (x <= 0 || x >= 1) throw ConfigError("classify.epsilons must lie in (0, 1)");
        c.epsilons.push_back(x);
      }
    } else {
      c.epsilons = {Rational(1, 2), Rational(1, 10)};
    }
    b.finish();
    cfg.classify = std::move(c);
  }

  cfg.ubiquity.window = cfg.params.root;
  if (const json* j = top.find("ubiquity")) {
    Block b(*j, "ubiquity");
    if (const json* w = b.find("window")) cfg.ubiquity.window = parse_ball(*w, "ubiquity.window", d);
    cfg.ubiquity.n_lo = b.integer("n_lo", 2, 1, 100000);
    cfg.ubiquity.n_hi = b.integer("n_hi", 12, 1, 100000);
    if (cfg.ubiquity.n_hi < cfg.ubiquity.n_lo) throw ConfigError("ubiquity.n_hi must be >= n_lo");
    b.finish();
  }

  if (const json* j = top.find("measure")) {
    Block b(*j, "measure");
    cfg.measure.holder_samples = as_size(b.integer("holder_samples", 1000, 1, 10000000));
    b.finish();
  }

  if (const json* j = top.find("dimension")) {
    Block b(*j, "dimension");
    if (b.has("level")) cfg.dimension.level = b.integer("level", 1, 1, 8);
    cfg.dimension.min_exponent = b.integer("min_exponent", 6, 0, 60);
    cfg.dimension.max_exponent = b.integer("max_exponent", 14, 0, 60);
    if (cfg.dimension.max_exponent - cfg.dimension.min_exponent < 2) {
      throw ConfigError("dimension needs at least three scales");
    }
    b.finish();
  }

  if (const json* j = top.find("series")) {
    Block b(*j, "series");
    cfg.series.terms = b.integer("terms", 200, 10, 100000);
    b.finish();
  }

  {
    const json* j = top.find("output");
    json empty = json::object();
    Block b(j ? *j : empty, "output");
    cfg.output.directory = b.string("directory", "out");
    if (const json* f = b.find("formats")) {
      if (!f->is_array()) throw ConfigError("output.formats must be an array");
      cfg.output.json = cfg.output.csv = cfg.output.svg = false;
      for (const auto& x : *f) {
        std::string s = x.is_string() ? x.get<std::string>() : "";
        if (s == "json") {
          cfg.output.json = true;
        } else if (s == "csv") {
          cfg.output.csv = true;
        } else if (s == "svg") {
          cfg.output.svg = true;
        } else {
          throw ConfigError("output.formats entries must be json, csv or svg");
        }
      }
    }
    b.finish();
  }
  top.finish();

  cfg.canonical = doc;
  if (cfg.canonical.contains("output")) {
    cfg.canonical["output"].erase("directory");
    if (cfg.canonical["output"].empty()) cfg.canonical.erase("output");
  }
  cfg.hash = fnv1a64_hex(cfg.canonical.dump());
  return cfg;
}

}  // namespace dioph::cli
