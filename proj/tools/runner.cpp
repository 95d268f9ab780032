#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dioph/audit.hpp"
#include "dioph/cantor.hpp"
#include "dioph/contfrac.hpp"
#include "dioph/massdist.hpp"
#include "dioph/ubiquity.hpp"

namespace dioph::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON's shortest round-trip text; used wherever a double appears in both
/// report.json and audit.csv.
std::string number_text(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : "-inf";
  return json(x).dump();
}

json point_json(const Point& p) {
  json a = json::array();
  for (const auto& x : p) a.push_back(to_string(x));
  return a;
}

json enclosure_json(const Enclosure& e) {
  if (e.exact()) return format_value(e.lo);
  return json{{"lo", format_value(e.lo)}, {"hi", format_value(e.hi)}};
}

json row_json(const AuditRow& r) {
  return json{{"equation_tag", r.tag + (r.sampled ? "/sampled" : "")},
              {"level", r.level},
              {"sublevel", r.sublevel},
              {"lhs", r.lhs},
              {"rhs", r.rhs},
              {"relation", r.relation},
              {"pass", to_string(r.status)}};
}

struct Run {
  Run(const ExperimentConfig& c, std::ostream& l, bool q) : cfg(c), log(l), quiet(q) {}

  const ExperimentConfig& cfg;
  std::ostream& log;
  bool quiet = false;
  json report;
  std::vector<AuditRow> audit;
  std::optional<ScaleSequence> seq;
  std::optional<CantorTree> tree;
  std::optional<BoxCountingResult> boxes;

  void note(const std::string& line) {
    if (!quiet) log << line << '\n';
  }

  const ScaleSequence& sequence() {
    if (seq) return *seq;
    const auto& sys = cfg.system;
    if (sys.t) {
      seq = ScaleSequence(*sys.t, sys.offset);
      report["system"]["t_source"] = "config";
    } else {
      const auto& u = cfg.ubiquity;
      auto t = auto_select_t(sys.sys.d, u.window.radius, u.n_lo, u.n_hi);
      if (!t) {
        throw ConstructionError("t-select", "no t = 2^-k satisfies the selection rule on [" +
                                                std::to_string(u.n_lo) + ", " +
                                                std::to_string(u.n_hi) + "]");
      }
      seq = ScaleSequence(*t, sys.offset);
      report["system"]["t_source"] = "auto";
    }
    report["system"]["t"] = to_string(seq->t);
    return *seq;
  }

  void classify() {
    const auto& c = *cfg.classify;
    std::vector<Target> xs;
    for (const auto& t : c.targets) xs.push_back(Target::parse(t));
    auto verdicts = classify_batch(xs, *cfg.functions.psi, c.q_max, c.epsilons);
    json out = json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto& v = verdicts[i];
      json hits = json::array();
      for (const auto& h : v.hits) {
        auto psi_q = cfg.functions.psi->eval(Rational(h.q));
        auto row = make_row("psi-hit", 0, 0, format_value(h.gap), format_value(psi_q), "<", true);
        hits.push_back(json{{"p", to_string(h.p)}, {"q", to_string(h.q)}, {"gap", row.lhs},
                            {"psi", row.rhs}});
        audit.push_back(std::move(row));
      }
      json eps = json::array();
      for (const auto& e : v.epsilon_report) {
        eps.push_back(json{{"epsilon", to_string(e.epsilon)},
                           {"hits", e.hits},
                           {"hits_beyond_cutoff", e.hits_beyond_cutoff},
                           {"undecided", e.undecided}});
      }
      json quotients = json::array();
      for (const auto& a : v.cf.quotients) quotients.push_back(to_string(a));
      json best = json::array();
      for (const auto& b : v.best) best.push_back(json{{"p", to_string(b.p)}, {"q", to_string(b.q)}});
      out.push_back(json{{"target", c.targets[i]},
                         {"verdict", to_string(v.verdict)},
                         {"hits", hits},
                         {"epsilon_report", eps},
                         {"continued_fraction", json{{"a0", to_string(v.cf.a0)},
                                                     {"quotients", quotients},
                                                     {"complete", v.cf.complete},
                                                     {"truncated", v.cf.truncated}}},
                         {"best_approximations", best},
                         {"q_max", v.q_max},
                         {"cutoff", v.cutoff},
                         {"top_range_hits", v.top_range_hits},
                         {"undecided", v.undecided}});
    }
    report["classify"] = {{"psi", cfg.functions.psi->describe()}, {"targets", out}};
    note("classify: " + std::to_string(xs.size()) + " targets");
  }

  void ubiquity() {
    const auto& u = cfg.ubiquity;
    const auto& s = sequence();
    auto rep = verify_local_ubiquity(cfg.system.sys, cfg.functions.rho, s, u.window, u.n_lo,
                                     u.n_hi, cfg.params.kappa);
    json rows = json::array();
    for (const auto& r : rep.rows) {
      auto row = make_row("ubiq", 0, r.n, format_value(r.ratio), format_value(rep.kappa), ">=",
                          r.pass);
      rows.push_back(json{{"n", r.n},
                          {"layer_size", r.layer_size},
                          {"ratio", row.lhs},
                          {"method", r.method},
                          {"pass", r.pass}});
      audit.push_back(std::move(row));
    }
    json notes = json::array();
    for (const auto& n : rep.notes) notes.push_back(n);
    report["ubiquity"] = {
        {"system", cfg.system.sys.describe()},
        {"window", {{"center", point_json(u.window.center)}, {"radius", to_string(u.window.radius)}}},
        {"kappa", format_value(rep.kappa)},
        {"rows", rows},
        {"n_B_estimate", rep.n_B_estimate ? json(*rep.n_B_estimate) : json(nullptr)},
        {"pass", rep.pass},
        {"notes", notes}};
    note("ubiquity-check: " + std::to_string(rep.rows.size()) + " layers, " +
         (rep.pass ? "pass" : "fail"));
  }

  void build() {
    if (tree) return;
    const auto& p = cfg.params;
    const auto& s = sequence();
    auto prep = prepare_context(cfg.system.sys, s, cfg.functions.phi, cfg.functions.rho,
                                RegularSpaceParams::lebesgue(cfg.system.sys.d, p.r0), p.kappa, p.s,
                                p.eta, p.regime, p.root);
    auto& ctx = prep.ctx;
    ctx.n_max = p.n_max;
    ctx.k_cap = p.k_cap;
    ctx.population_cap = p.population_cap;
    ctx.exhaustive_limit = p.exhaustive_limit;
    ctx.seed = p.seed;
    const auto& cp = ctx.params;
    report["tree"] = {{"regime", to_string(p.regime)},
                      {"constants",
                       {{"kappa", format_value(cp.kappa)},
                        {"lambda1", format_value(cp.lambda1)},
                        {"lambda2", format_value(cp.lambda2)},
                        {"c_tilde", format_value(cp.c_tilde)},
                        {"a1", format_value(cp.a1)},
                        {"alpha", format_value(cp.alpha)},
                        {"stride", prep.thinning.stride}}}};
    for (const auto& r : prep.thinning.audit) audit.push_back(r);

    // Levels are built one at a time so that a failure keeps the audit of
    // the levels before it.
    CantorTree t = start_tree(ctx);
    try {
      for (long l = 1; l <= p.depth; ++l) {
        build_level(t, l);
        note("build-cantor: level " + std::to_string(l) + " at n = " +
             std::to_string(t.levels.back().n) + ", " + std::to_string(t.nodes_at(l).size()) +
             " nodes");
      }
    } catch (...) {
      for (const auto& r : t.audit) audit.push_back(r);
      throw;
    }
    for (const auto& r : t.audit) audit.push_back(r);

    json levels = json::array();
    for (long l = 1; l <= t.depth(); ++l) {
      const auto& rec = t.levels[static_cast<std::size_t>(l - 1)];
      auto sep = check_separation(t, l);
      auto wit = check_exactness(t, l);
      audit.push_back(make_row("sep", l, 0, sep.pass ? "0" : "1", "0", "=", sep.pass));
      audit.push_back(make_row("witness", l, 0, wit.pass ? "0" : "1", "0", "=", wit.pass));
      long k_min = 0, k_max = 0;
      bool first = true;
      for (const auto& [id, k] : rec.k) {
        k_min = first ? k : std::min(k_min, k);
        k_max = first ? k : std::max(k_max, k);
        first = false;
      }
      std::size_t fams = 0, sampled = 0;
      for (const auto& f : t.families) {
        if (f.level != l) continue;
        ++fams;
        if (f.sampled()) ++sampled;
      }
      levels.push_back(json{{"level", l},
                            {"n", rec.n},
                            {"k_min", k_min},
                            {"k_max", k_max},
                            {"k_capped", rec.capped},
                            {"nodes", t.nodes_at(l).size()},
                            {"families", fams},
                            {"sampled_families", sampled},
                            {"separation_pairs", sep.pairs},
                            {"separation_pass", sep.pass},
                            {"witness_candidates", wit.candidates},
                            {"witness_pass", wit.pass}});
    }
    report["tree"]["depth"] = t.depth();
    report["tree"]["nodes"] = t.nodes.size();
    report["tree"]["levels"] = levels;
    tree = std::move(t);
  }

  json tree_json() const {
    const auto& t = *tree;
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back(json{{"id", n.id},
                           {"level", n.level},
                           {"sublevel", n.sublevel},
                           {"layer", n.layer},
                           {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                           {"family", n.family ? json(*n.family) : json(nullptr)},
                           {"center", point_json(n.ball.center)},
                           {"radius", to_string(n.ball.radius)},
                           {"anchor", {{"xi", point_json(n.anchor.xi)}, {"R", to_string(n.anchor.R)}}},
                           {"weight", to_string(n.weight)}});
    }
    json fams = json::array();
    for (const auto& f : t.families) {
      json pruned = json::array();
      for (const auto& pr : f.pruned) {
        pruned.push_back(json{{"anchor", point_json(pr.anchor)},
                              {"reason", pr.reason == PruneRecord::Reason::bad ? "bad" : "u"}});
      }
      fams.push_back(json{{"parent", f.parent},
                          {"level", f.level},
                          {"sublevel", f.sublevel},
                          {"layer", f.layer},
                          {"radius", to_string(f.radius)},
                          {"qbar", to_string(f.qbar)},
                          {"bad", to_string(f.bad)},
                          {"c", to_string(f.c)},
                          {"u", to_string(f.u)},
                          {"u_exact", f.u_exact},
                          {"g", to_string(f.g)},
                          {"nodes", f.nodes},
                          {"pruned", pruned}});
    }
    return json{{"schema_version", kSchemaVersion},
                {"config_hash", cfg.hash},
                {"nodes", nodes},
                {"families", fams}};
  }

  void measure() {
    build();
    const auto& p = cfg.params;
    auto mass = assign_mass(*tree, p.s, p.eta);
    audit.push_back(make_row("nu-sum", 0, 0, mass.conserved ? "0" : "1", "0", "=", mass.conserved));
    auto cert = verify_node_bound(mass, *tree);
    for (const auto& r : cert.audit) audit.push_back(r);
    auto hol = verify_holder_general(mass, *tree, cfg.measure.holder_samples, p.seed);
    const auto& arg = hol.draws.at(hol.argmax);
    std::string hmax = number_text(hol.max_log2_ratio);
    audit.push_back(make_row("holder", 0, 0, hmax, "inf", "<", hol.finite));
    json failure = nullptr;
    for (const auto& r : cert.audit) {
      if (r.status == AuditRow::Status::fail) {
        failure = row_json(r);
        break;
      }
    }
    report["measure"] = {
        {"exact", mass.exact},
        {"conserved", mass.conserved},
        {"node_bound", cert.node_bound},
        {"level_sums", cert.level_sums},
        {"nodes_checked", cert.nodes_checked},
        {"violating_node", cert.violating_node ? json(*cert.violating_node) : json(nullptr)},
        {"first_failing_row", failure},
        {"holder",
         {{"samples", hol.samples},
          {"seed", hol.seed},
          {"max_log2_ratio", hmax},
          {"argmax", {{"center", point_json(arg.center)}, {"radius", to_string(arg.radius)}}},
          {"empty", hol.empty},
          {"sampled_tree", hol.sampled_tree},
          {"finite", hol.finite}}}};
    note(std::string("verify-measure: node bound ") + (cert.pass ? "pass" : "fail") +
         ", holder max log2 ratio " + hmax);
  }

  void dimension() {
    build();
    const auto& dcfg = cfg.dimension;
    std::vector<long> exps;
    for (long k = dcfg.min_exponent; k <= dcfg.max_exponent; ++k) exps.push_back(k);
    long level = std::min(dcfg.level.value_or(tree->depth()), tree->depth());
    json by_level = json::array();
    for (long l = 1; l <= tree->depth(); ++l) {
      auto r = box_counting(*tree, l, exps);
      by_level.push_back(json{{"level", l}, {"slope", number_text(r.slope)}});
      if (l == level) boxes = r;
    }
    json counts = json::array();
    for (const auto& c : boxes->counts) {
      counts.push_back(json{{"exponent", c.exponent}, {"count", to_string(c.count)}});
    }
    report["dimension"] = {{"level", level},
                           {"counts", counts},
                           {"slope", number_text(boxes->slope)},
                           {"intercept", number_text(boxes->intercept)},
                           {"residual", number_text(boxes->residual)},
                           {"slope_by_level", by_level}};
    note("dimension-estimate: slope " + number_text(boxes->slope) + " at level " +
         std::to_string(level));
  }

  void series() {
    const auto& p = cfg.params;
    auto rep = series_diagnostics(cfg.functions.phi, cfg.functions.rho, cfg.functions.psi,
                                  cfg.system.sys, sequence(), p.s, p.delta, cfg.series.terms);
    auto sum_json = [](const SeriesSum& s) {
      json j{{"name", s.name}, {"terms", s.partial.size()}, {"verdict", to_string(s.verdict)}};
      j["partial_sum"] = s.partial.empty() ? json(nullptr) : enclosure_json(s.partial.back());
      j["tail"] = s.tail ? json{{"lo", format_value(s.tail->lo)}, {"hi", format_value(s.tail->hi)}}
                         : json(nullptr);
      return j;
    };
    auto opt_sum = [&](const std::optional<SeriesSum>& s) { return s ? sum_json(*s) : json(nullptr); };
    auto opt_bool = [](const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); };
    report["series"] = {{"g", sum_json(rep.g)},
                        {"eta_weight", sum_json(rep.eta_weight)},
                        {"g_estimate", enclosure_json(rep.g_estimate)},
                        {"regime", to_string(rep.regime)},
                        {"psi_s", opt_sum(rep.psi_s)},
                        {"psi_cube", opt_sum(rep.psi_cube)},
                        {"psi_base", opt_sum(rep.psi_base)},
                        {"simultaneous_hypothesis", opt_bool(rep.simultaneous_hypothesis)},
                        {"base_power_hypothesis", opt_bool(rep.base_power_hypothesis)}};
    note("series-report: regime " + to_string(rep.regime));
  }

  std::string svg() const {
    const auto& c = boxes->counts;
    const double W = 480, H = 360, M = 50;
    double x0 = static_cast<double>(c.front().exponent), x1 = static_cast<double>(c.back().exponent);
    double y0 = 0, y1 = 1;
    std::vector<double> ys;
    for (const auto& b : c) ys.push_back(approx_log2(Rational(b.count)));
    y1 = std::max(1.0, *std::max_element(ys.begin(), ys.end()));
    auto px = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
    auto py = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
    auto f = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", v);
      return std::string(buf);
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10
       << "\" text-anchor=\"middle\" font-size=\"12\">k (box side 2^-k)</text>\n";
    os << "<text x=\"14\" y=\"" << H / 2
       << "\" font-size=\"12\" transform=\"rotate(-90 14 " << H / 2
       << ")\" text-anchor=\"middle\">log2 N(k)</text>\n";
    os << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (std::size_t i = 0; i < c.size(); ++i) {
      os << (i ? " " : "") << f(px(static_cast<double>(c[i].exponent))) << ',' << f(py(ys[i]));
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
      os << "<circle cx=\"" << f(px(static_cast<double>(c[i].exponent))) << "\" cy=\""
         << f(py(ys[i])) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    double fy0 = boxes->intercept + boxes->slope * x0, fy1 = boxes->intercept + boxes->slope * x1;
    os << "<line x1=\"" << f(px(x0)) << "\" y1=\"" << f(py(fy0)) << "\" x2=\"" << f(px(x1))
       << "\" y2=\"" << f(py(fy1)) << "\" stroke=\"firebrick\" stroke-dasharray=\"4 3\"/>\n";
    os << "<text x=\"" << W - M << "\" y=\"" << M - 10
       << "\" text-anchor=\"end\" font-size=\"12\">slope " << f(boxes->slope) << "</text>\n";
    os << "</svg>\n";
    return os.str();
  }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << content;
  os.close();
  if (!os) throw IoError("write to " + path.string() + " failed");
}

}  // namespace

const std::vector<std::string>& pipelines() {
  static const std::vector<std::string> names{"classify",           "ubiquity-check",
                                              "build-cantor",       "verify-measure",
                                              "dimension-estimate", "series-report",
                                              "full-run"};
  return names;
}

int run(const ExperimentConfig& cfg, const std::string& pipeline, std::ostream& log,
        std::ostream& err, bool quiet) {
  if (std::find(pipelines().begin(), pipelines().end(), pipeline) == pipelines().end()) {
    err << "config error: unknown pipeline " << pipeline << '\n';
    return config_error;
  }
  const bool full = pipeline == "full-run";
  const bool want_classify = pipeline == "classify" || (full && cfg.classify && cfg.functions.psi);
  if (pipeline == "classify" && (!cfg.functions.psi || !cfg.classify)) {
    err << "config error: classify needs functions.psi and a classify block\n";
    return config_error;
  }
  if (want_classify) {
    for (const auto& t : cfg.classify->targets) {
      try {
        auto x = Target::parse(t).value(64);
        if (x.lo < 0 || x.hi > 1) throw DomainError("must lie in [0, 1]");
      } catch (const std::exception& e) {
        err << "config error: classify target " << t << ": " << e.what() << '\n';
        return config_error;
      }
    }
  }

  fs::path dir(cfg.output.directory);
  {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      err << "i/o error: cannot create " << dir.string() << ": " << ec.message() << '\n';
      return io_error;
    }
  }

  Run r(cfg, log, quiet);
  r.report["schema_version"] = kSchemaVersion;
  r.report["config_hash"] = cfg.hash;
  r.report["seed"] = cfg.params.seed;
  r.report["pipeline"] = pipeline;
  r.report["config"] = cfg.canonical;
  r.report["system"] = {{"description", cfg.system.sys.describe()},
                        {"d", cfg.system.sys.d},
                        {"phi", cfg.functions.phi.describe()},
                        {"rho", cfg.functions.rho.describe()}};

  int status = ok;
  std::string message;
  try {
    if (want_classify) r.classify();
    if (pipeline == "ubiquity-check" || full) r.ubiquity();
    if (pipeline == "build-cantor" || full) r.build();
    if (pipeline == "verify-measure" || full) r.measure();
    if (pipeline == "dimension-estimate" || full) r.dimension();
    if (pipeline == "series-report" || full) r.series();
  } catch (const ConstructionError& e) {
    status = construction_error;
    message = std::string("construction error [") + e.tag() + "]: " + e.what();
    r.report["error"] = {{"equation_tag", e.tag()}, {"message", e.what()}};
  } catch (const DomainError& e) {
    status = construction_error;
    message = std::string("construction error [domain]: ") + e.what();
    r.report["error"] = {{"equation_tag", "domain"}, {"message", e.what()}};
  } catch (const UndecidedComparison& e) {
    status = construction_error;
    message = std::string("construction error [undecided]: ") + e.what();
    r.report["error"] = {{"equation_tag", "undecided"}, {"message", e.what()}};
  }

  std::size_t n_pass = 0, n_fail = 0, n_open = 0;
  const AuditRow* first_fail = nullptr;
  for (const auto& row : r.audit) {
    switch (row.status) {
      case AuditRow::Status::pass:
        ++n_pass;
        break;
      case AuditRow::Status::open:
        ++n_open;
        break;
      case AuditRow::Status::fail:
        ++n_fail;
        if (!first_fail) first_fail = &row;
        break;
    }
  }
  r.report["audit"] = {{"rows", r.audit.size()},
                       {"pass", n_pass},
                       {"fail", n_fail},
                       {"open", n_open},
                       {"first_failure", first_fail ? row_json(*first_fail) : json(nullptr)}};
  if (status == ok && first_fail) {
    status = construction_error;
    message = "assertion failed [" + first_fail->tag + "] level " +
              std::to_string(first_fail->level) + " sublevel " +
              std::to_string(first_fail->sublevel) + ": " + first_fail->lhs + " " +
              first_fail->relation + " " + first_fail->rhs + " (" + std::to_string(n_fail) +
              " failing rows)";
  }
  r.report["status"] = status == ok ? "ok" : "construction-error";

  try {
    if (cfg.output.json) {
      write_file(dir / "report.json", r.report.dump(2) + "\n");
      if (r.tree) write_file(dir / "tree.json", r.tree_json().dump() + "\n");
    }
    if (cfg.output.csv) {
      std::ostringstream os;
      write_audit_csv(os, r.audit);
      write_file(dir / "audit.csv", os.str());
      if (r.boxes) {
        std::ostringstream bs;
        bs << "exponent,box_side,count\n";
        for (const auto& c : r.boxes->counts) {
          bs << c.exponent << ",1/" << to_string(pow(Integer(2), static_cast<unsigned long>(c.exponent)))
             << ',' << to_string(c.count) << '\n';
        }
        write_file(dir / "boxcount.csv", bs.str());
      }
    }
    if (cfg.output.svg && r.boxes) write_file(dir / "plot.svg", r.svg());
  } catch (const std::exception& e) {
    err << "i/o error: " << e.what() << '\n';
    return io_error;
  }

  if (status != ok) err << message << '\n';
  return status;
}

int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Exact approximation experiments: classification, ubiquity, Cantor construction "
               "and mass distribution audits"};
  std::string config_path, pipeline, out;
  std::optional<std::uint64_t> seed;
  std::optional<long> depth;
  bool quiet = false;
  app.add_option("pipeline,--pipeline", pipeline, "Pipeline to run")
      ->required()
      ->check(CLI::IsMember(pipelines()));
  app.add_option("--config", config_path, "Experiment config (JSON)")->required();
  app.add_option("--out", out, "Output directory (overrides output.directory)");
  app.add_option("--seed", seed, "Seed (overrides params.seed)");
  app.add_option("--depth", depth, "Tree depth (overrides params.depth)")
      ->check(CLI::Range(1L, 8L));
  app.add_flag("--quiet", quiet, "Suppress progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  }

  std::ifstream is(config_path, std::ios::binary);
  if (!is) {
    err << "i/o error: cannot read " << config_path << '\n';
    return io_error;
  }
  ExperimentConfig cfg;
  try {
    json doc = json::parse(is);
    cfg = parse_config(std::move(doc), seed, depth,
                       out.empty() ? std::nullopt : std::optional<std::string>(out));
  } catch (const json::parse_error& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  }
  return run(cfg, pipeline, log, err, quiet);
}

}  // namespace dioph::cli
