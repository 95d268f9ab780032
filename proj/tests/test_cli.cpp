#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "config.hpp"
#include "runner.hpp"

using namespace dioph;
using namespace dioph::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal() {
  return json::parse(R"({
    "system": {"kind": "base-power", "b": 2},
    "functions": {"phi": {"kind": "power", "coef": "1", "exponent": "3"}},
    "params": {"s": "1/2", "depth": 2, "seed": 7}
  })");
}

json with_psi() {
  json j = minimal();
  j["functions"]["psi"] = {{"kind", "power"}, {"coef", "1"}, {"exponent", "-2"}};
  j["classify"] = {{"targets", {"1/3", "surd:-1,1,5,2"}}, {"q_max", 60}};
  return j;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("dioph_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Outcome {
  int status = 0;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::vector<const char*> argv{"dioph"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream log, err;
  int status = run_cli(static_cast<int>(argv.size()), argv.data(), log, err);
  return {status, err.str()};
}

Outcome run_config(const std::string& name, const json& j, const std::string& pipeline,
                   std::vector<std::string> extra = {}) {
  fs::path dir = scratch(name);
  fs::path cfg = write_config(dir, j);
  std::vector<std::string> args{pipeline, "--config", cfg.string(), "--out", (dir / "out").string(),
                                "--quiet"};
  args.insert(args.end(), extra.begin(), extra.end());
  return invoke(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cells.back() += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cells.back() += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.emplace_back();
      } else {
        cells.back() += c;
      }
    }
    rows.push_back(cells);
  }
  return rows;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path out_of(const std::string& name) { return fs::temp_directory_path() / ("dioph_cli_test_" + name) / "out"; }

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(parse_config(minimal()));
  auto reject = [](json j) { CHECK_THROWS_AS(parse_config(std::move(j)), ConfigError); };
  json j = minimal();
  j["params"]["bogus"] = 1;
  reject(j);
  j = minimal();
  j["extra"] = json::object();
  reject(j);
  j = minimal();
  j["functions"]["phi"]["scale"] = "2";
  reject(j);
  j = minimal();
  j["params"]["s"] = 0.5;  // numbers are not exact rationals
  reject(j);
  j = minimal();
  j["params"]["s"] = "1/0";
  reject(j);
  j = minimal();
  j["params"]["delta"] = "2";  // Lebesgue on [0,1] has delta = 1
  reject(j);
  j = minimal();
  j["system"]["d"] = 2;
  reject(j);
  j = minimal();
  j["system"]["kind"] = "rationals";
  reject(j);  // b belongs to base-power
  j["system"].erase("b");
  reject(j);  // t is required
  j["system"]["t"] = "auto";
  CHECK_NOTHROW(parse_config(j));
  j = minimal();
  j["output"] = {{"formats", {"json", "pdf"}}};
  reject(j);
  j = minimal();
  j["params"]["root"] = {{"center", {"1/2"}}, {"radius", "1/2"}};  // beyond r0
  reject(j);
}

TEST_CASE("s outside (0, delta) is a config error") {
  for (const char* s : {"1", "3/2", "0", "-1/2"}) {
    json j = minimal();
    j["params"]["s"] = s;
    try {
      parse_config(j);
      FAIL("accepted s = " << s);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()) == "s must lie in (0, delta)");
    }
  }
  json j = minimal();
  j["params"]["s"] = "1";
  auto o = run_config("s_delta", j, "build-cantor");
  CHECK(o.status == config_error);
  CHECK(o.err.find("s must lie in (0, delta)") != std::string::npos);
}

TEST_CASE("exit statuses") {
  json j = minimal();
  j["params"]["unknown"] = true;
  CHECK(run_config("unknown", j, "build-cantor").status == config_error);

  CHECK(invoke({"build-cantor", "--config", "/nonexistent/config.json"}).status == io_error);

  fs::path dir = scratch("syntax");
  std::ofstream(dir / "c.json") << "{ \"system\": ";
  CHECK(invoke({"build-cantor", "--config", (dir / "c.json").string()}).status == config_error);

  fs::path cfg = write_config(scratch("pipeline"), minimal());
  CHECK(invoke({"nonsense", "--config", cfg.string()}).status == config_error);
  CHECK(invoke({"build-cantor"}).status == config_error);

  // a regular file where the output directory should go
  fs::path blocker = scratch("io") / "file";
  std::ofstream(blocker) << "x";
  auto o = invoke({"series-report", "--config", cfg.string(), "--out", (blocker / "sub").string()});
  CHECK(o.status == io_error);

  // an n budget too small for level 1 names the failing inequality
  j = minimal();
  j["params"]["n_max"] = 5;
  o = run_config("nmax", j, "build-cantor");
  CHECK(o.status == construction_error);
  CHECK(o.err.find("construction error [") != std::string::npos);
  auto report = read_json(out_of("nmax") / "report.json");
  CHECK(report["status"] == "construction-error");
  CHECK(!report["error"]["equation_tag"].get<std::string>().empty());

  // classify needs psi
  CHECK(run_config("nopsi", minimal(), "classify").status == config_error);
  j = with_psi();
  j["classify"]["targets"] = {"5/3"};
  CHECK(run_config("range", j, "classify").status == config_error);
}

TEST_CASE("build-cantor writes a clean audit and a tree") {
  fs::path dir = scratch("build");
  fs::path out = dir / "out";
  auto o = invoke({"--pipeline", "build-cantor", "--quiet", "--config",
                   write_config(dir, minimal()).string(), "--out", out.string()});
  REQUIRE(o.status == ok);
  auto report = read_json(out / "report.json");
  CHECK(report["schema_version"] == 1);
  CHECK(report["config_hash"].get<std::string>().size() == 16);
  CHECK(report["seed"] == 7);
  CHECK(report["tree"]["depth"] == 2);
  CHECK(report["tree"]["levels"][0]["n"] == 8);
  CHECK(report["tree"]["levels"][1]["nodes"] == 1024);
  CHECK(report["audit"]["fail"] == 0);

  auto rows = read_csv(out / "audit.csv");
  REQUIRE(!rows.empty());
  CHECK(rows[0] == std::vector<std::string>{"equation_tag", "level", "sublevel", "lhs", "rhs",
                                            "relation", "pass"});
  CHECK(rows.size() == report["audit"]["rows"].get<std::size_t>() + 1);
  std::size_t sep = 0, witness = 0, num1 = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].size() == 7);
    CHECK(rows[i][6] != "fail");
    if (rows[i][0] == "sep") ++sep;
    if (rows[i][0] == "num1" && rows[i][5] == "in [rhs/2, rhs]") ++num1;
    if (rows[i][0] == "witness") ++witness;
  }
  CHECK(sep == 2);
  CHECK(num1 > 0);
  CHECK(witness == 2);

  auto tree = read_json(out / "tree.json");
  CHECK(tree["nodes"].size() == 1 + 32 + 1024);
  CHECK(tree["config_hash"] == report["config_hash"]);
  for (const auto& n : tree["nodes"]) {
    // exact fractions round-trip
    CHECK_NOTHROW(parse_rational(n["radius"].get<std::string>()));
  }
  CHECK_FALSE(fs::exists(out / "plot.svg"));
}

TEST_CASE("overrides enter the hash") {
  auto a = parse_config(minimal());
  auto b = parse_config(minimal(), 8);
  auto c = parse_config(minimal(), std::nullopt, 1);
  auto d = parse_config(minimal(), std::nullopt, std::nullopt, std::string("elsewhere"));
  CHECK(a.hash != b.hash);
  CHECK(a.hash != c.hash);
  CHECK(a.hash == d.hash);
  CHECK(b.params.seed == 8);
  CHECK(c.params.depth == 1);
  CHECK(d.output.directory == "elsewhere");
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("full-run is deterministic and mirrors the audit") {
  json j = with_psi();
  j["ubiquity"] = {{"window", {{"center", {"1/2"}}, {"radius", "1/4"}}}, {"n_lo", 2}, {"n_hi", 8}};
  j["measure"] = {{"holder_samples", 200}};
  j["output"] = {{"formats", {"json", "csv", "svg"}}};
  auto first = run_config("det1", j, "full-run");
  auto second = run_config("det2", j, "full-run");
  CHECK(first.status == second.status);
  CHECK(first.err == second.err);
  for (const char* f : {"report.json", "audit.csv", "tree.json", "plot.svg", "boxcount.csv"}) {
    INFO(f);
    REQUIRE(fs::exists(out_of("det1") / f));
    CHECK(slurp(out_of("det1") / f) == slurp(out_of("det2") / f));
  }

  auto report = read_json(out_of("det1") / "report.json");
  auto rows = read_csv(out_of("det1") / "audit.csv");
  std::vector<std::vector<std::string>> ubiq, hits, holder;
  for (const auto& r : rows) {
    if (r[0] == "ubiq") ubiq.push_back(r);
    if (r[0] == "psi-hit") hits.push_back(r);
    if (r[0] == "holder") holder.push_back(r);
  }
  const auto& urows = report["ubiquity"]["rows"];
  REQUIRE(urows.size() == ubiq.size());
  for (std::size_t i = 0; i < ubiq.size(); ++i) {
    CHECK(urows[i]["ratio"] == ubiq[i][3]);
    CHECK(std::to_string(urows[i]["n"].get<long>()) == ubiq[i][2]);
    CHECK(ubiq[i][3] == "1");
  }
  std::size_t h = 0;
  for (const auto& t : report["classify"]["targets"]) {
    for (const auto& hit : t["hits"]) {
      REQUIRE(h < hits.size());
      CHECK(hit["gap"] == hits[h][3]);
      CHECK(hit["psi"] == hits[h][4]);
      ++h;
    }
  }
  CHECK(h == hits.size());
  REQUIRE(holder.size() == 1);
  CHECK(report["measure"]["holder"]["max_log2_ratio"] == holder[0][3]);

  // the first failing row in the report is the first "fail" line of the CSV
  const auto& ff = report["audit"]["first_failure"];
  if (!ff.is_null()) {
    for (const auto& r : rows) {
      if (r.size() == 7 && r[6] == "fail") {
        CHECK(ff["equation_tag"] == r[0]);
        CHECK(ff["lhs"] == r[3]);
        CHECK(ff["rhs"] == r[4]);
        break;
      }
    }
    CHECK(first.status == construction_error);
    CHECK(first.err.find("assertion failed [" + ff["equation_tag"].get<std::string>() + "]") !=
          std::string::npos);
  } else {
    CHECK(first.status == ok);
  }

  auto boxes = read_csv(out_of("det1") / "boxcount.csv");
  const auto& counts = report["dimension"]["counts"];
  REQUIRE(boxes.size() == counts.size() + 1);
  for (std::size_t i = 0; i < counts.size(); ++i) CHECK(boxes[i + 1][2] == counts[i]["count"]);
  CHECK(slurp(out_of("det1") / "plot.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("seed changes only what it should") {
  json j = minimal();
  auto a = run_config("seed_a", j, "build-cantor");
  auto b = run_config("seed_b", j, "build-cantor", {"--seed", "8"});
  REQUIRE(a.status == ok);
  REQUIRE(b.status == ok);
  auto ra = read_json(out_of("seed_a") / "report.json");
  auto rb = read_json(out_of("seed_b") / "report.json");
  CHECK(rb["seed"] == 8);
  CHECK(ra["config_hash"] != rb["config_hash"]);
  // an unsampled depth-2 tree does not depend on the seed
  CHECK(slurp(out_of("seed_a") / "audit.csv") == slurp(out_of("seed_b") / "audit.csv"));
}

TEST_CASE("classify and series pipelines") {
  auto o = run_config("classify", with_psi(), "classify");
  REQUIRE(o.status == ok);
  auto report = read_json(out_of("classify") / "report.json");
  const auto& targets = report["classify"]["targets"];
  REQUIRE(targets.size() == 2);
  // |1/3 - p/q| >= 1/(3q) >= q^-2 once q >= 3 and p/q != 1/3
  std::vector<std::string> expect{"0/1", "1/1", "1/2", "1/3"};
  std::vector<std::string> got;
  for (const auto& h : targets[0]["hits"]) {
    got.push_back(h["p"].get<std::string>() + "/" + h["q"].get<std::string>());
  }
  std::sort(got.begin(), got.end());
  std::sort(expect.begin(), expect.end());
  CHECK(got == expect);
  CHECK(targets[1]["continued_fraction"]["a0"] == "0");
  for (const auto& a : targets[1]["continued_fraction"]["quotients"]) CHECK(a == "1");

  o = run_config("series", with_psi(), "series-report");
  REQUIRE(o.status == ok);
  report = read_json(out_of("series") / "report.json");
  CHECK(report["series"]["regime"] == "convergent-g");
  CHECK(report["series"]["psi_s"]["verdict"] == "divergent");  // q psi(q)^(1/2) = 1
  CHECK(report["series"]["base_power_hypothesis"] == false);   // 4^n 4^-n = 1
}

TEST_CASE("ubiquity-check with an auto-selected t") {
  json j = minimal();
  j["system"] = {{"kind", "rationals"}, {"d", 1}, {"t", "auto"}};
  j["ubiquity"] = {{"window", {{"center", {"1/2"}}, {"radius", "1/8"}}}, {"n_lo", 2}, {"n_hi", 4}};
  j["params"]["kappa"] = "1/2";
  auto o = run_config("ubiq", j, "ubiquity-check");
  auto report = read_json(out_of("ubiq") / "report.json");
  CHECK(report["system"]["t_source"] == "auto");
  CHECK(report["ubiquity"]["rows"].size() == 3);
  CHECK(o.status == (report["ubiquity"]["pass"].get<bool>() ? ok : construction_error));
}
