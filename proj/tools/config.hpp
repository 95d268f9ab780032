#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dioph/cantor.hpp"
#include "dioph/functions.hpp"
#include "dioph/geometry.hpp"
#include "dioph/rational.hpp"
#include "dioph/systems.hpp"

namespace dioph::cli {

/// Rejected configuration; exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemBlock {
  ApproxSystem sys;
  std::optional<Rational> t;  // nullopt: auto-selected from the ubiquity window
  long offset = 0;
};

struct FunctionsBlock {
  ApproxFunction phi;
  ApproxFunction rho;
  std::optional<ApproxFunction> psi;
};

struct ParamsBlock {
  Rational s;
  Rational delta;
  Rational eta{1};
  Rational kappa{1};
  Rational r0{1, 4};
  Regime regime = Regime::finite_g;
  Ball root;
  long depth = 2;
  std::size_t population_cap = 16;
  std::size_t exhaustive_limit = 512;
  long n_max = 4000;
  long k_cap = 1;
  std::uint64_t seed = 0;
};

struct ClassifyBlock {
  std::vector<std::string> targets;
  long q_max = 200;
  std::vector<Rational> epsilons;
};

struct UbiquityBlock {
  Ball window;
  long n_lo = 2;
  long n_hi = 12;
};

struct MeasureBlock {
  std::size_t holder_samples = 1000;
};

struct DimensionBlock {
  std::optional<long> level;  // nullopt: deepest level
  long min_exponent = 6;
  long max_exponent = 14;
};

struct SeriesBlock {
  long terms = 200;
};

struct OutputBlock {
  std::string directory = "out";
  bool json = true;
  bool csv = true;
  bool svg = false;
};

struct ExperimentConfig {
  SystemBlock system;
  FunctionsBlock functions;
  ParamsBlock params;
  std::optional<ClassifyBlock> classify;
  UbiquityBlock ubiquity;
  MeasureBlock measure;
  DimensionBlock dimension;
  SeriesBlock series;
  OutputBlock output;
  /// The document after command-line overrides, keys sorted.
  nlohmann::json canonical;
  std::string hash;  // fnv1a-64 of canonical.dump(), 16 hex digits
};

/// Strict parse: every key is known, every rational is a "p/q" string.
/// Overrides replace params.seed, params.depth and output.directory before
/// hashing. Throws ConfigError.
ExperimentConfig parse_config(nlohmann::json doc, std::optional<std::uint64_t> seed = std::nullopt,
                              std::optional<long> depth = std::nullopt,
                              std::optional<std::string> out = std::nullopt);

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace dioph::cli
