#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dioph/enclosure.hpp"
#include "dioph/rational.hpp"

namespace dioph {

/// A construction step whose asserted inequality failed. `tag` names the
/// inequality; the message carries the exact operands.
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(std::string tag, const std::string& message)
      : std::runtime_error(tag + ": " + message), tag_(std::move(tag)) {}
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
};

/// One checked inequality. `open` marks a soft condition the truncated
/// construction could not close (never counted as a pass).
struct AuditRow {
  enum class Status { pass, fail, open };

  std::string tag;
  long level = 0;
  long sublevel = 0;
  std::string lhs;
  std::string rhs;
  std::string relation;
  Status status = Status::pass;
  bool sampled = false;

  bool passed() const { return status == Status::pass; }
};

const char* to_string(AuditRow::Status s);

/// Exact fraction when short, otherwise "~d.ddddddddddddddde+N" (the
/// comparison that produced the row was exact either way).
std::string format_value(const Rational& q);
std::string format_value(const Integer& z);
std::string format_value(const Enclosure& e);

/// RFC 4180 quoting: fields holding a comma, quote or newline are quoted.
std::string csv_field(const std::string& s);

/// CSV with header equation_tag,level,sublevel,lhs,rhs,relation,pass.
/// Sampled rows carry a "/sampled" suffix on the tag.
void write_audit_csv(std::ostream& os, const std::vector<AuditRow>& rows);

AuditRow make_row(std::string tag, long level, long sublevel, std::string lhs, std::string rhs,
                  std::string relation, bool pass, bool sampled = false);

}  // namespace dioph
