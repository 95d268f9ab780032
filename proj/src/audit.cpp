#include "dioph/audit.hpp"

#include <gmp.h>

#include <vector>

namespace dioph {

const char* to_string(AuditRow::Status s) {
  switch (s) {
    case AuditRow::Status::pass:
      return "pass";
    case AuditRow::Status::fail:
      return "fail";
    case AuditRow::Status::open:
      return "open";
  }
  return "?";
}

namespace {

constexpr std::size_t kExactLimit = 48;

std::string scientific(const mpf_class& f) {
  std::vector<char> buf(64);
  int n = gmp_snprintf(buf.data(), buf.size(), "%.15Fe", f.get_mpf_t());
  if (n >= static_cast<int>(buf.size())) {
    buf.resize(static_cast<std::size_t>(n) + 1);
    gmp_snprintf(buf.data(), buf.size(), "%.15Fe", f.get_mpf_t());
  }
  return std::string("~") + buf.data();
}

}  // namespace

std::string format_value(const Rational& q) {
  std::string exact = to_string(q);
  if (exact.size() <= kExactLimit) return exact;
  return scientific(mpf_class(q, 128));
}

std::string format_value(const Integer& z) {
  std::string exact = to_string(z);
  if (exact.size() <= kExactLimit) return exact;
  return scientific(mpf_class(z, 128));
}

std::string format_value(const Enclosure& e) {
  if (e.exact()) return format_value(e.lo);
  return scientific(mpf_class(e.mid(), 128));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_audit_csv(std::ostream& os, const std::vector<AuditRow>& rows) {
  os << "equation_tag,level,sublevel,lhs,rhs,relation,pass\n";
  for (const auto& r : rows) {
    os << csv_field(r.tag + (r.sampled ? "/sampled" : "")) << ',' << r.level << ','
       << r.sublevel << ',' << csv_field(r.lhs) << ',' << csv_field(r.rhs) << ','
       << csv_field(r.relation) << ',' << to_string(r.status) << '\n';
  }
}

AuditRow make_row(std::string tag, long level, long sublevel, std::string lhs, std::string rhs,
                  std::string relation, bool pass, bool sampled) {
  AuditRow r;
  r.tag = std::move(tag);
  r.level = level;
  r.sublevel = sublevel;
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  r.relation = std::move(relation);
  r.status = pass ? AuditRow::Status::pass : AuditRow::Status::fail;
  r.sampled = sampled;
  return r;
}

}  // namespace dioph
