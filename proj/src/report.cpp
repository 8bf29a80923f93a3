#include "dgla/report.hpp"

#include <json.hpp>

#include <ostream>

namespace dgla {

void Reporter::pass(const std::string& id, const std::string& anchor, const std::string& witness) {
  records_.push_back({id, anchor, "pass", witness, 0});
}

void Reporter::fail(const std::string& id, const std::string& anchor, const std::string& witness) {
  records_.push_back({id, anchor, "fail", witness, 0});
}

void Reporter::refused(const std::string& id, const std::string& anchor,
                       const std::string& witness) {
  records_.push_back({id, anchor, "refused-by-cutoff", witness, 0});
}

void Reporter::check(bool ok, const std::string& id, const std::string& anchor,
                     const std::string& witness_on_fail) {
  if (ok)
    pass(id, anchor);
  else
    fail(id, anchor, witness_on_fail);
}

bool Reporter::all_pass() const {
  for (const auto& r : records_)
    if (r.status != "pass") return false;
  return true;
}

bool Reporter::any_fail() const {
  for (const auto& r : records_)
    if (r.status == "fail") return true;
  return false;
}

void Reporter::append(const Reporter& other) {
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

void write_structured(std::ostream& os, const std::vector<CheckRecord>& records) {
  for (const auto& r : records) {
    nlohmann::json j;  // object keys serialize sorted
    j["id"] = r.id;
    j["anchor"] = r.anchor;
    j["status"] = r.status;
    j["witness"] = r.witness;
    j["micros"] = 0;
    os << j.dump() << "\n";
  }
}

void write_human(std::ostream& os, const std::vector<CheckRecord>& records) {
  size_t npass = 0, nfail = 0, nref = 0;
  for (const auto& r : records) {
    const char* mark = r.status == "pass" ? "ok " : (r.status == "fail" ? "FAIL" : "SKIP");
    os << "[" << mark << "] " << r.id << "  --  " << r.anchor;
    if (!r.witness.empty()) os << "\n       " << r.witness;
    os << "\n";
    if (r.status == "pass")
      ++npass;
    else if (r.status == "fail")
      ++nfail;
    else
      ++nref;
  }
  os << npass << " passed, " << nfail << " failed, " << nref << " refused-by-cutoff\n";
}

}  // namespace dgla
