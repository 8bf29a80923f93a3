#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dgla {

// One verified identity. `anchor` carries the formula the check pins down,
// `witness` the value/residual backing the verdict (empty when passing and
// nothing interesting to show).
struct CheckRecord {
  std::string id;
  std::string anchor;
  std::string status;  // "pass" | "fail" | "refused-by-cutoff"
  std::string witness;
  long micros = 0;
};

class Reporter {
 public:
  void pass(const std::string& id, const std::string& anchor, const std::string& witness = "");
  void fail(const std::string& id, const std::string& anchor, const std::string& witness);
  void refused(const std::string& id, const std::string& anchor, const std::string& witness);
  void check(bool ok, const std::string& id, const std::string& anchor,
             const std::string& witness_on_fail);

  bool all_pass() const;
  bool any_fail() const;
  const std::vector<CheckRecord>& records() const { return records_; }
  void append(const Reporter& other);

 private:
  std::vector<CheckRecord> records_;
};

// One JSON object per line, keys sorted, micros forced to 0 so identical
// configurations produce byte-identical output.
void write_structured(std::ostream& os, const std::vector<CheckRecord>& records);
void write_human(std::ostream& os, const std::vector<CheckRecord>& records);

}  // namespace dgla
