#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgla/basis.hpp"

namespace dgla {

// Raised when a computation would need basis strata beyond the constructed
// truncation window. Callers surface it as a "refused-by-cutoff" status.
struct CutoffRefusal : std::runtime_error {
  explicit CutoffRefusal(const std::string& what) : std::runtime_error(what) {}
};

struct DegreeMismatch : std::invalid_argument {
  explicit DegreeMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// Incremental row echelon over sparse rational vectors. Pivot selection is
// deterministic: each row is reduced against existing pivots and, when
// independent, becomes a new pivot row normalized at its lowest surviving
// basis index. Optionally tracks each pivot row as a combination of the
// vectors inserted so far (keyed by insertion index).
class Echelon {
 public:
  explicit Echelon(bool track_combos = false) : track_(track_combos) {}

  // Returns true when v was independent (rank grew).
  bool add(const SparseVec& v);

  // Reduces v in place against the pivot rows; returns the coefficients
  // used, keyed by pivot-row index.
  SparseVec reduce(SparseVec& v) const;

  // Residual of v after forward reduction (v itself untouched).
  SparseVec residual(SparseVec v) const;

  bool contains(const SparseVec& v) const { return residual(std::move(v)).is_zero(); }

  // Coefficients over pivot rows expressing v, when v lies in the span.
  std::optional<SparseVec> coords(SparseVec v) const;

  // Expression of v over the *inserted* vectors (requires track_combos).
  std::optional<SparseVec> combo_for(SparseVec v) const;

  int rank() const { return static_cast<int>(rows_.size()); }
  int inserted() const { return n_inserted_; }
  const SparseVec& row(int i) const { return rows_[static_cast<size_t>(i)]; }
  const SparseVec& row_combo(int i) const { return combos_[static_cast<size_t>(i)]; }

 private:
  bool track_;
  std::vector<SparseVec> rows_;    // normalized, lead coefficient 1
  std::vector<SparseVec> combos_;  // row i as combination of inserted vectors
  std::unordered_map<SymId, int> pivot_row_;
  int n_inserted_ = 0;
};

// Sparse linear map between graded spaces, stored column-wise over an
// explicit ordered domain basis. Missing columns are zero. The degree shift
// is part of the contract: every set column must move degrees by it.
class SparseLinearMap {
 public:
  SparseLinearMap() = default;
  SparseLinearMap(const SymbolTable* symbols, std::vector<SymId> domain_basis, int degree_shift)
      : symbols_(symbols), domain_(std::move(domain_basis)), shift_(degree_shift) {}

  void set_column(SymId dom, SparseVec image);
  const SparseVec& column(SymId dom) const;
  SparseVec apply(const SparseVec& v) const;

  const std::vector<SymId>& domain_basis() const { return domain_; }
  int degree_shift() const { return shift_; }
  const SymbolTable* symbols() const { return symbols_; }

  // Verifies every set column is homogeneous of domain degree + shift.
  void check_homogeneous() const;

 private:
  const SymbolTable* symbols_ = nullptr;
  std::vector<SymId> domain_;
  int shift_ = 0;
  std::unordered_map<SymId, SparseVec> columns_;
};

// Exact solve of map(x) = target. Returns a domain vector, or nullopt when
// the target is not in the image. Pivoting is deterministic (lowest basis
// order first); a target whose degree cannot match any column is rejected
// with a DegreeMismatch naming both degrees.
std::optional<SparseVec> solve_linear(const SparseLinearMap& map, const GradedElement& target);

// Solve over an explicit generating set: find x with sum x_i * gens[i] = target.
std::optional<SparseVec> solve_in_span(const std::vector<SparseVec>& gens, const SparseVec& target);

int rank(const std::vector<SparseVec>& vectors);
int rank(const SparseLinearMap& map);

// Nullspace basis of the map, as domain vectors (deterministic order).
std::vector<SparseVec> nullspace(const SparseLinearMap& map);
std::vector<SparseVec> nullspace_of_columns(const std::vector<SparseVec>& cols,
                                            const std::vector<SymId>& labels);

// dim ker(d_out) - rank(d_in) for a composable pair; throws std::logic_error
// naming a witness basis vector when d_out(d_in(v)) != 0.
int cohomology_dim(const SparseLinearMap& d_in, const SparseLinearMap& d_out);

}  // namespace dgla
