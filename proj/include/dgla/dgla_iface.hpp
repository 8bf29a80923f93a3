#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dgla/basis.hpp"
#include "dgla/linalg.hpp"
#include "dgla/report.hpp"

namespace dgla {

// Differential graded Lie algebra presented over an interned basis.
// Conventions used by every implementation:
//   [a,b] = -(-1)^{|a||b|} [b,a]
//   d[a,b] = [da,b] + (-1)^{|a|} [a,db]
//   d^2 = 0, and d raises degree by one.
// Implementations may be truncated below; operations whose result would
// leave the constructed window throw CutoffRefusal.
class Dgla {
 public:
  virtual ~Dgla() = default;

  virtual const SymbolTable& symbols() const = 0;
  virtual std::vector<SymId> basis(int degree) const = 0;
  virtual int min_degree() const = 0;
  virtual int max_degree() const = 0;
  virtual SparseVec bracket_sym(SymId a, SymId b) const = 0;
  virtual SparseVec d_sym(SymId a) const = 0;

  int degree(SymId s) const { return symbols().degree(s); }
  bool odd(SymId s) const { return (degree(s) & 1) != 0; }

  SparseVec bracket(const SparseVec& x, const SparseVec& y) const;
  SparseVec d(const SparseVec& x) const;
};

// DGLA with explicitly stored bracket and differential tables (both bracket
// orders stored independently so the axiom sweep is a real check).
class TableDgla : public Dgla {
 public:
  const SymbolTable& symbols() const override { return syms_; }
  std::vector<SymId> basis(int degree) const override;
  int min_degree() const override { return min_deg_; }
  int max_degree() const override { return max_deg_; }
  SparseVec bracket_sym(SymId a, SymId b) const override;
  SparseVec d_sym(SymId a) const override;

  SymId add_symbol(const std::string& name, int degree);
  void set_bracket(SymId a, SymId b, SparseVec v);  // stores this order only
  void set_bracket_pair(SymId a, SymId b, const SparseVec& v);  // also stores the flip
  void set_d(SymId a, SparseVec v);

  std::string label;

 private:
  SymbolTable syms_;
  std::vector<std::vector<SparseVec>> br_;
  std::vector<SparseVec> d_;
  int min_deg_ = 0, max_deg_ = 0;
  void ensure_size();
};

struct AxiomSweepOptions {
  bool antisymmetry = true;
  bool jacobi = true;
  bool d_squared = true;
  bool leibniz = true;
  std::string id_prefix;
};

// Full axiom sweep over all stored basis symbols (all pairs and triples whose
// bracket degrees stay inside the window). Appends one record per axiom with
// a first-failure witness.
void verify_dgla_axioms(const Dgla& A, Reporter& rep, const AxiomSweepOptions& opts = {});

}  // namespace dgla
