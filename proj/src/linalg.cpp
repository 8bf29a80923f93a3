#include "dgla/linalg.hpp"

#include <algorithm>
#include <sstream>

namespace dgla {

bool Echelon::add(const SparseVec& v) {
  SparseVec w(v);
  SparseVec used = reduce(w);
  int idx = n_inserted_++;
  if (w.is_zero()) return false;
  // Normalize at the lead and record pivot.
  Rational inv = w.lead_coeff().inverse();
  w.scale(inv);
  if (track_) {
    // w = (inserted_idx - sum used_r * row_r) * inv
    SparseVec combo = SparseVec::unit(static_cast<SymId>(idx));
    for (const auto& [r, c] : used.terms()) combo.axpy(-c, combos_[static_cast<size_t>(r)]);
    combo.scale(inv);
    combos_.push_back(std::move(combo));
  }
  pivot_row_.emplace(w.lead(), static_cast<int>(rows_.size()));
  rows_.push_back(std::move(w));
  return true;
}

SparseVec Echelon::reduce(SparseVec& v) const {
  // Full forward reduction in one ascending sweep. Eliminating at a pivot s
  // only introduces terms with index > s (pivot rows lead at s), so a cursor
  // that only moves up visits every symbol at most once.
  SparseVec used;
  SymId cursor = -1;
  while (true) {
    const auto& ts = v.terms();
    auto it = std::upper_bound(ts.begin(), ts.end(), cursor,
                               [](SymId key, const SparseVec::Term& t) { return key < t.first; });
    bool hit = false;
    for (; it != ts.end(); ++it) {
      cursor = it->first;
      auto p = pivot_row_.find(it->first);
      if (p != pivot_row_.end()) {
        Rational c = it->second;
        v.axpy(-c, rows_[static_cast<size_t>(p->second)]);
        used.add_term(static_cast<SymId>(p->second), c);
        hit = true;
        break;  // v mutated; re-seek from the cursor
      }
    }
    if (!hit) break;
  }
  return used;
}

SparseVec Echelon::residual(SparseVec v) const {
  reduce(v);
  return v;
}

std::optional<SparseVec> Echelon::coords(SparseVec v) const {
  SparseVec used = reduce(v);
  if (!v.is_zero()) return std::nullopt;
  return used;
}

std::optional<SparseVec> Echelon::combo_for(SparseVec v) const {
  if (!track_) throw std::logic_error("Echelon: combo tracking disabled");
  SparseVec used = reduce(v);
  if (!v.is_zero()) return std::nullopt;
  SparseVec combo;
  for (const auto& [r, c] : used.terms()) combo.axpy(c, combos_[static_cast<size_t>(r)]);
  return combo;
}

void SparseLinearMap::set_column(SymId dom, SparseVec image) {
  if (image.is_zero()) {
    columns_.erase(dom);
    return;
  }
  columns_[dom] = std::move(image);
}

const SparseVec& SparseLinearMap::column(SymId dom) const {
  static const SparseVec kZero;
  auto it = columns_.find(dom);
  return it == columns_.end() ? kZero : it->second;
}

SparseVec SparseLinearMap::apply(const SparseVec& v) const {
  SparseVec out;
  for (const auto& [s, c] : v.terms()) {
    auto it = columns_.find(s);
    if (it != columns_.end()) out.axpy(c, it->second);
  }
  return out;
}

void SparseLinearMap::check_homogeneous() const {
  if (!symbols_) return;
  for (SymId dom : domain_) {
    const SparseVec& col = column(dom);
    if (col.is_zero()) continue;
    int want = symbols_->degree(dom) + shift_;
    for (const auto& [s, c] : col.terms()) {
      (void)c;
      if (symbols_->degree(s) != want) {
        std::ostringstream os;
        os << "map not homogeneous: column " << symbols_->name(dom) << " (degree "
           << symbols_->degree(dom) << ", shift " << shift_ << ") hits " << symbols_->name(s)
           << " of degree " << symbols_->degree(s);
        throw DegreeMismatch(os.str());
      }
    }
  }
}

std::optional<SparseVec> solve_linear(const SparseLinearMap& map, const GradedElement& target) {
  if (target.v.is_zero()) return SparseVec();

  std::vector<SymId> usable = map.domain_basis();
  if (map.symbols()) {
    std::optional<int> tdeg = target.declared_degree;
    if (!tdeg) tdeg = homogeneous_degree(target.v, *map.symbols());
    if (target.declared_degree) {
      auto actual = homogeneous_degree(target.v, *map.symbols());
      if (actual && *actual != *target.declared_degree) {
        std::ostringstream os;
        os << "solve_linear: declared degree " << *target.declared_degree
           << " but element is homogeneous of degree " << *actual;
        throw DegreeMismatch(os.str());
      }
    }
    if (tdeg) {
      int want = *tdeg - map.degree_shift();
      std::vector<SymId> filtered;
      for (SymId s : usable)
        if (map.symbols()->degree(s) == want) filtered.push_back(s);
      if (filtered.empty()) {
        std::ostringstream os;
        os << "solve_linear: target degree " << *tdeg << " needs domain degree " << want
           << " but the domain basis has none";
        throw DegreeMismatch(os.str());
      }
      usable = std::move(filtered);
    }
  }

  Echelon ech(true);
  std::vector<SymId> inserted_labels;
  for (SymId s : usable) {
    const SparseVec& col = map.column(s);
    inserted_labels.push_back(s);
    ech.add(col);
  }
  auto combo = ech.combo_for(target.v);
  if (!combo) return std::nullopt;
  SparseVec x;
  for (const auto& [idx, c] : combo->terms())
    x.add_term(inserted_labels[static_cast<size_t>(idx)], c);
  return x;
}

std::optional<SparseVec> solve_in_span(const std::vector<SparseVec>& gens,
                                       const SparseVec& target) {
  Echelon ech(true);
  for (const auto& g : gens) ech.add(g);
  auto combo = ech.combo_for(target);
  if (!combo) return std::nullopt;
  SparseVec x;
  for (const auto& [idx, c] : combo->terms()) x.add_term(idx, c);
  return x;
}

int rank(const std::vector<SparseVec>& vectors) {
  Echelon ech;
  for (const auto& v : vectors) ech.add(v);
  return ech.rank();
}

int rank(const SparseLinearMap& map) {
  Echelon ech;
  for (SymId s : map.domain_basis()) ech.add(map.column(s));
  return ech.rank();
}

std::vector<SparseVec> nullspace_of_columns(const std::vector<SparseVec>& cols,
                                            const std::vector<SymId>& labels) {
  Echelon ech(true);
  std::vector<SparseVec> null;
  for (size_t j = 0; j < cols.size(); ++j) {
    SparseVec v(cols[j]);
    SparseVec used = ech.reduce(v);
    if (v.is_zero()) {
      // cols[j] = sum used_r row_r; row_r tracked over inserted indices.
      SparseVec rel = SparseVec::unit(static_cast<SymId>(ech.inserted()));
      for (const auto& [r, c] : used.terms()) rel.axpy(-c, ech.row_combo(r));
      // Re-key from insertion index to caller labels.
      SparseVec keyed;
      for (const auto& [i, c] : rel.terms()) keyed.add_term(labels[static_cast<size_t>(i)], c);
      null.push_back(std::move(keyed));
      // Register the dependent column as inserted (rank unchanged).
      ech.add(cols[j]);
    } else {
      ech.add(cols[j]);
    }
  }
  return null;
}

std::vector<SparseVec> nullspace(const SparseLinearMap& map) {
  std::vector<SparseVec> cols;
  cols.reserve(map.domain_basis().size());
  for (SymId s : map.domain_basis()) cols.push_back(map.column(s));
  return nullspace_of_columns(cols, map.domain_basis());
}

int cohomology_dim(const SparseLinearMap& d_in, const SparseLinearMap& d_out) {
  for (SymId s : d_in.domain_basis()) {
    SparseVec w = d_out.apply(d_in.column(s));
    if (!w.is_zero()) {
      std::ostringstream os;
      os << "cohomology_dim: composite differential nonzero on basis vector ";
      os << (d_in.symbols() ? d_in.symbols()->name(s) : std::to_string(s));
      if (d_in.symbols()) os << " -> " << to_string(w, *d_in.symbols());
      throw std::logic_error(os.str());
    }
  }
  int mid_dim = static_cast<int>(d_out.domain_basis().size());
  return (mid_dim - rank(d_out)) - rank(d_in);
}

}  // namespace dgla
