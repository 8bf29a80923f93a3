#include "dgla/freelie.hpp"

#include <cassert>
#include <stdexcept>

namespace dgla {

namespace {

uint64_t pack_word(const std::vector<uint8_t>& letters) {
  if (letters.size() > 8) throw std::logic_error("word longer than 8 letters");
  uint64_t key = 0;
  for (size_t i = 0; i < letters.size(); ++i) {
    key |= static_cast<uint64_t>(letters[i] + 1) << (8 * i);
  }
  return key;
}

}  // namespace

FreeLieAlgebra::FreeLieAlgebra(std::vector<int> letter_degrees, int cutoff)
    : letter_deg_(std::move(letter_degrees)), cutoff_(cutoff) {
  if (cutoff_ < 1) throw std::invalid_argument("free Lie cutoff must be >= 1");
  if (letter_deg_.size() > 200) throw std::invalid_argument("too many letters");
  for (int d : letter_deg_) {
    if (d >= 0) throw std::invalid_argument("free Lie letters must have negative degree");
  }

  words_.resize(static_cast<size_t>(cutoff_) + 1);
  word_index_.resize(static_cast<size_t>(cutoff_) + 1);
  words_[0].push_back({});
  word_index_[0].emplace(pack_word({}), 0);
  for (int D = 1; D <= cutoff_; ++D) {
    auto& lvl = words_[static_cast<size_t>(D)];
    for (int g = 0; g < letter_count(); ++g) {
      int rest = D + letter_deg_[static_cast<size_t>(g)];
      if (rest < 0) continue;
      for (const auto& tail : words_[static_cast<size_t>(rest)]) {
        std::vector<uint8_t> w;
        w.reserve(tail.size() + 1);
        w.push_back(static_cast<uint8_t>(g));
        w.insert(w.end(), tail.begin(), tail.end());
        word_index_[static_cast<size_t>(D)].emplace(pack_word(w), static_cast<int32_t>(lvl.size()));
        lvl.push_back(std::move(w));
      }
    }
  }

  ech_.resize(static_cast<size_t>(cutoff_) + 1);
  basis_.resize(static_cast<size_t>(cutoff_) + 1);
  prov_.resize(static_cast<size_t>(cutoff_) + 1);
  cand_.resize(static_cast<size_t>(cutoff_) + 1);
  cand_index_.resize(static_cast<size_t>(cutoff_) + 1);
  for (int D = 1; D <= cutoff_; ++D) {
    auto& ech = ech_[static_cast<size_t>(D)];
    auto& basis = basis_[static_cast<size_t>(D)];
    auto& prov = prov_[static_cast<size_t>(D)];
    auto& cands = cand_[static_cast<size_t>(D)];
    auto insert = [&](int g, int sub, SparseVec cand) {
      // Reduce by hand so the candidate's coordinates over the final rows
      // are captured: cand = sum(used_i * row_i) + residual, and when the
      // residual survives it becomes row r with cand also carrying
      // lead * row_r.
      SparseVec coords = ech.reduce(cand);
      int row = -1;
      if (!cand.is_zero()) {
        Rational lead = cand.lead_coeff();
        if (!ech.add(cand)) throw std::logic_error("echelon rejected a reduced nonzero row");
        row = ech.rank() - 1;
        coords.add_term(row, lead);
        basis.push_back(ech.row(row));
        prov.push_back({g, sub});
      }
      cand_index_[static_cast<size_t>(D)].emplace(
          (static_cast<int64_t>(g) << 32) | static_cast<uint32_t>(sub), static_cast<int>(cands.size()));
      cands.push_back({g, sub, row, std::move(coords)});
    };
    // Letters of this degree first, so letter symbols are unit rows. The
    // basis vectors are the echelon rows themselves: coordinates produced by
    // lie_coords refer to exactly these vectors.
    for (int g = 0; g < letter_count(); ++g) {
      if (letter_deg_[static_cast<size_t>(g)] != -D) continue;
      insert(g, -1, SparseVec::unit(word_id(-D, {static_cast<uint8_t>(g)})));
      assert(ech.row(ech.rank() - 1).terms().size() == 1);
    }
    for (int g = 0; g < letter_count(); ++g) {
      int rest_deg = -D - letter_deg_[static_cast<size_t>(g)];
      if (rest_deg >= 0 || rest_deg < -cutoff_ || rest_deg == -D) continue;
      SparseVec gv = SparseVec::unit(word_id(letter_deg_[static_cast<size_t>(g)], {static_cast<uint8_t>(g)}));
      const auto& lower = basis_[static_cast<size_t>(-rest_deg)];
      for (size_t j = 0; j < lower.size(); ++j) {
        insert(g, static_cast<int>(j),
               commutator(letter_deg_[static_cast<size_t>(g)], gv, rest_deg, lower[j]));
      }
    }
  }
}

int FreeLieAlgebra::word_count(int degree) const {
  if (degree > 0 || degree < -cutoff_) return 0;
  return static_cast<int>(words_[static_cast<size_t>(depth(degree))].size());
}

int32_t FreeLieAlgebra::word_id(int degree, const std::vector<uint8_t>& letters) const {
  if (degree > 0 || degree < -cutoff_)
    throw CutoffRefusal("word degree " + std::to_string(degree) + " outside cutoff " + std::to_string(cutoff_));
  const auto& idx = word_index_[static_cast<size_t>(depth(degree))];
  auto it = idx.find(pack_word(letters));
  if (it == idx.end()) throw std::logic_error("word not enumerated at its degree");
  return it->second;
}

const std::vector<uint8_t>& FreeLieAlgebra::word(int degree, int32_t id) const {
  return words_[static_cast<size_t>(depth(degree))][static_cast<size_t>(id)];
}

SparseVec FreeLieAlgebra::concat(int du, const SparseVec& u, int dv, const SparseVec& v) const {
  if (du + dv < -cutoff_)
    throw CutoffRefusal("tensor product at degree " + std::to_string(du + dv) +
                        " below cutoff " + std::to_string(cutoff_));
  std::vector<std::pair<SymId, Rational>> raw;
  raw.reserve(u.terms().size() * v.terms().size());
  for (const auto& [iu, cu] : u.terms()) {
    const auto& wu = word(du, iu);
    for (const auto& [iv, cv] : v.terms()) {
      const auto& wv = word(dv, iv);
      std::vector<uint8_t> w;
      w.reserve(wu.size() + wv.size());
      w.insert(w.end(), wu.begin(), wu.end());
      w.insert(w.end(), wv.begin(), wv.end());
      raw.emplace_back(word_id(du + dv, w), cu * cv);
    }
  }
  return SparseVec::collect(std::move(raw));
}

SparseVec FreeLieAlgebra::commutator(int du, const SparseVec& u, int dv, const SparseVec& v) const {
  SparseVec out = concat(du, u, dv, v);
  SparseVec vu = concat(dv, v, du, u);
  if ((du & 1) && (dv & 1)) {
    out += vu;
  } else {
    out -= vu;
  }
  return out;
}

int FreeLieAlgebra::lie_dim(int degree) const {
  if (degree >= 0 || degree < -cutoff_)
    throw CutoffRefusal("Lie stratum at degree " + std::to_string(degree) +
                        " outside cutoff " + std::to_string(cutoff_));
  return static_cast<int>(basis_[static_cast<size_t>(depth(degree))].size());
}

const std::vector<SparseVec>& FreeLieAlgebra::lie_basis(int degree) const {
  if (degree >= 0 || degree < -cutoff_)
    throw CutoffRefusal("Lie stratum at degree " + std::to_string(degree) +
                        " outside cutoff " + std::to_string(cutoff_));
  return basis_[static_cast<size_t>(depth(degree))];
}

std::optional<SparseVec> FreeLieAlgebra::lie_coords(int degree, const SparseVec& tensor) const {
  if (tensor.is_zero()) return SparseVec{};
  if (degree >= 0 || degree < -cutoff_)
    throw CutoffRefusal("Lie coordinates at degree " + std::to_string(degree) +
                        " outside cutoff " + std::to_string(cutoff_));
  const auto& ech = ech_[static_cast<size_t>(depth(degree))];
  return ech.coords(tensor);
}

const std::vector<FreeLieAlgebra::Provenance>& FreeLieAlgebra::provenance(int degree) const {
  return prov_[static_cast<size_t>(depth(degree))];
}

const std::vector<FreeLieAlgebra::Candidate>& FreeLieAlgebra::candidates(int degree) const {
  if (degree >= 0 || degree < -cutoff_)
    throw CutoffRefusal("candidates at degree " + std::to_string(degree) +
                        " outside cutoff " + std::to_string(cutoff_));
  return cand_[static_cast<size_t>(depth(degree))];
}

int FreeLieAlgebra::candidate_of(int degree, int gen, int sub) const {
  const auto& idx = cand_index_[static_cast<size_t>(depth(degree))];
  auto it = idx.find((static_cast<int64_t>(gen) << 32) | static_cast<uint32_t>(sub));
  if (it == idx.end()) throw std::logic_error("no spanning candidate for that pair");
  return it->second;
}

std::vector<long long> tensor_dims_by_depth(const std::vector<int>& letter_degrees, int cutoff) {
  std::vector<long long> dims(static_cast<size_t>(cutoff) + 1, 0);
  dims[0] = 1;
  for (int D = 1; D <= cutoff; ++D) {
    long long total = 0;
    for (int d : letter_degrees) {
      int rest = D + d;
      if (rest >= 0) total += dims[static_cast<size_t>(rest)];
    }
    dims[static_cast<size_t>(D)] = total;
  }
  return dims;
}

std::vector<SparseVec> free_lie_component(const std::vector<int>& letter_degrees,
                                          int target_degree) {
  if (target_degree >= 0) throw std::invalid_argument("target degree must be negative");
  FreeLieAlgebra fl(letter_degrees, -target_degree);
  return fl.lie_basis(target_degree);
}

}  // namespace dgla
