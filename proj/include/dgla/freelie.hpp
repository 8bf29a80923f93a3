#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dgla/basis.hpp"
#include "dgla/linalg.hpp"

namespace dgla {

// Free graded Lie algebra L(V) on odd/even letters of negative degree,
// realized inside the tensor algebra T(V). Word spaces are enumerated
// eagerly per degree down to the cutoff (canonical lexicographic order), and
// the Lie stratum of each degree is the span of left-normed brackets
// [g, w] with g a letter and w a lower basis element, reduced to a row
// echelon over tensor-word coordinates.
//
// All per-degree sparse vectors returned or accepted here are keyed by word
// ids of that degree.
class FreeLieAlgebra {
 public:
  FreeLieAlgebra(std::vector<int> letter_degrees, int cutoff);

  int cutoff() const { return cutoff_; }
  int letter_count() const { return static_cast<int>(letter_deg_.size()); }
  int letter_degree(int g) const { return letter_deg_[static_cast<size_t>(g)]; }

  int word_count(int degree) const;
  int32_t word_id(int degree, const std::vector<uint8_t>& letters) const;
  const std::vector<uint8_t>& word(int degree, int32_t id) const;

  // Concatenation product in T(V); no sign (signs live in the bracket and
  // differential formulas).
  SparseVec concat(int du, const SparseVec& u, int dv, const SparseVec& v) const;
  // Graded commutator uv - (-1)^{|u||v|} vu.
  SparseVec commutator(int du, const SparseVec& u, int dv, const SparseVec& v) const;

  int lie_dim(int degree) const;
  const std::vector<SparseVec>& lie_basis(int degree) const;
  // Coordinates of a tensor element over the Lie basis of its degree;
  // nullopt when it does not lie in the Lie stratum.
  std::optional<SparseVec> lie_coords(int degree, const SparseVec& tensor) const;

  struct Provenance {
    int gen;  // letter index
    int sub;  // basis index one level up, or -1 when the row is the letter itself
  };
  const std::vector<Provenance>& provenance(int degree) const;

  // Every spanning candidate [g, w] in enumeration order, with its exact
  // coordinates over the basis rows of its degree (dependent candidates
  // included). These are the brackets of a letter with a lower basis element,
  // read off during the echelon build.
  struct Candidate {
    int gen;
    int sub;        // lower-basis index, or -1 when the candidate is a letter word
    int row;        // basis row created by this candidate, or -1 when dependent
    SparseVec coords;
  };
  const std::vector<Candidate>& candidates(int degree) const;
  // Candidate index for the pair (gen, sub) at the given degree.
  int candidate_of(int degree, int gen, int sub) const;

 private:
  int depth(int degree) const { return -degree; }

  std::vector<int> letter_deg_;
  int cutoff_;
  // indexed by depth 0..cutoff
  std::vector<std::vector<std::vector<uint8_t>>> words_;
  std::vector<std::unordered_map<uint64_t, int32_t>> word_index_;
  std::vector<Echelon> ech_;
  std::vector<std::vector<SparseVec>> basis_;
  std::vector<std::vector<Provenance>> prov_;
  std::vector<std::vector<Candidate>> cand_;
  std::vector<std::unordered_map<int64_t, int>> cand_index_;  // (gen, sub) -> candidate
};

// Composition count of tensor-word spaces from the letter degrees alone
// (used as an independent cross-check of the enumerated word spaces).
std::vector<long long> tensor_dims_by_depth(const std::vector<int>& letter_degrees, int cutoff);

// One-shot basis of the free graded Lie algebra component in the requested
// degree, as tensor-algebra vectors (word coordinates of that degree).
// Refuses when the target lies below the cutoff implied by the request.
std::vector<SparseVec> free_lie_component(const std::vector<int>& letter_degrees,
                                          int target_degree);

}  // namespace dgla
