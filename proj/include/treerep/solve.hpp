#ifndef TREEREP_SOLVE_HPP
#define TREEREP_SOLVE_HPP

#include <optional>
#include <string>

#include "treerep/hecke.hpp"

namespace treerep {

using Coord = std::pair<uint64_t, uint64_t>;  // (vertex key, box index)

// Row-reduced spanning set with canonical residues. Rows are kept in a
// compact sparse form over an append-ordered coordinate table, so reduction
// of large elements is a merge rather than a map walk.
class Reducer {
public:
  explicit Reducer(const GModel& M) : M_(&M) {}

  InducedElement reduce(const InducedElement& x) const;
  bool add(const InducedElement& x);  // false if x was already in the span
  bool contains(const InducedElement& x) const;
  size_t rank() const { return rows_.size(); }

private:
  using CompactVec = std::vector<std::pair<uint32_t, Fq>>;  // sorted by coord

  const GModel* M_;
  std::map<uint64_t, uint32_t> vert_base_;  // vertex key -> coordinate base
  std::vector<uint64_t> vert_of_base_;      // inverse, by block
  std::map<uint32_t, size_t> lead_row_;     // lead coordinate -> row index
  std::vector<CompactVec> rows_;

  uint32_t base_of(uint64_t key) const;   // existing blocks only
  uint32_t intern(uint64_t key);          // register a vertex block
  CompactVec compact(const InducedElement& x) const;  // drops unknown-vertex guard
  CompactVec compact_intern(const InducedElement& x);
  InducedElement expand(const CompactVec& v) const;
  CompactVec reduce_compact(CompactVec v) const;
  void axpy(CompactVec& dst, const CompactVec& src, Fq c) const;
};

// The pro-p Iwahori generator families delta_b, delta_c, delta_{a} with
// parameters pi^i [lambda] over an F_p-basis of the digits, i up to the
// radius budget.
struct GeneratorSet {
  struct Entry {
    char family;  // 'b', 'c' or 'a'
    uint32_t pi_power;
    Fq lambda;
    Mat2Local mat;
  };
  std::vector<Entry> entries;

  static GeneratorSet standard(const GModel& M, uint32_t budget);
  // every digit value, not just a basis; used for soundness cross-checks
  static GeneratorSet enlarged(const GModel& M, uint32_t budget);
};

// Finite-radius subspace standing for "mod Im(T) and further generators".
// The image of T over the ball is handled implicitly by the exact descent
// solver; extra generators are stored as reduced residues, closed under the
// group action as far as the radius budget allows.
class QuotientContext {
public:
  QuotientContext(const GModel& M, const HeckeOps& H, uint32_t budget, bool with_T = true);

  const GModel& model() const { return *M_; }
  uint32_t budget() const { return budget_; }
  bool with_T() const { return with_T_; }

  InducedElement reduce(const InducedElement& x) const;
  bool contains(const InducedElement& x) const;

  // add one element (no orbit closure)
  void add_element(const InducedElement& x);
  // add the span of the G-orbit of x, materialized within the budget
  void add_g_span(const InducedElement& x);

  size_t extra_rank() const { return extras_.rank(); }

private:
  const GModel* M_;
  const HeckeOps* H_;
  uint32_t budget_;
  bool with_T_;
  Reducer extras_;
};

struct InvarianceResult {
  bool invariant = false;
  std::optional<GeneratorSet::Entry> witness;       // failing generator
  InducedElement witness_difference;                // reduced residue
};

InvarianceResult is_invariant(const InducedElement& x, const QuotientContext& ctx,
                              const GeneratorSet& gens);

// I-eigencharacter of the class of x in the quotient; empty if not eigen.
std::optional<ICharacter> eigencharacter(const InducedElement& x, const QuotientContext& ctx);

struct CertifiedSubmodule {
  InducedElement generator;
  uint64_t dimension = 0;
  ICharacter character;
  std::optional<SerreWeight> weight;  // present iff certified irreducible
  bool irreducible = false;
};

// Span of the q+1 Iwahori coset translates of x inside the quotient, with the
// dimension criterion certifying irreducibility.
CertifiedSubmodule kz_closure(const InducedElement& x, const QuotientContext& ctx);

// ---- verification suites ----

struct Prop27Report {
  bool invariants_ok = false;       // A_n^t are invariant in the plain induction
  uint64_t dim_A0 = 0, dim_A1 = 0;  // KZ spans
  bool dims_ok = false;
  bool degenerate_ok = true;  // one dimensional combinations at r in {0, q-1}
  bool ok = false;
};
Prop27Report check_prop27(const GModel& M, uint32_t n);

struct Lemma25Report {
  bool relation_holds = false;  // the weighted sum for 0 < r < q-1
  bool clause_i = false;
  bool clause_ii = false;
  bool ok = false;  // matches the expected pattern for this r
};
Lemma25Report check_lemma25(const GModel& M);

struct GeneralizedTReport {
  bool invariant = false;
  bool character_ok = false;
  uint64_t dimension = 0;
  uint64_t expected_dimension = 0;
  bool certified = false;
  SerreWeight certified_weight;
  bool ok = false;
};
GeneralizedTReport generalized_t_suite(const GModel& M, const HeckeOps& H,
                                       const std::vector<uint32_t>& kvec, uint32_t n,
                                       uint32_t budget);

struct NegativeCaseReport {
  bool not_invariant = false;      // fails invariance as claimed (f > 1)
  bool witness_is_delta_b = false;
  bool shape_found = false;        // residue contains exponent r - p^k + t p^l
  bool f1_control_invariant = false;  // for f = 1 the element is invariant (n >= 2)
  bool ok = false;
};
NegativeCaseReport negative_case_example33(const GModel& M, const HeckeOps& H, uint32_t l,
                                           uint32_t t, uint32_t n, uint32_t budget);

// monomial exponents of the level-n side-0 highest-vector component
std::vector<uint64_t> last_digit_exponents(const GModel& M, const InducedElement& x,
                                           uint32_t n);

}  // namespace treerep

#endif
