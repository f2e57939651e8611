#ifndef TREEREP_QUOTIENT_HPP
#define TREEREP_QUOTIENT_HPP

#include "treerep/enumerate.hpp"

namespace treerep {

// K-equivariant transport of a certified irreducible embedding: the source
// weight maps into the ambient quotient by sending the highest vector to the
// generator and extending along coset translates.
class PhiMap {
public:
  PhiMap(const GModel& ambient, const QuotientContext& ctx, const SerreWeight& source,
         const InducedElement& s);

  const SerreWeight& source() const { return src_; }
  const Box& source_box() const { return src_box_; }

  // coefficients over the q+1 coset translates of the highest vector
  std::vector<Fq> solve(const SymVec& v) const;

  // image of g (x) v under the transport
  InducedElement apply(const Mat2Local& g, const SymVec& v);

  // image of T(g (x) v) computed on the source side, then transported
  InducedElement apply_T_image(const GModel& src_model, const HeckeOps& src_H,
                               const Mat2Local& g, const SymVec& v);

private:
  const GModel& M_;
  SerreWeight src_;
  Box src_box_;
  std::vector<Mat2Local> coset_reps_;            // w, then the lower unipotents
  std::vector<SymVec> translates_;               // their action on the highest vector
  std::vector<InducedElement> translate_images_; // their action on the generator
  std::vector<Fq> psolve_;                       // (q+1) x dim' right solve matrix
  std::map<uint64_t, FastAct> act_cache_;        // transports keyed by vertex
};

// one step of the digit chain: sum over mu of mu^D g^0_{1,mu} . s
InducedElement transport_next(const GModel& M, const InducedElement& s, uint64_t D);

struct LedgerRow {
  std::string path;
  uint32_t stage = 0;          // 0 for the seed embedding of the path
  int32_t letter = -1;         // digit place acted on; -1 for seeds
  WeightParam predicted;       // parameter and twist
  SerreWeight predicted_weight;
  ICharacter character;        // from the accumulated digit monomial
  uint32_t level = 0;          // support level of the generator
  bool materialized = false;
  bool char_verified = false;  // explicit torus action in the quotient
  bool survived = false;
  bool reused = false;
  uint64_t kz_dimension = 0;
  bool kz_certified = false;
  bool in_weight_set = false;
};

struct SocleEntry {
  std::string path;
  SerreWeight weight;
};

struct StagedRun {
  SerreWeight seed;
  uint64_t p = 0, e = 1, f = 1;
  uint32_t budget = 0;
  std::vector<LabeledWeight> expected;
  std::vector<LedgerRow> ledger;
  std::vector<SocleEntry> socle;  // embeddings surviving the accumulated quotient
  std::vector<std::string> notes;
  bool ok = true;
};

struct RunOptions {
  uint32_t budget = 2;
  uint32_t cleanup_iterations = 1;
  uint64_t kz_coord_limit = 600000;   // run the span certificate below this size
  uint64_t stage_gen_limit = 256;     // cap on image generators added per stage
  // weights dropped from the allowed set during cleanup (test hook for the
  // removal branch); labels as produced by the run
  std::vector<std::string> drop_from_allowed;
};

StagedRun run_unramified(const SerreWeight& seed, uint64_t p, const RunOptions& opt);
StagedRun run_f2_ramified(const SerreWeight& seed, uint64_t p, uint64_t e,
                          const RunOptions& opt);

// The walk presentation of the subset J: weight states visited while steering
// the seed parameter to sigma_J, listed when they fall outside the expected
// set. Wrapping top-place steps split into their two bookkeeping states; a
// positive leftover is carried and cancels against the final borrow.
std::vector<SerreWeight> process_intermediates(uint64_t p, uint64_t f, const SerreWeight& seed,
                                               const std::vector<uint32_t>& J);

}  // namespace treerep

#endif
