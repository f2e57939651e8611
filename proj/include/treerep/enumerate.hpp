#ifndef TREEREP_ENUMERATE_HPP
#define TREEREP_ENUMERATE_HPP

#include "treerep/solve.hpp"

namespace treerep {

// Basis of the invariant space of the quotient by the image of T, lifted to
// the ball of the given radius. Representatives are canonical (reduced by the
// descent solver) and split into torus eigenvectors.
struct EnumeratedInvariants {
  uint32_t budget = 0;
  bool hypothesis_ok = true;  // 2 < r_j < p - 3
  std::vector<InducedElement> basis;
  std::vector<ICharacter> characters;
};

EnumeratedInvariants enumerate_invariants(const GModel& M, const HeckeOps& H, uint32_t budget);

// The closed-form eigenbasis truncated at the budget, for comparison against
// the solver output.
struct PredictedInvariant {
  std::string label;
  InducedElement element;
  ICharacter character;
};

std::vector<PredictedInvariant> predicted_invariant_basis(const GModel& M, const HeckeOps& H,
                                                          uint32_t budget);

uint64_t predicted_invariant_count(uint64_t e, uint64_t f, uint32_t budget);

// Memoized vertex action with a cache of value-transform matrices; the
// workhorse behind the enumerator and the staged quotient runs.
class FastAct {
public:
  FastAct(const GModel& M, Mat2Local g);

  InducedElement apply(const InducedElement& x);
  std::pair<uint64_t, const std::vector<Fq>*> vertex_image(uint64_t key);

private:
  const GModel& M_;
  Mat2Local g_;
  std::map<uint64_t, std::pair<uint64_t, uint64_t>> vmap_;  // key -> (key', matrix id)
  std::map<uint64_t, uint64_t> matid_;                      // packed kbar -> matrix id
  std::vector<std::vector<Fq>> mats_;
};

}  // namespace treerep

#endif
