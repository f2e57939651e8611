#ifndef TREEREP_HECKE_HPP
#define TREEREP_HECKE_HPP

#include <optional>

#include "treerep/tree.hpp"

namespace treerep {

// Radius-local spherical operator and the solver for membership in its image.
// On a vertex of level n the operator spreads outward to the q children with
// values proportional to the highest (side 0) or lowest (side 1) vector, and
// inward to the parent. Image membership over a ball is decided by solving
// per-parent Vandermonde systems from the outermost level in.
class HeckeOps {
public:
  explicit HeckeOps(const GModel& M);

  const GModel& model() const { return M_; }

  InducedElement apply_T(const InducedElement& x) const;

  // sum over lambda of g^0_{1,lambda} . x  (one propagation step)
  InducedElement propagate(const InducedElement& x) const;

  // canonical representative of y modulo T(elements supported on B_{budget-1});
  // exact because the outward part of T is injective level by level.
  InducedElement reduce_mod_T(const InducedElement& y, uint32_t budget,
                              InducedElement* preimage = nullptr) const;

  bool in_T_image(const InducedElement& y, uint32_t budget,
                  InducedElement* preimage = nullptr) const;

  // outward coefficient functional: value the child at [lambda] receives
  Fq out_coeff(uint32_t side, const SymVec& v, Fq lambda) const;

  // inward value produced by a vertex with the given last digit
  SymVec inward_value(uint32_t side, Fq last_digit, Fq coeff) const;

  const std::vector<Fq>& V(uint32_t side) const { return side ? V1_ : V0_; }
  const std::vector<Fq>& S(uint32_t side) const { return side ? S1_ : S0_; }

private:
  const GModel& M_;
  std::vector<Fq> V0_, V1_;      // q x dim outward matrices
  std::vector<Fq> S0_, S1_;      // dim x q left inverses
  std::vector<SymVec> inw0_, inw1_;  // inward values per last digit
};

// elements from the basic families
InducedElement build_s(const GModel& M, uint32_t n, uint64_t k);
InducedElement build_t(const GModel& M, uint32_t n, uint32_t k);
InducedElement build_t_vec(const GModel& M, uint32_t n, const std::vector<uint32_t>& kvec);
InducedElement build_A0(const GModel& M, uint32_t n);
InducedElement build_A1(const GModel& M, uint32_t n);
InducedElement build_monomial(const GModel& M, uint32_t side, uint32_t n,
                              const std::vector<uint64_t>& digit_exps, uint64_t value_index,
                              Fq coeff = 1);

}  // namespace treerep

#endif
