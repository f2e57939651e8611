#ifndef TREEREP_LOCALRING_HPP
#define TREEREP_LOCALRING_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "treerep/gfq.hpp"

namespace treerep {

struct LocalParams {
  uint64_t p = 5;
  uint64_t f = 1;
  uint64_t e = 1;
  uint64_t N = 3;   // precision in pi-adic digits
  Fq eis_unit = 1;  // u with pi^e = p [u], as a residue-field unit
};

// O_F / pi^N realized as R[pi] / (pi^e - p u, pi^N), where R is the degree-f
// unramified ring (Z/p^M)[x]/(Phi) for a fixed monic lift Phi of the residue
// modulus and M = ceil(N/e). Elements carry the number of valid pi-digits so
// precision loss is explicit rather than silent.
class LocalRing {
public:
  // element of R = (Z/p^M)[x]/(Phi): f coefficients mod p^M
  using RElem = std::vector<uint64_t>;

  struct Elem {
    std::vector<RElem> c;  // pi-power coefficients, length e
    uint32_t prec = 0;     // valid pi-digits
  };

  explicit LocalRing(const LocalParams& par);

  const LocalParams& params() const { return par_; }
  const FieldCtx& residue_field() const { return *F_; }
  std::shared_ptr<FieldCtx> field_ptr() const { return F_; }
  uint64_t precision() const { return par_.N; }

  Elem zero() const;
  Elem one() const;
  Elem from_int(int64_t v) const;
  Elem teich(Fq mu) const;                      // canonical Teichmuller lift
  Elem pi_pow(uint64_t k) const;                // pi^k

  Elem add(const Elem& a, const Elem& b) const;
  Elem sub(const Elem& a, const Elem& b) const;
  Elem neg(const Elem& a) const;
  Elem mul(const Elem& a, const Elem& b) const;
  Elem inv(const Elem& a) const;  // throws unless a is a unit
  Elem mul_pi(const Elem& a) const;
  Elem div_pi_exact(const Elem& a) const;  // requires pi | a; drops one digit

  bool is_zero(const Elem& a) const;  // zero through the valid precision
  bool is_unit(const Elem& a) const { return residue(a) != 0; }
  Fq residue(const Elem& a) const;  // image in F_q; needs prec >= 1

  // valuation scanning the valid digits; returns prec if all are zero
  uint32_t val(const Elem& a) const;

  bool eq(const Elem& a, const Elem& b) const;  // through min precision

  std::vector<Fq> digit_expand(const Elem& a) const;        // prec digits
  Elem digit_build(const std::vector<Fq>& digits) const;    // full precision
  Elem truncate(const Elem& a, uint32_t n) const;           // zero digits >= n

private:
  LocalParams par_;
  std::shared_ptr<FieldCtx> F_;
  uint64_t M_;                       // ceil(N/e)
  uint64_t pM_;                      // p^M
  std::vector<uint64_t> mprec_pow_;  // p^{M_i} per pi-coefficient i
  std::vector<uint64_t> phi_;       // lift of the residue modulus, length f+1
  std::vector<RElem> teich_tab_;
  RElem uR_, uR_inv_;  // Teichmuller lift of eis_unit and its inverse

  RElem r_zero() const { return RElem(par_.f, 0); }
  RElem r_one() const;
  RElem r_add(const RElem& a, const RElem& b) const;
  RElem r_sub(const RElem& a, const RElem& b) const;
  RElem r_neg(const RElem& a) const;
  RElem r_mul(const RElem& a, const RElem& b) const;
  RElem r_inv(const RElem& a) const;
  RElem r_scale(const RElem& a, uint64_t s) const;
  Fq r_residue(const RElem& a) const;
  bool r_zero_mod(const RElem& a, uint64_t mod) const;
  void canon(Elem& x) const;

  friend class Mat2Ops;
};

using LElem = LocalRing::Elem;

// 2x2 matrix over the truncated local ring with a separate central pi-power.
struct Mat2Local {
  LElem a, b, c, d;  // row major: (a b; c d)
  int64_t central = 0;
};

Mat2Local mat_mul(const LocalRing& R, const Mat2Local& x, const Mat2Local& y);
Mat2Local mat_identity(const LocalRing& R);

// carry of Teichmuller addition: the unique c with
// [a] + [b] = [a+b] + pi^e [c] (mod pi^{e+1})
Fq carry_P0(const LocalRing& R, Fq a, Fq b);

// convenience wrapper building a small ring at precision e+1
Fq carry_P0(uint64_t p, uint64_t f, uint64_t e, Fq a, Fq b);

}  // namespace treerep

#endif
