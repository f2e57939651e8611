#ifndef TREEREP_GFQ_HPP
#define TREEREP_GFQ_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace treerep {

// Element of GF(p^m), stored as its index sum(c_i p^i) with c_i the
// coordinates in the power basis 1, x, ..., x^{m-1}.
using Fq = uint32_t;

// Arithmetic context for GF(p^m). The modulus is the lexicographically least
// monic irreducible polynomial of degree m over GF(p), where polynomials are
// ordered by the integer value of their coefficient vector. Multiplication,
// inversion and Frobenius are table-driven for q up to kTableLimit.
class FieldCtx {
public:
  static constexpr uint64_t kTableLimit = 1500;

  FieldCtx(uint64_t p, uint64_t m);

  uint64_t p() const { return p_; }
  uint64_t m() const { return m_; }
  uint64_t q() const { return q_; }
  const std::vector<uint32_t>& modulus() const { return modulus_; }

  Fq zero() const { return 0; }
  Fq one() const { return 1; }
  Fq from_int(int64_t v) const;  // image of an integer (prime subfield)

  Fq add(Fq a, Fq b) const;
  Fq sub(Fq a, Fq b) const;
  Fq neg(Fq a) const;
  Fq mul(Fq a, Fq b) const;
  Fq inv(Fq a) const;  // throws on a == 0
  Fq pow(Fq a, int64_t e) const;
  Fq frobenius(Fq a) const;            // a^p
  Fq frobenius_iter(Fq a, uint64_t k) const;  // a^{p^k}

  // Coordinate access; index <-> coefficient vector of length m.
  std::vector<uint32_t> coords(Fq a) const;
  Fq from_coords(const std::vector<uint32_t>& c) const;

  // Multiplicative generator of GF(q)^x (least index that works).
  Fq generator() const { return gen_; }

private:
  uint64_t p_, m_, q_;
  std::vector<uint32_t> modulus_;
  Fq gen_;
  std::vector<Fq> mul_tab_, inv_tab_, frob_tab_, add_tab_, neg_tab_;
  bool tables_ = false;

  Fq mul_slow(Fq a, Fq b) const;
  Fq add_slow(Fq a, Fq b) const;
  void build_tables();
};

// Deterministic embedding GF(p^m0) -> GF(p^m1) for m0 | m1: sends the power
// basis generator of the small field to the least root of the small modulus
// in the big field.
class SubfieldEmbed {
public:
  SubfieldEmbed(const FieldCtx& small, const FieldCtx& big);
  Fq operator()(Fq a) const { return tab_[a]; }

private:
  std::vector<Fq> tab_;
};

// C(n, k) mod p, digit-wise (Lucas).
uint64_t binom_mod_p(uint64_t n, uint64_t k, uint64_t p);

// nu_p(n!) = (n - s_p(n)) / (p - 1).
uint64_t nu_p_factorial(uint64_t n, uint64_t p);

// nu_p(C(p^k, m)) = k - nu_p(m) for 0 < m <= p^k; throws outside that range.
uint64_t nu_p_binom_prime_power(uint64_t k, uint64_t m, uint64_t p);

uint64_t nu_p(uint64_t n, uint64_t p);  // p-adic valuation, n > 0

// Polynomial over GF(q) reduced so that every variable has degree <= q-1,
// stored densely: coeff[e_0 + q e_1 + ...] for exponents (e_0, ..., e_{n-1}).
struct ReducedPoly {
  uint32_t nvars = 0;
  std::vector<Fq> coeff;
};

// Unique reduced polynomial interpolating a full table on digit tuples
// (mu_0, ..., mu_{n-1}) in F_q^n. The table is indexed like the coefficients:
// value[mu_0 + q mu_1 + ...], where field elements are their indices.
ReducedPoly reduced_interpolate(const FieldCtx& F, uint32_t nvars,
                                const std::vector<Fq>& values);

Fq eval_poly(const FieldCtx& F, const ReducedPoly& P, const std::vector<Fq>& point);

// Evaluate P on the whole grid, inverse of reduced_interpolate.
std::vector<Fq> eval_poly_grid(const FieldCtx& F, const ReducedPoly& P);

}  // namespace treerep

#endif
