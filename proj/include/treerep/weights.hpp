#ifndef TREEREP_WEIGHTS_HPP
#define TREEREP_WEIGHTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treerep/gfq.hpp"

namespace treerep {

// Irreducible weight det^w (x) Sym^{r_0} (x) ... (x) Sym^{r_{f-1}}, with
// 0 <= r_j <= p-1 and w taken mod q-1.
struct SerreWeight {
  std::vector<uint32_t> r_vec;
  uint64_t w = 0;

  uint64_t f() const { return r_vec.size(); }
  uint64_t dim() const {
    uint64_t d = 1;
    for (auto r : r_vec) d *= r + 1;
    return d;
  }
  uint64_t r_param(uint64_t p) const {  // sum r_j p^j
    uint64_t r = 0, pw = 1;
    for (auto rj : r_vec) {
      r += rj * pw;
      pw *= p;
    }
    return r;
  }
  bool operator==(const SerreWeight& o) const = default;
};

// Multi-index box 0 <= i_j <= r_j with base-p exponent bookkeeping.
struct Box {
  std::vector<uint32_t> r;
  uint64_t p = 0;
  uint64_t dim = 1;
  std::vector<uint64_t> stride;    // flat index strides
  std::vector<uint64_t> exponent;  // flat -> sum i_j p^j

  Box() = default;
  Box(const std::vector<uint32_t>& r_vec, uint64_t p_);
  std::vector<uint32_t> unflatten(uint64_t flat) const;
  uint64_t flatten(const std::vector<uint32_t>& idx) const;
  uint64_t top() const { return dim - 1; }  // index (r_0, ..., r_{f-1})
};

// Dense coefficient vector over a Box (the representation space V_sigma).
using SymVec = std::vector<Fq>;

// 2x2 matrix over F_q
struct Mat2q {
  Fq a = 0, b = 0, c = 0, d = 0;
};

// Matrix of sigma(g) on the box basis; out[k*dim + i] is the (k, i) entry.
std::vector<Fq> sym_matrix(const FieldCtx& F, const SerreWeight& wt, const Box& box,
                           const Mat2q& g);

SymVec sym_apply(const FieldCtx& F, const SerreWeight& wt, const Box& box, const Mat2q& g,
                 const SymVec& v);

// Character of the Iwahori torus: diag(a, d) |-> a^{a_exp} d^{d_exp},
// exponents mod q-1.
struct ICharacter {
  uint64_t a_exp = 0, d_exp = 0;
  bool operator==(const ICharacter& o) const = default;
};

// Character of the basis invariants: for an element of the shape
// sum_mu (monomial of total degree D in the digits) g (x) e_i with i the
// base-p value of the box index, the torus acts by a^{r+w-k}d^{w+k} with
// k = D + i.
ICharacter char_of_invariant(const FieldCtx& F, const SerreWeight& wt, uint64_t k_total);

enum class ElementKind { s_n_k, t_n_k, t_n_kvec, A_n_0, A_n_1 };

ICharacter char_of_element(const FieldCtx& F, const SerreWeight& wt, ElementKind kind,
                           uint64_t k, const std::vector<uint32_t>& kvec = {});

// beta conjugation swaps the torus entries.
inline ICharacter char_swap(const ICharacter& c) { return ICharacter{c.d_exp, c.a_exp}; }

// Recover the weight from the highest-vector character in the regular case
// (all base-p digits of a_exp - d_exp in [1, p-2]); throws otherwise.
SerreWeight weight_from_char(uint64_t p, uint64_t f, const ICharacter& chi);

// digits of the canonical representative of r mod q-1 in [0, q-2]
std::vector<uint32_t> param_digits(uint64_t p, uint64_t f, uint64_t r);

// A_j(r) = r - 2(r_j + 1) p^j mod q-1, with r_j read from the canonical
// representative of the argument.
uint64_t apply_A(uint64_t p, uint64_t f, uint32_t j, uint64_t r);

// determinant bookkeeping along an A_j application: w increases by (r_j+1)p^j
uint64_t apply_A_w(uint64_t p, uint64_t f, uint32_t j, uint64_t r, uint64_t w);

// closed form for the parameter and twist of sigma_J (unramified case)
struct WeightParam {
  uint64_t r = 0, w = 0;
};
WeightParam r_J_wJ(uint64_t p, uint64_t f, const std::vector<uint32_t>& J,
                   const SerreWeight& seed);

// operator string for sigma_J, first-acting letter first
std::vector<uint32_t> schedule_aJ(uint64_t f, const std::vector<uint32_t>& J);

struct LabeledWeight {
  SerreWeight weight;
  std::string label;            // subset J, plus (delta_0, delta_1) when ramified
  std::vector<uint32_t> J;
  std::vector<uint32_t> delta;  // empty in the unramified case
};

// W(rho-bar) parametrized by a seed weight: 2^f weights for e = 1 via the
// closed form, 4e^2 weights for f = 2, e < min(r_j)/2 via the ramified table.
std::vector<LabeledWeight> weight_set(const SerreWeight& seed, uint64_t p, uint64_t e,
                                      uint64_t f);

std::string subset_label(const std::vector<uint32_t>& J);

}  // namespace treerep

#endif
