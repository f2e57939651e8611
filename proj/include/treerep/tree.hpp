#ifndef TREEREP_TREE_HPP
#define TREEREP_TREE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "treerep/localring.hpp"
#include "treerep/weights.hpp"

namespace treerep {

// Vertex of the Bruhat-Tits tree model: side 0 is the coset of
// (pi^n [mu]_n; 0 1), side 1 the coset of (1 0; pi [mu]_n pi^{n+1}).
// Keys pack (level, side, digits) so that the natural integer order is
// (level, side, digits lexicographic with mu_0 first).
struct TreeVertex {
  uint32_t side = 0;
  uint32_t level = 0;
  std::vector<Fq> mu;
};

struct CosetForm {
  TreeVertex vertex;
  Mat2q kbar;       // KZ part mod pi, in GL_2(F_q)
  int64_t central;  // central pi-power
};

// Finitely supported map from tree vertices to V_sigma.
using InducedElement = std::map<uint64_t, SymVec>;

// Shared computation context for one weight: field, local ring, box, vertex
// codecs and the coset machinery.
class GModel {
public:
  GModel(const SerreWeight& wt, uint64_t p, uint64_t e, uint32_t budget,
         Fq eis_unit = 1, uint32_t extra_prec = 4);
  // share an existing ring (and its residue field) across weights
  GModel(const SerreWeight& wt, std::shared_ptr<LocalRing> ring, uint32_t budget);

  const FieldCtx& F() const { return *F_; }
  const LocalRing& R() const { return *R_; }
  std::shared_ptr<LocalRing> R_ptr() const { return R_; }
  const SerreWeight& weight() const { return wt_; }
  const Box& box() const { return box_; }
  uint64_t p() const { return p_; }
  uint64_t q() const { return F_->q(); }
  uint64_t f() const { return wt_.f(); }
  uint64_t e() const { return e_; }
  uint32_t budget() const { return budget_; }

  uint64_t key(const TreeVertex& v) const;
  TreeVertex vertex(uint64_t key) const;
  uint64_t key(uint32_t side, uint32_t level, const std::vector<Fq>& mu) const;

  Mat2Local mat_of_vertex(const TreeVertex& v) const;
  Mat2Local mat_of_vertex(uint64_t key) const { return mat_of_vertex(vertex(key)); }

  CosetForm coset_normal_form(const Mat2Local& M) const;

  // group elements
  Mat2Local alpha() const;
  Mat2Local beta() const;
  Mat2Local weyl() const;
  Mat2Local diag_teich(Fq a, Fq d) const;
  Mat2Local delta_b(const LElem& b) const;  // (1 b; 0 1)
  Mat2Local delta_c(const LElem& c) const;  // (1 0; pi c 1)
  Mat2Local delta_a(const LElem& a) const;  // (pi a + 1 0; 0 1)
  Mat2Local lower_unipotent(Fq lambda) const;  // (1 0; [lambda] 1)

  // left translation action g.(h (x) v) = (gh) (x) sigma-part
  InducedElement act(const Mat2Local& g, const InducedElement& x) const;

  // single vertex action with the value transform factored out
  CosetForm act_vertex(const Mat2Local& g, uint64_t key) const;

  // sigma(kbar) on a value
  SymVec transform(const Mat2q& kbar, const SymVec& v) const;

  uint32_t max_level(const InducedElement& x) const;

  // element arithmetic
  void add_scaled(InducedElement& dst, const InducedElement& src, Fq scale) const;
  bool is_zero(const InducedElement& x) const;
  bool equal(const InducedElement& x, const InducedElement& y) const;

  std::vector<uint64_t> level_keys(uint32_t side, uint32_t level) const;  // digits lex

private:
  std::shared_ptr<FieldCtx> F_;
  std::shared_ptr<LocalRing> R_;
  SerreWeight wt_;
  Box box_;
  uint64_t p_, e_;
  uint32_t budget_;
  uint32_t digit_bits_;

  friend class HeckeOps;
};

}  // namespace treerep

#endif
