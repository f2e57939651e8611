#include "doctest.h"

#include <set>

#include "treerep/enumerate.hpp"

using namespace treerep;

namespace {

// mutual containment of two spanning families modulo the image of T
bool same_span(const GModel& M, const HeckeOps& H, uint32_t budget,
               const std::vector<InducedElement>& a, const std::vector<InducedElement>& b) {
  Reducer ra(M), rb(M);
  for (const auto& x : a) ra.add(H.reduce_mod_T(x, budget));
  for (const auto& x : b) rb.add(H.reduce_mod_T(x, budget));
  if (ra.rank() != rb.rank()) return false;
  for (const auto& x : a)
    if (!rb.contains(H.reduce_mod_T(x, budget))) return false;
  for (const auto& x : b)
    if (!ra.contains(H.reduce_mod_T(x, budget))) return false;
  return true;
}

std::multiset<std::pair<uint64_t, uint64_t>> char_multiset(const std::vector<ICharacter>& cs) {
  std::multiset<std::pair<uint64_t, uint64_t>> out;
  for (const auto& c : cs) out.insert({c.a_exp, c.d_exp});
  return out;
}

}  // namespace

TEST_CASE("unramified prime field case has only the two constants") {
  GModel M(SerreWeight{{3}, 0}, 7, 1, 2);
  HeckeOps H(M);
  EnumeratedInvariants inv = enumerate_invariants(M, H, 2);
  CHECK(inv.hypothesis_ok);
  CHECK(inv.basis.size() == 2);
  CHECK(predicted_invariant_count(1, 1, 2) == 2);
  auto pred = predicted_invariant_basis(M, H, 2);
  std::vector<InducedElement> pe;
  std::vector<ICharacter> pc;
  for (auto& p : pred) {
    pe.push_back(p.element);
    pc.push_back(p.character);
  }
  CHECK(same_span(M, H, 2, inv.basis, pe));
  CHECK(char_multiset(inv.characters) == char_multiset(pc));
}

TEST_CASE("ramified prime field case") {
  GModel M(SerreWeight{{3}, 0}, 7, 2, 2);
  HeckeOps H(M);
  EnumeratedInvariants inv = enumerate_invariants(M, H, 2);
  // 2 constants + s from level 2 + t from levels 1 and 2: 2 + 2 + 4
  CHECK(inv.basis.size() == 8);
  CHECK(predicted_invariant_count(2, 1, 2) == 8);
  auto pred = predicted_invariant_basis(M, H, 2);
  REQUIRE(pred.size() == 8);
  std::vector<InducedElement> pe;
  std::vector<ICharacter> pc;
  for (auto& p : pred) {
    pe.push_back(p.element);
    pc.push_back(p.character);
  }
  CHECK(same_span(M, H, 2, inv.basis, pe));
  CHECK(char_multiset(inv.characters) == char_multiset(pc));
  // at radius 1 only the constants and the level-one t pair
  EnumeratedInvariants inv1 = enumerate_invariants(M, H, 1);
  CHECK(inv1.basis.size() == 4);
}

TEST_CASE("every enumerated element passes the invariance test") {
  GModel M(SerreWeight{{3}, 0}, 7, 2, 2);
  HeckeOps H(M);
  EnumeratedInvariants inv = enumerate_invariants(M, H, 2);
  QuotientContext ctx(M, H, 2, true);
  GeneratorSet gens = GeneratorSet::standard(M, 2);
  for (const auto& x : inv.basis) {
    CHECK(is_invariant(x, ctx, gens).invariant);
    CHECK_FALSE(M.is_zero(ctx.reduce(x)));
  }
}

TEST_CASE("dense kernel oracle confirms the dimension") {
  GModel M(SerreWeight{{3}, 0}, 7, 2, 2);
  HeckeOps H(M);
  const FieldCtx& F = M.F();
  std::vector<InducedElement> unit;
  for (uint32_t lvl = 0; lvl <= 2; ++lvl)
    for (uint32_t side = 0; side <= 1; ++side)
      for (uint64_t k : M.level_keys(side, lvl))
        for (uint64_t i = 0; i < M.box().dim; ++i) {
          SymVec v(M.box().dim, 0);
          v[i] = 1;
          unit.push_back(InducedElement{{k, v}});
        }
  // span of T over the radius-1 ball
  Reducer tspan(M);
  uint64_t tdim = 0;
  for (uint32_t lvl = 0; lvl <= 1; ++lvl)
    for (uint32_t side = 0; side <= 1; ++side)
      for (uint64_t k : M.level_keys(side, lvl))
        for (uint64_t i = 0; i < M.box().dim; ++i) {
          SymVec v(M.box().dim, 0);
          v[i] = 1;
          if (tspan.add(H.apply_T(InducedElement{{k, v}}))) ++tdim;
        }
  GeneratorSet gens = GeneratorSet::standard(M, 2);
  std::vector<InducedElement> cands = unit;
  for (const auto& e : gens.entries) {
    FastAct fa(M, e.mat);
    struct Row {
      InducedElement v;
      Coord lead;
      std::vector<Fq> comb;
    };
    std::vector<Row> pivots;
    std::vector<InducedElement> next;
    for (size_t ci = 0; ci < cands.size(); ++ci) {
      InducedElement v = fa.apply(cands[ci]);
      M.add_scaled(v, cands[ci], F.neg(1));
      v = tspan.reduce(v);
      std::vector<Fq> comb(cands.size(), 0);
      comb[ci] = 1;
      for (const auto& piv : pivots) {
        auto it = v.find(piv.lead.first);
        Fq c = it == v.end() ? 0 : it->second[piv.lead.second];
        if (!c) continue;
        M.add_scaled(v, piv.v, F.neg(c));
        for (size_t j = 0; j < cands.size(); ++j)
          comb[j] = F.sub(comb[j], F.mul(c, piv.comb[j]));
      }
      if (M.is_zero(v)) {
        InducedElement kv;
        for (size_t j = 0; j < cands.size(); ++j) M.add_scaled(kv, cands[j], comb[j]);
        if (!M.is_zero(kv)) next.push_back(std::move(kv));
      } else {
        Coord lead{0, 0};
        Fq s = 0;
        for (const auto& [k, vv] : v) {
          for (uint64_t i = 0; i < vv.size(); ++i)
            if (vv[i]) {
              lead = {k, i};
              s = F.inv(vv[i]);
              break;
            }
          if (s) break;
        }
        InducedElement nv;
        M.add_scaled(nv, v, s);
        for (auto& c : comb) c = F.mul(c, s);
        pivots.push_back(Row{std::move(nv), lead, std::move(comb)});
      }
    }
    cands = std::move(next);
  }
  // oracle kernel = image span + the new invariants
  Reducer sol(M);
  for (const auto& x : cands) sol.add(x);
  CHECK(sol.rank() == tdim + 8);
}

TEST_CASE("unramified degree two field at radius one") {
  GModel M(SerreWeight{{3, 3}, 0}, 7, 1, 1);
  HeckeOps H(M);
  EnumeratedInvariants inv = enumerate_invariants(M, H, 1);
  CHECK(inv.basis.size() == 6);  // 2 constants + the 4 level-one s elements
  CHECK(predicted_invariant_count(1, 2, 1) == 6);
  auto pred = predicted_invariant_basis(M, H, 1);
  std::vector<InducedElement> pe;
  std::vector<ICharacter> pc;
  for (auto& p : pred) {
    pe.push_back(p.element);
    pc.push_back(p.character);
  }
  CHECK(same_span(M, H, 1, inv.basis, pe));
  CHECK(char_multiset(inv.characters) == char_multiset(pc));
}

TEST_CASE("hypothesis flag") {
  GModel M(SerreWeight{{1}, 0}, 7, 1, 1);
  HeckeOps H(M);
  EnumeratedInvariants inv = enumerate_invariants(M, H, 1);
  CHECK_FALSE(inv.hypothesis_ok);
}
