#include "treerep/solve.hpp"

#include "treerep/enumerate.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <set>

namespace treerep {

uint32_t Reducer::base_of(uint64_t key) const {
  auto it = vert_base_.find(key);
  return it == vert_base_.end() ? UINT32_MAX : it->second;
}

uint32_t Reducer::intern(uint64_t key) {
  auto it = vert_base_.find(key);
  if (it != vert_base_.end()) return it->second;
  uint32_t base = static_cast<uint32_t>(vert_of_base_.size() * M_->box().dim);
  vert_base_.emplace(key, base);
  vert_of_base_.push_back(key);
  return base;
}

Reducer::CompactVec Reducer::compact(const InducedElement& x) const {
  CompactVec v;
  for (const auto& [k, vals] : x) {
    uint32_t base = base_of(k);
    if (base == UINT32_MAX) continue;
    for (uint64_t i = 0; i < vals.size(); ++i)
      if (vals[i]) v.push_back({base + static_cast<uint32_t>(i), vals[i]});
  }
  std::sort(v.begin(), v.end());
  return v;
}

Reducer::CompactVec Reducer::compact_intern(const InducedElement& x) {
  for (const auto& [k, vals] : x) intern(k);
  return compact(x);
}

InducedElement Reducer::expand(const CompactVec& v) const {
  InducedElement out;
  const uint64_t dim = M_->box().dim;
  for (const auto& [c, val] : v) {
    uint64_t key = vert_of_base_[c / dim];
    auto it = out.find(key);
    if (it == out.end()) it = out.emplace(key, SymVec(dim, 0)).first;
    it->second[c % dim] = val;
  }
  return out;
}

void Reducer::axpy(CompactVec& dst, const CompactVec& src, Fq c) const {
  if (c == 0) return;
  const FieldCtx& F = M_->F();
  CompactVec out;
  out.reserve(dst.size() + src.size());
  size_t i = 0, j = 0;
  while (i < dst.size() || j < src.size()) {
    if (j == src.size() || (i < dst.size() && dst[i].first < src[j].first)) {
      out.push_back(dst[i++]);
    } else if (i == dst.size() || src[j].first < dst[i].first) {
      Fq nv = F.mul(c, src[j].second);
      if (nv) out.push_back({src[j].first, nv});
      ++j;
    } else {
      Fq nv = F.add(dst[i].second, F.mul(c, src[j].second));
      if (nv) out.push_back({dst[i].first, nv});
      ++i;
      ++j;
    }
  }
  dst = std::move(out);
}

Reducer::CompactVec Reducer::reduce_compact(CompactVec v) const {
  const FieldCtx& F = M_->F();
  // rows are fully back-substituted, so one left-to-right sweep suffices
  size_t pos = 0;
  while (pos < v.size()) {
    auto it = lead_row_.find(v[pos].first);
    if (it == lead_row_.end()) {
      ++pos;
      continue;
    }
    axpy(v, rows_[it->second], F.neg(v[pos].second));
    // entries before pos are untouched; the entry at pos vanished
  }
  return v;
}

InducedElement Reducer::reduce(const InducedElement& x) const {
  // coordinates on unregistered vertices cannot meet any row
  InducedElement unknown;
  InducedElement known;
  for (const auto& [k, vals] : x) {
    if (base_of(k) == UINT32_MAX)
      unknown.emplace(k, vals);
    else
      known.emplace(k, vals);
  }
  InducedElement out = expand(reduce_compact(compact(known)));
  M_->add_scaled(out, unknown, 1);
  return out;
}

bool Reducer::contains(const InducedElement& x) const { return M_->is_zero(reduce(x)); }

bool Reducer::add(const InducedElement& x) {
  const FieldCtx& F = M_->F();
  CompactVec v = reduce_compact(compact_intern(x));
  if (v.empty()) return false;
  Fq inv = F.inv(v.front().second);
  if (inv != 1)
    for (auto& [c, val] : v) val = F.mul(val, inv);
  uint32_t lead = v.front().first;
  for (size_t r = 0; r < rows_.size(); ++r) {
    auto it = std::lower_bound(rows_[r].begin(), rows_[r].end(), std::make_pair(lead, Fq(0)),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it != rows_[r].end() && it->first == lead && it->second)
      axpy(rows_[r], v, F.neg(it->second));
  }
  lead_row_.emplace(lead, rows_.size());
  rows_.push_back(std::move(v));
  return true;
}

GeneratorSet GeneratorSet::standard(const GModel& M, uint32_t budget) {
  GeneratorSet gs;
  const LocalRing& R = M.R();
  for (uint32_t i = 0; i <= budget; ++i) {
    for (uint64_t l = 0; l < M.f(); ++l) {
      Fq lam = 1;
      for (uint64_t s = 0; s < l; ++s) lam = static_cast<Fq>(lam * M.p());  // index of x^l
      LElem par = R.mul(R.pi_pow(i), R.teich(lam));
      gs.entries.push_back({'b', i, lam, M.delta_b(par)});
      gs.entries.push_back({'c', i, lam, M.delta_c(par)});
      gs.entries.push_back({'a', i, lam, M.delta_a(par)});
    }
  }
  return gs;
}

GeneratorSet GeneratorSet::enlarged(const GModel& M, uint32_t budget) {
  GeneratorSet gs;
  const LocalRing& R = M.R();
  for (uint32_t i = 0; i <= budget; ++i)
    for (uint64_t lam = 1; lam < M.q(); ++lam) {
      LElem par = R.mul(R.pi_pow(i), R.teich(static_cast<Fq>(lam)));
      gs.entries.push_back({'b', i, static_cast<Fq>(lam), M.delta_b(par)});
      gs.entries.push_back({'c', i, static_cast<Fq>(lam), M.delta_c(par)});
      gs.entries.push_back({'a', i, static_cast<Fq>(lam), M.delta_a(par)});
    }
  return gs;
}

QuotientContext::QuotientContext(const GModel& M, const HeckeOps& H, uint32_t budget,
                                 bool with_T)
    : M_(&M), H_(&H), budget_(budget), with_T_(with_T), extras_(M) {}

InducedElement QuotientContext::reduce(const InducedElement& x) const {
  InducedElement r = with_T_ ? H_->reduce_mod_T(x, budget_) : x;
  return extras_.reduce(std::move(r));
}

bool QuotientContext::contains(const InducedElement& x) const {
  return M_->is_zero(reduce(x));
}

void QuotientContext::add_element(const InducedElement& x) { extras_.add(reduce(x)); }

void QuotientContext::add_g_span(const InducedElement& x) {
  // close under the maximal compact part first (level preserving, so the
  // worklist stays within the levels of x), then translate the closed family
  // by the coset representatives; the result is a spanning set of the full
  // orbit span inside the ball
  const LocalRing& R = M_->R();
  std::vector<Mat2Local> kgens{M_->weyl(), M_->beta()};
  for (uint64_t l = 0; l < M_->f(); ++l) {
    Fq lam = 1;
    for (uint64_t s = 0; s < l; ++s) lam = static_cast<Fq>(lam * M_->p());
    kgens.push_back(M_->lower_unipotent(lam));
    for (uint32_t i = 0; i <= budget_; ++i) {
      LElem par = R.mul(R.pi_pow(i), R.teich(lam));
      kgens.push_back(M_->delta_b(par));
      kgens.push_back(M_->delta_c(par));
      kgens.push_back(M_->delta_a(par));
    }
  }
  Fq g = M_->F().generator();
  kgens.push_back(M_->diag_teich(g, 1));
  kgens.push_back(M_->diag_teich(1, g));

  std::vector<FastAct> fast;
  fast.reserve(kgens.size());
  for (const auto& g2 : kgens) fast.emplace_back(*M_, g2);

  std::vector<InducedElement> base;
  Reducer seen(*M_);
  std::deque<InducedElement> work;
  {
    InducedElement r0 = reduce(x);
    if (M_->is_zero(r0)) return;
    seen.add(r0);
    base.push_back(r0);
    work.push_back(std::move(r0));
  }
  while (!work.empty()) {
    InducedElement cur = std::move(work.front());
    work.pop_front();
    for (auto& fa : fast) {
      InducedElement img = fa.apply(cur);
      if (M_->max_level(img) > budget_) continue;
      InducedElement r = seen.reduce(reduce(img));
      if (M_->is_zero(r)) continue;
      seen.add(r);
      base.push_back(r);
      work.push_back(std::move(r));
    }
  }
  for (const auto& row : base) extras_.add(row);
  uint32_t base_level = 0;
  for (const auto& row : base) base_level = std::max(base_level, M_->max_level(row));
  for (uint32_t n = 1; base_level + n <= budget_; ++n) {
    for (uint32_t side = 0; side <= 1; ++side) {
      for (uint64_t key : M_->level_keys(side, side == 1 ? n - 1 : n)) {
        FastAct rep(*M_, M_->mat_of_vertex(M_->vertex(key)));
        for (const auto& row : base) {
          InducedElement img = rep.apply(row);
          if (M_->max_level(img) > budget_) continue;
          add_element(img);
        }
      }
    }
  }
}

InvarianceResult is_invariant(const InducedElement& x, const QuotientContext& ctx,
                              const GeneratorSet& gens) {
  const GModel& M = ctx.model();
  InvarianceResult res;
  for (const auto& e : gens.entries) {
    InducedElement d = M.act(e.mat, x);
    M.add_scaled(d, x, M.F().neg(1));
    InducedElement r = ctx.reduce(d);
    if (!M.is_zero(r)) {
      res.invariant = false;
      res.witness = e;
      res.witness_difference = std::move(r);
      return res;
    }
  }
  res.invariant = true;
  return res;
}

std::optional<ICharacter> eigencharacter(const InducedElement& x, const QuotientContext& ctx) {
  const GModel& M = ctx.model();
  const FieldCtx& F = M.F();
  InducedElement base = ctx.reduce(x);
  if (M.is_zero(base)) return std::nullopt;
  Fq g = F.generator();
  std::vector<uint64_t> dlog(F.q(), 0);
  {
    Fq cur = 1;
    for (uint64_t i = 0; i + 1 < F.q(); ++i) {
      dlog[cur] = i;
      cur = F.mul(cur, g);
    }
  }
  auto scalar_of = [&](const Mat2Local& m) -> std::optional<Fq> {
    InducedElement img = ctx.reduce(M.act(m, base));
    for (const auto& [k, v] : base)
      for (uint64_t i = 0; i < v.size(); ++i)
        if (v[i]) {
          auto it = img.find(k);
          Fq c = it == img.end() ? 0 : it->second[i];
          if (c == 0) return std::nullopt;
          Fq s = F.mul(c, F.inv(v[i]));
          InducedElement diff = img;
          M.add_scaled(diff, base, F.neg(s));
          if (!M.is_zero(diff)) return std::nullopt;
          return s;
        }
    return std::nullopt;
  };
  auto sa = scalar_of(M.diag_teich(g, 1));
  auto sd = scalar_of(M.diag_teich(1, g));
  if (!sa || !sd || *sa == 0 || *sd == 0) return std::nullopt;
  return ICharacter{dlog[*sa], dlog[*sd]};
}

CertifiedSubmodule kz_closure(const InducedElement& x, const QuotientContext& ctx) {
  const GModel& M = ctx.model();
  auto chi = eigencharacter(x, ctx);
  if (!chi)
    throw std::invalid_argument("kz_closure: element is not an I-eigenvector in the quotient");
  CertifiedSubmodule out;
  out.generator = x;
  out.character = *chi;
  Reducer span(M);
  span.add(ctx.reduce(M.act(M.weyl(), x)));
  for (uint64_t lam = 0; lam < M.q(); ++lam)
    span.add(ctx.reduce(M.act(M.lower_unipotent(static_cast<Fq>(lam)), x)));
  out.dimension = span.rank();
  try {
    SerreWeight w = weight_from_char(M.p(), M.f(), *chi);
    if (w.dim() == out.dimension) {
      out.weight = w;
      out.irreducible = true;
    }
  } catch (const std::domain_error&) {
    // irregular character: the dimension criterion does not apply
  }
  return out;
}

Prop27Report check_prop27(const GModel& M, uint32_t n) {
  Prop27Report rep;
  HeckeOps H(M);
  QuotientContext plain(M, H, M.budget(), false);
  GeneratorSet gens = GeneratorSet::standard(M, M.budget());
  uint64_t r = M.weight().r_param(M.p());
  uint64_t q = M.q();

  InducedElement A0 = build_A0(M, n), A1 = build_A1(M, n);
  rep.invariants_ok =
      is_invariant(A0, plain, gens).invariant && is_invariant(A1, plain, gens).invariant;

  auto span_dim = [&](const InducedElement& x) {
    Reducer span(M);
    span.add(M.act(M.weyl(), x));
    for (uint64_t lam = 0; lam < q; ++lam)
      span.add(M.act(M.lower_unipotent(static_cast<Fq>(lam)), x));
    return span.rank();
  };
  if (r > 0) {
    rep.dim_A0 = span_dim(A0);
    rep.dim_A1 = span_dim(A1);
    rep.dims_ok = rep.dim_A0 == M.weight().dim() && rep.dim_A1 == q + 1;
  } else {
    rep.dims_ok = true;
  }
  if (r == 0 || r == q - 1) {
    InducedElement comb = build_A0(M, n);
    if (n >= 1) M.add_scaled(comb, build_A1(M, n - 1), 1);
    rep.degenerate_ok = span_dim(comb) == 1;
    if (r == q - 1 && n >= 1) {
      Reducer span(M);
      span.add(comb);
      bool eig = !span.add(M.act(M.weyl(), comb));
      for (uint64_t lam = 0; lam < q && eig; ++lam)
        eig = !span.add(M.act(M.lower_unipotent(static_cast<Fq>(lam)), comb));
      rep.degenerate_ok = rep.degenerate_ok && eig;
    }
  }
  rep.ok = rep.invariants_ok && rep.dims_ok && rep.degenerate_ok;
  return rep;
}

Lemma25Report check_lemma25(const GModel& M) {
  Lemma25Report rep;
  const FieldCtx& F = M.F();
  const Box& box = M.box();
  const SerreWeight& wt = M.weight();
  uint64_t r = wt.r_param(M.p()), q = M.q();
  SymVec hv(box.dim, 0);
  hv[0] = 1;
  Fq sign = F.pow(F.neg(1), static_cast<int64_t>(wt.w));
  SymVec wv = sym_apply(F, wt, box, Mat2q{0, 1, 1, 0}, hv);

  SymVec weighted(box.dim, 0), plain(box.dim, 0);
  for (uint64_t lam = 0; lam < q; ++lam) {
    SymVec lv = sym_apply(F, wt, box, Mat2q{1, 0, static_cast<Fq>(lam), 1}, hv);
    Fq wcoef = F.pow(static_cast<Fq>(lam), static_cast<int64_t>(q - 1 - r % (q - 1)));
    for (uint64_t i = 0; i < box.dim; ++i) {
      weighted[i] = F.add(weighted[i], F.mul(wcoef, lv[i]));
      plain[i] = F.add(plain[i], lv[i]);
    }
  }
  auto zero = [](const SymVec& v) {
    return std::all_of(v.begin(), v.end(), [](Fq c) { return c == 0; });
  };
  SymVec rel = weighted, ii = plain;
  for (uint64_t i = 0; i < box.dim; ++i) {
    rel[i] = F.add(rel[i], F.mul(sign, wv[i]));
    ii[i] = F.add(ii[i], F.mul(sign, wv[i]));
  }
  rep.relation_holds = zero(rel);
  rep.clause_i = zero(plain);
  rep.clause_ii = zero(ii);
  if (r == 0)
    rep.ok = rep.clause_i && !rep.clause_ii;
  else if (r == q - 1)
    rep.ok = rep.clause_ii && !rep.clause_i;
  else
    rep.ok = rep.relation_holds && rep.clause_i && !rep.clause_ii;
  return rep;
}

GeneralizedTReport generalized_t_suite(const GModel& M, const HeckeOps& H,
                                       const std::vector<uint32_t>& kvec, uint32_t n,
                                       uint32_t budget) {
  if (M.e() <= 1) throw std::invalid_argument("generalized_t_suite: needs e > 1");
  if (kvec.size() != M.f()) throw std::invalid_argument("generalized_t_suite: bad arity");
  for (uint64_t j = 0; j < M.f(); ++j)
    if (M.weight().r_vec[j] / 2 < kvec[j] + 1)
      throw std::invalid_argument("generalized_t_suite: needs k_j <= floor(r_j/2) - 1");
  GeneralizedTReport rep;
  bool zero_k = std::all_of(kvec.begin(), kvec.end(), [](uint32_t k) { return k == 0; });
  // quotient by the span of the smaller generalized elements; the bounding
  // index is lowered in the last nonzero place
  QuotientContext ctx(M, H, budget, !zero_k);
  if (!zero_k) {
    std::vector<uint32_t> bound = kvec;
    for (uint64_t m = M.f(); m-- > 0;) {
      if (bound[m] > 0) {
        --bound[m];
        break;
      }
    }
    std::vector<uint32_t> idx(M.f(), 0);
    while (true) {
      bool allz = std::all_of(idx.begin(), idx.end(), [](uint32_t v) { return v == 0; });
      if (!allz) ctx.add_g_span(build_t_vec(M, 1, idx));
      uint64_t j = 0;
      while (j < M.f() && idx[j] == bound[j]) idx[j++] = 0;
      if (j == M.f()) break;
      ++idx[j];
    }
  }
  InducedElement t = build_t_vec(M, n, kvec);
  GeneratorSet gens = GeneratorSet::standard(M, budget);
  rep.invariant = is_invariant(t, ctx, gens).invariant;
  ICharacter want = char_of_element(M.F(), M.weight(), ElementKind::t_n_kvec, 0, kvec);
  auto chi = eigencharacter(t, ctx);
  rep.character_ok = chi && *chi == want;
  rep.expected_dimension = 1;
  for (uint64_t j = 0; j < M.f(); ++j)
    rep.expected_dimension *= M.weight().r_vec[j] - 2 * kvec[j] + 1;
  CertifiedSubmodule sub = kz_closure(t, ctx);
  rep.dimension = sub.dimension;
  rep.certified = sub.irreducible && sub.dimension == rep.expected_dimension;
  if (sub.weight) rep.certified_weight = *sub.weight;
  rep.ok = rep.invariant && rep.character_ok && rep.certified;
  return rep;
}

std::vector<uint64_t> last_digit_exponents(const GModel& M, const InducedElement& x,
                                           uint32_t n) {
  const FieldCtx& F = M.F();
  std::map<std::vector<Fq>, std::vector<Fq>> tables;
  uint64_t lo = (uint64_t(n) << 58);
  uint64_t hi = lo + (1ull << 57);
  for (auto it = x.lower_bound(lo); it != x.end() && it->first < hi; ++it) {
    Fq c = it->second[0];
    if (!c) continue;
    TreeVertex v = M.vertex(it->first);
    std::vector<Fq> prefix(v.mu.begin(), v.mu.end() - 1);
    auto& tab = tables[prefix];
    if (tab.empty()) tab.assign(F.q(), 0);
    tab[v.mu.back()] = c;
  }
  std::set<uint64_t> exps;
  for (auto& [prefix, tab] : tables) {
    ReducedPoly P = reduced_interpolate(F, 1, tab);
    for (uint64_t d = 0; d < F.q(); ++d)
      if (P.coeff[d]) exps.insert(d);
  }
  return std::vector<uint64_t>(exps.begin(), exps.end());
}

NegativeCaseReport negative_case_example33(const GModel& M, const HeckeOps& H, uint32_t l,
                                           uint32_t t, uint32_t n, uint32_t budget) {
  NegativeCaseReport rep;
  const uint64_t p = M.p();
  uint64_t r = M.weight().r_param(p);
  uint64_t pl = 1;
  for (uint32_t i = 0; i < l; ++i) pl *= p;
  GeneratorSet gens = GeneratorSet::standard(M, budget);
  QuotientContext ctx(M, H, budget, true);
  for (uint32_t m = 1; m + 1 <= t; ++m) ctx.add_g_span(build_s(M, n, r + m * pl));
  InducedElement x = build_s(M, n, r + t * pl);
  InvarianceResult inv = is_invariant(x, ctx, gens);
  if (M.f() == 1) {
    rep.f1_control_invariant = inv.invariant && n >= 2;
    rep.ok = rep.f1_control_invariant;
    return rep;
  }
  rep.not_invariant = !inv.invariant;
  rep.witness_is_delta_b = inv.witness && inv.witness->family == 'b';
  if (rep.not_invariant) {
    auto exps = last_digit_exponents(M, inv.witness_difference, n);
    for (uint64_t k = 0; k < M.f(); ++k) {
      if (k == l) continue;
      uint64_t pk = 1;
      for (uint64_t i = 0; i < k; ++i) pk *= p;
      uint64_t target = r - pk + t * pl;
      if (std::find(exps.begin(), exps.end(), target) != exps.end()) rep.shape_found = true;
    }
  }
  rep.ok = rep.not_invariant && rep.witness_is_delta_b && rep.shape_found;
  return rep;
}

}  // namespace treerep
