#include "treerep/quotient.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace treerep {

PhiMap::PhiMap(const GModel& ambient, const QuotientContext& ctx, const SerreWeight& source,
               const InducedElement& s)
    : M_(ambient), src_(source), src_box_(source.r_vec, ambient.p()) {
  CertifiedSubmodule cert = kz_closure(s, ctx);
  if (!cert.irreducible || !cert.weight || !(*cert.weight == source))
    throw std::invalid_argument("PhiMap: generator is not certified for the source weight");
  const FieldCtx& F = M_.F();
  const uint64_t q = M_.q(), dim = src_box_.dim;
  coset_reps_.push_back(M_.weyl());
  for (uint64_t lam = 0; lam < q; ++lam)
    coset_reps_.push_back(M_.lower_unipotent(static_cast<Fq>(lam)));
  SymVec hv(dim, 0);
  hv[0] = 1;
  translates_.reserve(q + 1);
  translate_images_.reserve(q + 1);
  for (const auto& rep : coset_reps_) {
    CosetForm nf = M_.coset_normal_form(rep);
    translates_.push_back(sym_apply(F, src_, src_box_, nf.kbar, hv));
    translate_images_.push_back(M_.act(rep, s));
  }
  // right solve: coefficients over the translates for an arbitrary source
  // vector, from one row reduction of the translate matrix
  const uint64_t cols = q + 1;
  std::vector<Fq> A(dim * cols), track(dim * dim, 0);
  for (uint64_t c = 0; c < cols; ++c)
    for (uint64_t r = 0; r < dim; ++r) A[r * cols + c] = translates_[c][r];
  for (uint64_t r = 0; r < dim; ++r) track[r * dim + r] = 1;
  std::vector<int64_t> pivot_col(dim, -1);
  uint64_t rank = 0;
  for (uint64_t c = 0; c < cols && rank < dim; ++c) {
    uint64_t pr = rank;
    while (pr < dim && A[pr * cols + c] == 0) ++pr;
    if (pr == dim) continue;
    for (uint64_t j = 0; j < cols; ++j) std::swap(A[pr * cols + j], A[rank * cols + j]);
    for (uint64_t j = 0; j < dim; ++j) std::swap(track[pr * dim + j], track[rank * dim + j]);
    Fq sc = F.inv(A[rank * cols + c]);
    for (uint64_t j = 0; j < cols; ++j) A[rank * cols + j] = F.mul(A[rank * cols + j], sc);
    for (uint64_t j = 0; j < dim; ++j) track[rank * dim + j] = F.mul(track[rank * dim + j], sc);
    for (uint64_t r = 0; r < dim; ++r) {
      if (r == rank) continue;
      Fq f2 = A[r * cols + c];
      if (!f2) continue;
      for (uint64_t j = 0; j < cols; ++j)
        A[r * cols + j] = F.sub(A[r * cols + j], F.mul(f2, A[rank * cols + j]));
      for (uint64_t j = 0; j < dim; ++j)
        track[r * dim + j] = F.sub(track[r * dim + j], F.mul(f2, track[rank * dim + j]));
    }
    pivot_col[rank] = static_cast<int64_t>(c);
    ++rank;
  }
  if (rank != dim) throw std::logic_error("PhiMap: translates do not span the source weight");
  psolve_.assign(cols * dim, 0);
  for (uint64_t r = 0; r < dim; ++r)
    for (uint64_t j = 0; j < dim; ++j)
      psolve_[static_cast<uint64_t>(pivot_col[r]) * dim + j] = track[r * dim + j];
}

std::vector<Fq> PhiMap::solve(const SymVec& v) const {
  const FieldCtx& F = M_.F();
  const uint64_t cols = M_.q() + 1, dim = src_box_.dim;
  std::vector<Fq> c(cols, 0);
  for (uint64_t i = 0; i < cols; ++i) {
    Fq acc = 0;
    for (uint64_t j = 0; j < dim; ++j)
      if (v[j] && psolve_[i * dim + j]) acc = F.add(acc, F.mul(psolve_[i * dim + j], v[j]));
    c[i] = acc;
  }
  return c;
}

InducedElement PhiMap::apply(const Mat2Local& g, const SymVec& v) {
  std::vector<Fq> c = solve(v);
  InducedElement comb;
  for (uint64_t i = 0; i < c.size(); ++i)
    if (c[i]) M_.add_scaled(comb, translate_images_[i], c[i]);
  return M_.act(g, comb);
}

InducedElement PhiMap::apply_T_image(const GModel& src_model, const HeckeOps& src_H,
                                     const Mat2Local& g, const SymVec& v) {
  InducedElement single;
  {
    CosetForm nf = src_model.coset_normal_form(g);
    SymVec tv = sym_apply(src_model.F(), src_, src_box_, nf.kbar, v);
    single.emplace(src_model.key(nf.vertex), std::move(tv));
  }
  InducedElement ty = src_H.apply_T(single);
  InducedElement out;
  for (const auto& [k, u] : ty) {
    std::vector<Fq> c = solve(u);
    InducedElement comb;
    for (uint64_t i = 0; i < c.size(); ++i)
      if (c[i]) M_.add_scaled(comb, translate_images_[i], c[i]);
    auto it = act_cache_.find(k);
    if (it == act_cache_.end())
      it = act_cache_.emplace(k, FastAct(M_, M_.mat_of_vertex(M_.vertex(k)))).first;
    M_.add_scaled(out, it->second.apply(comb), 1);
  }
  return out;
}

InducedElement transport_next(const GModel& M, const InducedElement& s, uint64_t D) {
  const FieldCtx& F = M.F();
  InducedElement out;
  for (uint64_t mu = 0; mu < M.q(); ++mu) {
    Fq c = F.pow(static_cast<Fq>(mu), static_cast<int64_t>(D));
    if (!c) continue;
    Mat2Local g = M.mat_of_vertex(TreeVertex{0, 1, {static_cast<Fq>(mu)}});
    M.add_scaled(out, M.act(g, s), c);
  }
  return out;
}

namespace {

struct Embedding {
  InducedElement element;
  bool materialized = false;
  uint32_t level = 0;
  uint64_t ktot = 0;  // accumulated digit exponent plus the value index
  std::shared_ptr<PhiMap> phi;
  SerreWeight weight;
  std::string path;
};

struct PathWalk {
  std::string label;
  std::vector<std::string> stage_labels;  // one per stage, seed first
  std::vector<uint32_t> letters;
  size_t pos = 0;
  uint64_t r = 0, w = 0;
  Embedding cur;
};

struct RunState {
  const GModel* M = nullptr;
  const HeckeOps* H = nullptr;
  QuotientContext* ctx = nullptr;
  const RunOptions* opt = nullptr;
  StagedRun* run = nullptr;
  std::map<std::pair<uint64_t, uint64_t>, Embedding> registry;
  std::map<uint64_t, std::shared_ptr<GModel>> src_models;
  std::map<uint64_t, std::shared_ptr<HeckeOps>> src_hecke;

  uint64_t weight_key(const SerreWeight& wgt) const {
    uint64_t k = wgt.w;
    for (auto r : wgt.r_vec) k = k * 64 + r + 1;
    return k;
  }

  std::pair<const GModel*, const HeckeOps*> source_side(const SerreWeight& wgt) {
    uint64_t key = weight_key(wgt);
    auto it = src_models.find(key);
    if (it == src_models.end()) {
      auto mdl = std::make_shared<GModel>(wgt, M->R_ptr(), M->budget());
      src_hecke.emplace(key, std::make_shared<HeckeOps>(*mdl));
      it = src_models.emplace(key, std::move(mdl)).first;
    }
    return {it->second.get(), src_hecke.at(key).get()};
  }

  void add_stage_generators(Embedding& emb) {
    if (!emb.materialized || !emb.phi) return;
    int64_t cap2 = static_cast<int64_t>(opt->budget) - 1 - static_cast<int64_t>(emb.level);
    if (cap2 < 0) {
      run->notes.push_back("image generators of '" + emb.path +
                           "' exceed the radius budget; context not enlarged");
      return;
    }
    // largest source radius whose generator count stays under the limit
    uint32_t cap = 0;
    uint64_t verts = 2, layer = 1;
    for (uint32_t radius = 1; radius <= static_cast<uint32_t>(cap2); ++radius) {
      layer *= M->q();
      if ((verts + 2 * layer) * emb.weight.dim() > opt->stage_gen_limit) break;
      verts += 2 * layer;
      cap = radius;
    }
    auto [sm, sh] = source_side(emb.weight);
    const Box& sbox = emb.phi->source_box();
    for (uint32_t lvl = 0; lvl <= cap; ++lvl)
      for (uint32_t side = 0; side <= 1; ++side)
        for (uint64_t k : sm->level_keys(side, lvl))
          for (uint64_t i = 0; i < sbox.dim; ++i) {
            SymVec v(sbox.dim, 0);
            v[i] = 1;
            ctx->add_element(
                emb.phi->apply_T_image(*sm, *sh, sm->mat_of_vertex(sm->vertex(k)), v));
          }
  }

  LedgerRow make_row(PathWalk& walk, uint32_t stage, int32_t letter, uint64_t pred_r,
                     uint64_t pred_w, const std::string& stage_label) {
    const GModel& A = *M;
    LedgerRow row;
    row.path = stage_label;
    row.stage = stage;
    row.letter = letter;
    row.predicted = WeightParam{pred_r % (A.q() - 1), pred_w % (A.q() - 1)};
    row.character = char_of_invariant(A.F(), A.weight(), walk.cur.ktot);
    row.predicted_weight =
        SerreWeight{param_digits(A.p(), A.f(), pred_r), pred_w % (A.q() - 1)};
    row.level = walk.cur.level;
    row.materialized = walk.cur.materialized;
    if (walk.cur.materialized) {
      auto chi = eigencharacter(walk.cur.element, *ctx);
      row.char_verified = chi && *chi == row.character;
      if (row.char_verified) {
        try {
          row.char_verified = weight_from_char(A.p(), A.f(), *chi) == row.predicted_weight;
        } catch (const std::exception&) {
          row.char_verified = false;
        }
      }
      row.survived = !ctx->contains(walk.cur.element);
      uint64_t coords = A.box().dim;
      for (uint32_t i = 0; i < walk.cur.level; ++i) coords *= A.q();
      if (coords <= opt->kz_coord_limit) {
        CertifiedSubmodule cert = kz_closure(walk.cur.element, *ctx);
        row.kz_dimension = cert.dimension;
        row.kz_certified =
            cert.irreducible && cert.weight && *cert.weight == row.predicted_weight;
        if (row.kz_certified && !walk.cur.phi)
          walk.cur.phi =
              std::make_shared<PhiMap>(A, *ctx, row.predicted_weight, walk.cur.element);
      }
    }
    walk.cur.weight = row.predicted_weight;
    walk.cur.path = stage_label;
    return row;
  }
};

// bookkeeping walk over one letter string; wrapping top-place steps split in
// two, a positive leftover is carried to the final step
struct WalkOutcome {
  std::vector<SerreWeight> listed;
  uint64_t final_r = 0, final_w = 0;
  bool credit_cleared = true;
};

WalkOutcome walk_states(uint64_t p, uint64_t f, const SerreWeight& seed,
                        const std::vector<uint32_t>& letters,
                        const std::set<std::pair<uint64_t, uint64_t>>& expected) {
  uint64_t qm1 = 1;
  for (uint64_t i = 0; i < f; ++i) qm1 *= p;
  qm1 -= 1;
  uint64_t pf1 = 1;
  for (uint64_t i = 0; i + 1 < f; ++i) pf1 *= p;
  WalkOutcome out;
  uint64_t r = seed.r_param(p) % qm1, w = seed.w % qm1, credit = 0;
  auto in_expected = [&](uint64_t rr, uint64_t ww) {
    return expected.count({rr % qm1, ww % qm1}) > 0;
  };
  auto list_state = [&](uint64_t rr, uint64_t ww) {
    if (!in_expected(rr, ww)) out.listed.push_back(SerreWeight{param_digits(p, f, rr), ww});
  };
  for (size_t idx = 0; idx < letters.size(); ++idx) {
    uint32_t j = letters[idx];
    bool terminal = idx + 1 == letters.size();
    uint64_t d = param_digits(p, f, r)[j];
    uint64_t pj = 1;
    for (uint32_t i = 0; i < j; ++i) pj *= p;
    uint64_t R = (r + qm1 - (2 * (d + 1) * pj) % qm1) % qm1;
    uint64_t W = (w + (d + 1) * pj) % qm1;
    if (terminal) {
      r = (R + credit) % qm1;
      w = W;
      credit = 0;
    } else if (j == f - 1 && !in_expected(R, W)) {
      int64_t rho = static_cast<int64_t>(p) - 2 * static_cast<int64_t>(d + 1);
      if (rho < 0) {
        list_state((r + qm1 - 1) % qm1, w);
        list_state(R, W);
        r = R;
      } else {
        uint64_t cr = static_cast<uint64_t>(rho) * pf1 % qm1;
        uint64_t shown = (R + qm1 - cr) % qm1;
        list_state(shown, W);
        credit = (credit + cr) % qm1;
        r = shown;
      }
      w = W;
    } else {
      if (!terminal) list_state(R, W);
      r = R;
      w = W;
    }
  }
  out.final_r = r;
  out.final_w = w;
  out.credit_cleared = credit == 0;
  return out;
}

}  // namespace

std::vector<SerreWeight> process_intermediates(uint64_t p, uint64_t f, const SerreWeight& seed,
                                               const std::vector<uint32_t>& J) {
  auto ws = weight_set(seed, p, 1, f);
  uint64_t qm1 = 1;
  for (uint64_t i = 0; i < f; ++i) qm1 *= p;
  qm1 -= 1;
  std::set<std::pair<uint64_t, uint64_t>> expected;
  for (const auto& lw : ws) expected.insert({lw.weight.r_param(p) % qm1, lw.weight.w % qm1});
  std::vector<uint32_t> letters = schedule_aJ(f, J);
  WalkOutcome walk = walk_states(p, f, seed, letters, expected);
  WeightParam target = r_J_wJ(p, f, J, seed);
  if (walk.credit_cleared && walk.final_r == target.r % qm1 && walk.final_w == target.w % qm1)
    return walk.listed;
  // inconsistent split walk: fall back to the plain chain states
  std::vector<SerreWeight> plain;
  uint64_t r = seed.r_param(p) % qm1, w = seed.w % qm1;
  for (size_t idx = 0; idx + 1 < letters.size(); ++idx) {
    uint32_t j = letters[idx];
    w = apply_A_w(p, f, j, r, w);
    r = apply_A(p, f, j, r);
    if (!expected.count({r, w})) plain.push_back(SerreWeight{param_digits(p, f, r), w});
  }
  return plain;
}

namespace {

StagedRun run_common(const GModel& M, const HeckeOps& H, QuotientContext& ctx,
                     std::vector<PathWalk> walks, const RunOptions& opt,
                     const std::vector<LabeledWeight>& expected) {
  StagedRun run;
  run.seed = M.weight();
  run.p = M.p();
  run.e = M.e();
  run.f = M.f();
  run.budget = opt.budget;
  run.expected = expected;
  RunState st;
  st.M = &M;
  st.H = &H;
  st.ctx = &ctx;
  st.opt = &opt;
  st.run = &run;

  uint64_t qm1 = M.q() - 1;
  auto expected_class = [&](uint64_t r, uint64_t w) {
    for (const auto& lw : expected)
      if (lw.weight.r_param(M.p()) % qm1 == r % qm1 && lw.weight.w % qm1 == w % qm1)
        return true;
    return false;
  };

  for (auto& walk : walks) {
    if (st.registry.count({walk.r, walk.w})) {
      walk.cur = st.registry.at({walk.r, walk.w});
      continue;
    }
    LedgerRow row = st.make_row(walk, 0, -1, walk.r, walk.w, walk.stage_labels[0]);
    row.in_weight_set = expected_class(walk.r, walk.w);
    if (walk.cur.materialized && !row.char_verified) run.ok = false;
    st.registry.emplace(std::make_pair(walk.r, walk.w), walk.cur);
    st.add_stage_generators(walk.cur);
    run.ledger.push_back(std::move(row));
  }
  size_t max_len = 0;
  for (const auto& wk : walks) max_len = std::max(max_len, wk.letters.size());
  for (size_t stage = 1; stage <= max_len; ++stage) {
    for (auto& walk : walks) {
      if (walk.pos + 1 != stage || walk.pos >= walk.letters.size()) continue;
      uint32_t j = walk.letters[walk.pos];
      uint64_t d = param_digits(M.p(), M.f(), walk.r)[j];
      uint64_t pj = 1;
      for (uint32_t i = 0; i < j; ++i) pj *= M.p();
      uint64_t D = pj * (d + 1);
      uint64_t pred_r = apply_A(M.p(), M.f(), j, walk.r);
      uint64_t pred_w = apply_A_w(M.p(), M.f(), j, walk.r, walk.w);
      LedgerRow row;
      auto reg = st.registry.find({pred_r, pred_w});
      if (reg != st.registry.end()) {
        walk.cur = reg->second;
        row = st.make_row(walk, static_cast<uint32_t>(stage), static_cast<int32_t>(j), pred_r,
                          pred_w, walk.stage_labels[walk.pos + 1]);
        row.reused = true;
      } else {
        Embedding next;
        next.ktot = walk.cur.ktot + D;
        next.level = walk.cur.level + 1;
        if (walk.cur.materialized && next.level <= opt.budget) {
          next.element = transport_next(M, walk.cur.element, D);
          next.materialized = true;
        } else if (walk.cur.materialized) {
          run.notes.push_back("stage " + std::to_string(stage) + " of '" + walk.label +
                              "' exceeds the radius budget; tracked symbolically");
        }
        walk.cur = std::move(next);
        row = st.make_row(walk, static_cast<uint32_t>(stage), static_cast<int32_t>(j), pred_r,
                          pred_w, walk.stage_labels[walk.pos + 1]);
        st.registry.emplace(std::make_pair(pred_r, pred_w), walk.cur);
        st.add_stage_generators(walk.cur);
      }
      row.in_weight_set = expected_class(pred_r, pred_w);
      if (row.materialized && !row.char_verified) run.ok = false;
      walk.r = pred_r;
      walk.w = pred_w;
      ++walk.pos;
      run.ledger.push_back(std::move(row));
    }
  }

  std::set<std::string> dropped(opt.drop_from_allowed.begin(), opt.drop_from_allowed.end());
  for (uint32_t it = 0; it < opt.cleanup_iterations; ++it) {
    for (auto& [key, emb] : st.registry) {
      if (!emb.materialized || !emb.phi) continue;
      if (dropped.count(emb.path)) {
        // the full image through the embedding removes the weight itself
        auto [sm, sh] = st.source_side(emb.weight);
        const Box& sbox = emb.phi->source_box();
        for (uint32_t side = 0; side <= 1; ++side)
          for (uint64_t k : sm->level_keys(side, 0))
            for (uint64_t i = 0; i < sbox.dim; ++i) {
              SymVec v(sbox.dim, 0);
              v[i] = 1;
              ctx.add_element(emb.phi->apply(sm->mat_of_vertex(sm->vertex(k)), v));
            }
      } else {
        st.add_stage_generators(emb);
      }
    }
  }

  for (auto& [key, emb] : st.registry) {
    if (!emb.materialized) continue;
    if (!ctx.contains(emb.element)) run.socle.push_back(SocleEntry{emb.path, emb.weight});
  }
  std::sort(run.socle.begin(), run.socle.end(),
            [](const SocleEntry& a, const SocleEntry& b) { return a.path < b.path; });
  return run;
}

}  // namespace

StagedRun run_unramified(const SerreWeight& seed, uint64_t p, const RunOptions& opt) {
  for (auto rj : seed.r_vec)
    if (!(2 < rj && rj + 3 < p))
      throw std::invalid_argument("run_unramified: requires 2 < r_j < p - 3");
  GModel M(seed, p, 1, opt.budget);
  HeckeOps H(M);
  QuotientContext ctx(M, H, opt.budget, true);
  uint64_t f = seed.f();
  std::vector<PathWalk> walks;
  for (uint64_t mask = 0; mask < (1ull << f); ++mask) {
    std::vector<uint32_t> J;
    for (uint64_t j = 0; j < f; ++j)
      if (mask & (1ull << j)) J.push_back(static_cast<uint32_t>(j));
    PathWalk wk;
    wk.label = subset_label(J);
    wk.letters = schedule_aJ(f, J);
    wk.r = seed.r_param(p);
    wk.w = seed.w;
    wk.stage_labels.push_back(wk.letters.empty() ? wk.label : subset_label({}));
    for (size_t s = 1; s < wk.letters.size(); ++s)
      wk.stage_labels.push_back(wk.label + ":" + std::to_string(s));
    if (!wk.letters.empty()) wk.stage_labels.push_back(wk.label);
    SymVec hv(M.box().dim, 0);
    hv[0] = 1;
    wk.cur.element = InducedElement{{M.key(0, 0, {}), hv}};
    wk.cur.materialized = true;
    wk.cur.weight = seed;
    walks.push_back(std::move(wk));
  }
  std::sort(walks.begin(), walks.end(),
            [](const PathWalk& a, const PathWalk& b) { return a.label < b.label; });
  return run_common(M, H, ctx, std::move(walks), opt, weight_set(seed, p, 1, f));
}

StagedRun run_f2_ramified(const SerreWeight& seed, uint64_t p, uint64_t e,
                          const RunOptions& opt) {
  if (seed.f() != 2) throw std::invalid_argument("run_f2_ramified: needs f = 2");
  uint32_t rmin = *std::min_element(seed.r_vec.begin(), seed.r_vec.end());
  if (!(e > 1) || 2 * e >= rmin)
    throw std::invalid_argument("run_f2_ramified: needs 1 < e < min(r_j)/2");
  for (auto rj : seed.r_vec)
    if (!(2 < rj && rj + 3 < p))
      throw std::invalid_argument("run_f2_ramified: requires 2 < r_j < p - 3");
  GModel M(seed, p, e, opt.budget);
  HeckeOps H(M);
  QuotientContext ctx(M, H, opt.budget, true);
  // one generator per lattice point, sitting one level above its seed so the
  // higher copies die while the seed survives
  for (uint32_t d0 = 0; d0 < e; ++d0)
    for (uint32_t d1 = 0; d1 < e; ++d1) {
      if (d0 == 0 && d1 == 0) continue;  // the seed level is handled by T itself
      uint32_t lvl = d0 + d1 + 1;
      if (lvl > opt.budget) continue;
      ctx.add_g_span(build_t_vec(M, lvl, {d0, d1}));
    }
  uint64_t qm1 = M.q() - 1;
  std::vector<PathWalk> walks;
  for (uint32_t d0 = 0; d0 < e; ++d0)
    for (uint32_t d1 = 0; d1 < e; ++d1) {
      PathWalk wk;
      wk.label = "(" + std::to_string(d0) + "," + std::to_string(d1) + ")";
      wk.letters = {1, 0, 1};
      uint64_t i_delta = d0 + p * d1;
      wk.r = (seed.r_param(p) + qm1 - 2 * i_delta % qm1) % qm1;
      wk.w = (seed.w + i_delta) % qm1;
      auto lbl = [&](const std::vector<uint32_t>& J, uint32_t a, uint32_t b) {
        return subset_label(J) + ",(" + std::to_string(a) + "," + std::to_string(b) + ")";
      };
      wk.stage_labels = {lbl({}, d0, d1), lbl({1}, d0, e - 1 - d1),
                         lbl({0, 1}, e - 1 - d0, e - 1 - d1), lbl({0}, e - 1 - d0, d1)};
      uint32_t lvl = d0 + d1;
      wk.cur.ktot = i_delta;
      wk.cur.level = lvl;
      if (lvl <= opt.budget) {
        wk.cur.element = build_t_vec(M, lvl, {d0, d1});
        wk.cur.materialized = true;
      }
      walks.push_back(std::move(wk));
    }
  std::sort(walks.begin(), walks.end(),
            [](const PathWalk& a, const PathWalk& b) { return a.label < b.label; });
  return run_common(M, H, ctx, std::move(walks), opt, weight_set(seed, p, e, 2));
}

}  // namespace treerep
