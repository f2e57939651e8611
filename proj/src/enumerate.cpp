#include "treerep/enumerate.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace treerep {

FastAct::FastAct(const GModel& M, Mat2Local g) : M_(M), g_(std::move(g)) {}

std::pair<uint64_t, const std::vector<Fq>*> FastAct::vertex_image(uint64_t key) {
  auto it = vmap_.find(key);
  if (it == vmap_.end()) {
    CosetForm nf = M_.act_vertex(g_, key);
    uint64_t packed = (uint64_t(nf.kbar.a) << 48) | (uint64_t(nf.kbar.b) << 32) |
                      (uint64_t(nf.kbar.c) << 16) | uint64_t(nf.kbar.d);
    auto mit = matid_.find(packed);
    uint64_t id;
    if (mit == matid_.end()) {
      id = mats_.size();
      mats_.push_back(sym_matrix(M_.F(), M_.weight(), M_.box(), nf.kbar));
      matid_.emplace(packed, id);
    } else {
      id = mit->second;
    }
    it = vmap_.emplace(key, std::make_pair(M_.key(nf.vertex), id)).first;
  }
  return {it->second.first, &mats_[it->second.second]};
}

InducedElement FastAct::apply(const InducedElement& x) {
  const FieldCtx& F = M_.F();
  const uint64_t dim = M_.box().dim;
  InducedElement out;
  for (const auto& [k, v] : x) {
    auto [nk, mat] = vertex_image(k);
    auto it = out.find(nk);
    if (it == out.end()) it = out.emplace(nk, SymVec(dim, 0)).first;
    SymVec& dst = it->second;
    for (uint64_t i = 0; i < dim; ++i) {
      if (!v[i]) continue;
      for (uint64_t kk = 0; kk < dim; ++kk) {
        Fq m = (*mat)[kk * dim + i];
        if (m) dst[kk] = F.add(dst[kk], F.mul(m, v[i]));
      }
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    bool zero = std::all_of(it->second.begin(), it->second.end(), [](Fq c) { return c == 0; });
    it = zero ? out.erase(it) : std::next(it);
  }
  return out;
}

namespace {

// level-l component of d modulo the outward span; lower levels dropped.
// Valid as an invariance condition only for the top two levels of the ball,
// where the image of T has no inward contribution.
InducedElement project_out_level(const GModel& M, const HeckeOps& H, const InducedElement& d,
                                 uint32_t level) {
  const FieldCtx& F = M.F();
  const uint64_t dim = M.box().dim, q = M.q();
  InducedElement out;
  uint64_t lo = uint64_t(level) << 58;
  uint64_t hi = lo + (2ull << 57);
  for (auto it = d.lower_bound(lo); it != d.end() && it->first < hi; ++it) out.insert(*it);
  for (uint32_t side = 0; side <= 1 && level >= 1; ++side) {
    uint64_t value_idx = side == 0 ? 0 : M.box().top();
    const std::vector<Fq>& S = H.S(side);
    const std::vector<Fq>& V = H.V(side);
    std::map<std::vector<Fq>, std::vector<std::pair<Fq, Fq>>> groups;
    uint64_t slo = lo | (uint64_t(side) << 57);
    uint64_t shi = slo + (1ull << 57);
    for (auto it = out.lower_bound(slo); it != out.end() && it->first < shi; ++it) {
      Fq c = it->second[value_idx];
      if (!c) continue;
      TreeVertex v = M.vertex(it->first);
      std::vector<Fq> par(v.mu.begin(), v.mu.end() - 1);
      groups[par].push_back({v.mu.back(), c});
    }
    for (const auto& [par, vals] : groups) {
      SymVec c(dim, 0);
      for (const auto& [lam, cv] : vals)
        for (uint64_t i = 0; i < dim; ++i)
          if (S[i * q + lam]) c[i] = F.add(c[i], F.mul(S[i * q + lam], cv));
      std::vector<Fq> child = par;
      child.push_back(0);
      for (uint64_t lam = 0; lam < q; ++lam) {
        Fq acc = 0;
        for (uint64_t i = 0; i < dim; ++i)
          if (c[i]) acc = F.add(acc, F.mul(V[lam * dim + i], c[i]));
        if (!acc) continue;
        child.back() = static_cast<Fq>(lam);
        uint64_t ck = M.key(side, level, child);
        auto it = out.find(ck);
        if (it == out.end()) {
          SymVec w(dim, 0);
          w[value_idx] = F.neg(acc);
          out.emplace(ck, std::move(w));
        } else {
          it->second[value_idx] = F.sub(it->second[value_idx], acc);
        }
      }
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    bool zero = std::all_of(it->second.begin(), it->second.end(), [](Fq c) { return c == 0; });
    it = zero ? out.erase(it) : std::next(it);
  }
  return out;
}

// candidates whose residual vanishes, as combinations of the inputs
std::vector<InducedElement> kernel_refine(
    const GModel& M, const std::vector<InducedElement>& cands,
    const std::function<InducedElement(const InducedElement&)>& residual) {
  const FieldCtx& F = M.F();
  struct Row {
    InducedElement v;
    std::vector<Fq> comb;
  };
  std::map<Coord, Row> pivots;  // keyed by the lead coordinate
  std::vector<InducedElement> kernel;
  auto lead_of = [](const InducedElement& x) -> std::optional<Coord> {
    for (const auto& [k, v] : x)
      for (uint64_t i = 0; i < v.size(); ++i)
        if (v[i]) return Coord{k, i};
    return std::nullopt;
  };
  for (size_t ci = 0; ci < cands.size(); ++ci) {
    InducedElement v = residual(cands[ci]);
    std::vector<Fq> comb(cands.size(), 0);
    comb[ci] = 1;
    // pivot rows have no support before their lead, so the lead of v only
    // moves forward during elimination
    while (true) {
      auto lc = lead_of(v);
      if (!lc) break;
      auto pit = pivots.find(*lc);
      if (pit == pivots.end()) break;
      Fq c = v.at(lc->first)[lc->second];
      M.add_scaled(v, pit->second.v, F.neg(c));
      for (size_t j = 0; j < cands.size(); ++j)
        comb[j] = F.sub(comb[j], F.mul(c, pit->second.comb[j]));
    }
    auto lc = lead_of(v);
    if (!lc) {
      InducedElement kv;
      for (size_t j = 0; j < cands.size(); ++j) M.add_scaled(kv, cands[j], comb[j]);
      if (!M.is_zero(kv)) kernel.push_back(std::move(kv));
    } else {
      Fq s = F.inv(v.at(lc->first)[lc->second]);
      if (s != 1) {
        InducedElement nv;
        M.add_scaled(nv, v, s);
        v = std::move(nv);
        for (auto& c : comb) c = F.mul(c, s);
      }
      pivots.emplace(*lc, Row{std::move(v), std::move(comb)});
    }
  }
  return kernel;
}

std::vector<InducedElement> level_basis(const GModel& M, uint32_t level) {
  std::vector<InducedElement> out;
  for (uint32_t side = 0; side <= 1; ++side)
    for (uint64_t k : M.level_keys(side, level))
      for (uint64_t i = 0; i < M.box().dim; ++i) {
        SymVec v(M.box().dim, 0);
        v[i] = 1;
        out.push_back(InducedElement{{k, v}});
      }
  return out;
}

// kernel of the group-local digit-translation conditions at one level and
// side, on coordinates (last digit, box index)
std::vector<std::vector<Fq>> local_phase_kernel(const GModel& M, const HeckeOps& H,
                                                uint32_t side, uint32_t level,
                                                uint32_t budget) {
  const FieldCtx& F = M.F();
  const LocalRing& R = M.R();
  const uint64_t q = M.q(), dim = M.box().dim, D = q * dim;
  const uint64_t value_idx = side == 0 ? 0 : M.box().top();

  std::vector<Mat2Local> gens;
  for (uint64_t l = 0; l < M.f(); ++l) {
    Fq lam = 1;
    for (uint64_t s = 0; s < l; ++s) lam = static_cast<Fq>(lam * M.p());
    for (uint32_t i = level - 1; i <= level && i <= budget; ++i) {
      LElem par = R.mul(R.pi_pow(i), R.teich(lam));
      gens.push_back(side == 0 ? M.delta_b(par) : M.delta_c(par));
    }
  }

  auto local_matrix = [&](const Mat2Local& g, const std::vector<Fq>& prefix) {
    std::vector<Fq> A(D * D, 0);
    std::vector<Fq> mu(level, 0);
    for (uint32_t i = 0; i + 1 < level; ++i) mu[i] = prefix[i];
    for (uint64_t t = 0; t < q; ++t) {
      mu[level - 1] = static_cast<Fq>(t);
      CosetForm nf = M.act_vertex(g, M.key(side, level, mu));
      if (nf.vertex.level != level || nf.vertex.side != side)
        throw std::logic_error("local_phase_kernel: generator does not preserve the level");
      for (uint32_t i = 0; i + 1 < level; ++i)
        if (nf.vertex.mu[i] != mu[i])
          throw std::logic_error("local_phase_kernel: generator leaves the group");
      uint64_t t2 = nf.vertex.mu[level - 1];
      std::vector<Fq> mat = sym_matrix(F, M.weight(), M.box(), nf.kbar);
      for (uint64_t i = 0; i < dim; ++i)
        for (uint64_t k = 0; k < dim; ++k)
          A[(t2 * dim + k) * D + (t * dim + i)] = mat[k * dim + i];
    }
    return A;
  };

  const std::vector<Fq>& S = H.S(side);
  const std::vector<Fq>& V = H.V(side);
  std::vector<std::vector<Fq>> rows;
  for (const auto& g : gens) {
    std::vector<Fq> A = local_matrix(g, std::vector<Fq>(level, 0));
    if (level >= 2) {
      std::vector<Fq> pref(level, 0);
      pref[0] = 1;
      if (local_matrix(g, pref) != A)
        throw std::logic_error("local_phase_kernel: action depends on the digit prefix");
    }
    for (uint64_t i = 0; i < D; ++i) A[i * D + i] = F.sub(A[i * D + i], 1);
    // quotient the designated slice by the outward span, column by column
    for (uint64_t col = 0; col < D; ++col) {
      SymVec c(dim, 0);
      for (uint64_t lam = 0; lam < q; ++lam) {
        Fq v = A[(lam * dim + value_idx) * D + col];
        if (!v) continue;
        for (uint64_t i = 0; i < dim; ++i)
          if (S[i * q + lam]) c[i] = F.add(c[i], F.mul(S[i * q + lam], v));
      }
      for (uint64_t lam = 0; lam < q; ++lam) {
        Fq acc = 0;
        for (uint64_t i = 0; i < dim; ++i)
          if (c[i]) acc = F.add(acc, F.mul(V[lam * dim + i], c[i]));
        if (acc)
          A[(lam * dim + value_idx) * D + col] =
              F.sub(A[(lam * dim + value_idx) * D + col], acc);
      }
    }
    for (uint64_t r = 0; r < D; ++r) {
      std::vector<Fq> row(A.begin() + r * D, A.begin() + (r + 1) * D);
      if (std::any_of(row.begin(), row.end(), [](Fq c) { return c != 0; }))
        rows.push_back(std::move(row));
    }
  }
  uint64_t rank = 0;
  std::vector<int64_t> pivot_of_col(D, -1);
  for (uint64_t col = 0; col < D && rank < rows.size(); ++col) {
    uint64_t piv = rank;
    while (piv < rows.size() && rows[piv][col] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    Fq s = F.inv(rows[rank][col]);
    if (s != 1)
      for (auto& c : rows[rank]) c = F.mul(c, s);
    for (uint64_t r = 0; r < rows.size(); ++r) {
      if (r == rank) continue;
      Fq f2 = rows[r][col];
      if (!f2) continue;
      for (uint64_t j = 0; j < D; ++j) rows[r][j] = F.sub(rows[r][j], F.mul(f2, rows[rank][j]));
    }
    pivot_of_col[col] = static_cast<int64_t>(rank);
    ++rank;
  }
  std::vector<std::vector<Fq>> kernel;
  for (uint64_t col = 0; col < D; ++col) {
    if (pivot_of_col[col] >= 0) continue;
    std::vector<Fq> k(D, 0);
    k[col] = 1;
    for (uint64_t c2 = 0; c2 < D; ++c2)
      if (pivot_of_col[c2] >= 0) {
        Fq v = rows[static_cast<uint64_t>(pivot_of_col[c2])][col];
        if (v) k[c2] = F.neg(v);
      }
    kernel.push_back(std::move(k));
  }
  return kernel;
}

std::vector<InducedElement> spread_local_kernel(const GModel& M, uint32_t side, uint32_t level,
                                                const std::vector<std::vector<Fq>>& local) {
  const uint64_t q = M.q(), dim = M.box().dim;
  std::vector<InducedElement> out;
  uint64_t groups = 1;
  for (uint32_t i = 0; i + 1 < level; ++i) groups *= q;
  for (uint64_t gidx = 0; gidx < groups; ++gidx) {
    std::vector<Fq> prefix(level ? level - 1 : 0);
    uint64_t t2 = gidx;
    for (uint32_t i = 0; i + 1 < level; ++i) {
      prefix[i] = static_cast<Fq>(t2 % q);
      t2 /= q;
    }
    for (const auto& loc : local) {
      InducedElement x;
      std::vector<Fq> mu = prefix;
      mu.push_back(0);
      for (uint64_t t = 0; t < q; ++t) {
        SymVec v(loc.begin() + t * dim, loc.begin() + (t + 1) * dim);
        if (std::all_of(v.begin(), v.end(), [](Fq c) { return c == 0; })) continue;
        mu.back() = static_cast<Fq>(t);
        x.emplace(M.key(side, level, mu), std::move(v));
      }
      if (!M.is_zero(x)) out.push_back(std::move(x));
    }
  }
  return out;
}

std::vector<InducedElement> pure_level_kernel(const GModel& M, const HeckeOps& H,
                                              uint32_t level, uint32_t budget,
                                              const GeneratorSet& gens) {
  std::vector<InducedElement> cands;
  for (uint32_t side = 0; side <= 1; ++side) {
    auto local = local_phase_kernel(M, H, side, level, budget);
    auto spread = spread_local_kernel(M, side, level, local);
    cands.insert(cands.end(), spread.begin(), spread.end());
  }
  for (const auto& e : gens.entries) {
    if (cands.empty()) break;
    FastAct fa(M, e.mat);
    cands = kernel_refine(M, cands, [&](const InducedElement& x) {
      InducedElement d = fa.apply(x);
      M.add_scaled(d, x, M.F().neg(1));
      return project_out_level(M, H, d, level);
    });
  }
  return cands;
}

// kernel of a small dense matrix acting on coordinate vectors, with the
// kernel reported as combinations of a supplied spanning family
std::vector<std::vector<Fq>> small_eigensplit(const FieldCtx& F,
                                              const std::vector<std::vector<Fq>>& family,
                                              const std::vector<std::vector<Fq>>& A, Fq lam,
                                              size_t nb) {
  std::vector<std::vector<Fq>> out;
  std::vector<std::pair<std::vector<Fq>, std::vector<Fq>>> piv;  // (residual, combo)
  for (size_t ci = 0; ci < family.size(); ++ci) {
    std::vector<Fq> v(nb, 0);
    for (size_t j = 0; j < nb; ++j) {
      if (!family[ci][j]) continue;
      for (size_t r2 = 0; r2 < nb; ++r2)
        v[r2] = F.add(v[r2], F.mul(A[r2][j], family[ci][j]));
    }
    for (size_t j = 0; j < nb; ++j) v[j] = F.sub(v[j], F.mul(lam, family[ci][j]));
    std::vector<Fq> comb(family.size(), 0);
    comb[ci] = 1;
    for (const auto& [pv, pc] : piv) {
      size_t plead = 0;
      while (plead < nb && pv[plead] == 0) ++plead;
      Fq c = v[plead];
      if (!c) continue;
      for (size_t j = 0; j < nb; ++j) v[j] = F.sub(v[j], F.mul(c, pv[j]));
      for (size_t j = 0; j < family.size(); ++j) comb[j] = F.sub(comb[j], F.mul(c, pc[j]));
    }
    size_t lead = 0;
    while (lead < nb && v[lead] == 0) ++lead;
    if (lead == nb) {
      // kernel combo: the corresponding vector in ambient coordinates
      std::vector<Fq> w(nb, 0);
      bool nz = false;
      for (size_t j = 0; j < family.size(); ++j) {
        if (!comb[j]) continue;
        for (size_t r2 = 0; r2 < nb; ++r2) {
          w[r2] = F.add(w[r2], F.mul(comb[j], family[j][r2]));
          nz = nz || w[r2];
        }
      }
      if (std::any_of(w.begin(), w.end(), [](Fq c) { return c != 0; })) out.push_back(std::move(w));
    } else {
      Fq s = F.inv(v[lead]);
      for (auto& c : v) c = F.mul(c, s);
      for (auto& c : comb) c = F.mul(c, s);
      piv.push_back({std::move(v), std::move(comb)});
    }
  }
  return out;
}

}  // namespace

EnumeratedInvariants enumerate_invariants(const GModel& M, const HeckeOps& H, uint32_t budget) {
  EnumeratedInvariants out;
  out.budget = budget;
  for (auto rj : M.weight().r_vec)
    if (!(2 < rj && rj + 3 < M.p())) out.hypothesis_ok = false;

  GeneratorSet gens = GeneratorSet::standard(M, budget);
  std::vector<InducedElement> cands;
  if (budget >= 1) {
    auto top = pure_level_kernel(M, H, budget, budget, gens);
    cands.insert(cands.end(), top.begin(), top.end());
  }
  if (budget >= 2) {
    auto next = pure_level_kernel(M, H, budget - 1, budget, gens);
    cands.insert(cands.end(), next.begin(), next.end());
  }
  for (uint32_t level = 0; level == 0 || level + 2 <= budget; ++level) {
    auto part = level_basis(M, level);
    cands.insert(cands.end(), part.begin(), part.end());
  }

  // joint exact conditions against the image of T over the ball
  for (const auto& e : gens.entries) {
    if (cands.empty()) break;
    FastAct fa(M, e.mat);
    cands = kernel_refine(M, cands, [&](const InducedElement& x) {
      InducedElement d = fa.apply(x);
      M.add_scaled(d, x, M.F().neg(1));
      return H.reduce_mod_T(d, budget);
    });
  }

  // canonical representatives, independent spanning set
  Reducer red(M);
  std::vector<InducedElement> basis;
  for (auto& c : cands) {
    InducedElement r = H.reduce_mod_T(c, budget);
    InducedElement rr = red.reduce(r);
    if (M.is_zero(rr)) continue;
    red.add(rr);
    basis.push_back(rr);
  }
  if (basis.empty()) return out;

  // matrices of the torus generators on the basis
  const FieldCtx& F = M.F();
  Fq g = F.generator();
  const size_t nb = basis.size();
  std::vector<Coord> leads(nb);
  std::vector<Fq> lead_coeff(nb);
  for (size_t j = 0; j < nb; ++j) {
    bool found = false;
    for (const auto& [k, v] : basis[j]) {
      for (uint64_t i = 0; i < v.size() && !found; ++i)
        if (v[i]) {
          leads[j] = {k, i};
          lead_coeff[j] = v[i];
          found = true;
        }
      if (found) break;
    }
  }
  auto matrix_of = [&](const Mat2Local& d) {
    std::vector<std::vector<Fq>> mat(nb, std::vector<Fq>(nb, 0));
    for (size_t i = 0; i < nb; ++i) {
      InducedElement img = H.reduce_mod_T(M.act(d, basis[i]), budget);
      for (size_t j = 0; j < nb; ++j) {
        auto it = img.find(leads[j].first);
        Fq c = it == img.end() ? 0 : it->second[leads[j].second];
        if (!c) continue;
        Fq coef = F.mul(c, F.inv(lead_coeff[j]));
        mat[j][i] = coef;
        M.add_scaled(img, basis[j], F.neg(coef));
      }
      if (!M.is_zero(img))
        throw std::logic_error("enumerate_invariants: torus does not stabilize the space");
    }
    return mat;
  };
  auto A1 = matrix_of(M.diag_teich(g, 1));
  auto A2 = matrix_of(M.diag_teich(1, g));

  std::vector<std::vector<Fq>> identity(nb, std::vector<Fq>(nb, 0));
  for (size_t i = 0; i < nb; ++i) identity[i][i] = 1;
  size_t found_total = 0;
  for (uint64_t e1 = 0; e1 + 1 < F.q() && found_total < nb; ++e1) {
    auto eig1 = small_eigensplit(F, identity, A1, F.pow(g, static_cast<int64_t>(e1)), nb);
    if (eig1.empty()) continue;
    for (uint64_t e2 = 0; e2 + 1 < F.q() && found_total < nb; ++e2) {
      auto eig12 = small_eigensplit(F, eig1, A2, F.pow(g, static_cast<int64_t>(e2)), nb);
      for (const auto& v : eig12) {
        InducedElement x;
        for (size_t j = 0; j < nb; ++j)
          if (v[j]) M.add_scaled(x, basis[j], v[j]);
        out.basis.push_back(H.reduce_mod_T(x, budget));
        out.characters.push_back(ICharacter{e1, e2});
        ++found_total;
      }
    }
  }
  if (found_total != nb)
    throw std::logic_error("enumerate_invariants: eigensplit lost dimensions");
  return out;
}

std::vector<PredictedInvariant> predicted_invariant_basis(const GModel& M, const HeckeOps& H,
                                                          uint32_t budget) {
  std::vector<PredictedInvariant> out;
  const FieldCtx& F = M.F();
  const SerreWeight& wt = M.weight();
  uint64_t f = M.f(), e = M.e(), p = M.p();
  auto push = [&](const std::string& label, InducedElement x, ICharacter chi) {
    out.push_back(PredictedInvariant{label, std::move(x), chi});
  };
  SymVec hv(M.box().dim, 0), lv(M.box().dim, 0);
  hv[0] = 1;
  lv[M.box().top()] = 1;
  push("id", InducedElement{{M.key(0, 0, {}), hv}}, char_of_invariant(F, wt, 0));
  push("alpha", InducedElement{{M.key(1, 0, {}), lv}}, char_swap(char_of_invariant(F, wt, 0)));
  uint32_t s_start = f == 1 ? 2 : 1;
  if (!(e == 1 && f == 1)) {
    for (uint64_t l = 0; l < f; ++l) {
      uint64_t pl = 1;
      for (uint64_t i = 0; i < l; ++i) pl *= p;
      uint64_t k = pl * (wt.r_vec[l] + 1);
      ICharacter chi = char_of_element(F, wt, ElementKind::s_n_k, k);
      for (uint32_t n = s_start; n <= budget; ++n) {
        push("s_" + std::to_string(n) + "^" + std::to_string(k), build_s(M, n, k), chi);
        push("beta s_" + std::to_string(n) + "^" + std::to_string(k),
             M.act(M.beta(), build_s(M, n, k)), char_swap(chi));
      }
    }
  }
  if (e > 1) {
    for (uint32_t kk = 0; kk < f; ++kk) {
      ICharacter chi = char_of_element(F, wt, ElementKind::t_n_k, kk);
      for (uint32_t n = 1; n <= budget; ++n) {
        push("t_" + std::to_string(n) + "^" + std::to_string(kk), build_t(M, n, kk), chi);
        push("beta t_" + std::to_string(n) + "^" + std::to_string(kk),
             M.act(M.beta(), build_t(M, n, kk)), char_swap(chi));
      }
    }
  }
  for (auto& pi : out) pi.element = H.reduce_mod_T(pi.element, budget);
  return out;
}

uint64_t predicted_invariant_count(uint64_t e, uint64_t f, uint32_t budget) {
  uint64_t count = 2;
  uint32_t s_start = f == 1 ? 2 : 1;
  if (!(e == 1 && f == 1))
    count += 2 * f * (budget >= s_start ? budget - s_start + 1 : 0);
  if (e > 1) count += 2 * f * budget;
  return count;
}

}  // namespace treerep
