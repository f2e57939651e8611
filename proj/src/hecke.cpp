#include "treerep/hecke.hpp"

#include <algorithm>
#include <cassert>

namespace treerep {

namespace {

// left inverse S (dim x q) of a full-column-rank V (q x dim)
std::vector<Fq> left_inverse(const FieldCtx& F, const std::vector<Fq>& V, uint64_t q,
                             uint64_t dim) {
  // row reduce a copy, remembering which original rows become pivots
  std::vector<Fq> W = V;
  std::vector<uint64_t> rows(q);
  for (uint64_t i = 0; i < q; ++i) rows[i] = i;
  std::vector<uint64_t> pivot_rows;
  uint64_t rank = 0;
  for (uint64_t col = 0; col < dim; ++col) {
    uint64_t pr = rank;
    while (pr < q && W[pr * dim + col] == 0) ++pr;
    if (pr == q) throw std::logic_error("outward matrix not of full column rank");
    for (uint64_t j = 0; j < dim; ++j) std::swap(W[pr * dim + j], W[rank * dim + j]);
    std::swap(rows[pr], rows[rank]);
    Fq s = F.inv(W[rank * dim + col]);
    for (uint64_t j = 0; j < dim; ++j) W[rank * dim + j] = F.mul(W[rank * dim + j], s);
    for (uint64_t r = 0; r < q; ++r) {
      if (r == rank) continue;
      Fq f = W[r * dim + col];
      if (!f) continue;
      for (uint64_t j = 0; j < dim; ++j)
        W[r * dim + j] = F.sub(W[r * dim + j], F.mul(f, W[rank * dim + j]));
    }
    pivot_rows.push_back(rows[rank]);
    ++rank;
  }
  // invert the dim x dim submatrix on the pivot rows
  std::vector<Fq> A(dim * 2 * dim, 0);
  for (uint64_t r = 0; r < dim; ++r) {
    for (uint64_t c = 0; c < dim; ++c) A[r * 2 * dim + c] = V[pivot_rows[r] * dim + c];
    A[r * 2 * dim + dim + r] = 1;
  }
  for (uint64_t col = 0; col < dim; ++col) {
    uint64_t pr = col;
    while (pr < dim && A[pr * 2 * dim + col] == 0) ++pr;
    if (pr == dim) throw std::logic_error("pivot submatrix singular");
    if (pr != col)
      for (uint64_t j = 0; j < 2 * dim; ++j) std::swap(A[pr * 2 * dim + j], A[col * 2 * dim + j]);
    Fq s = F.inv(A[col * 2 * dim + col]);
    for (uint64_t j = 0; j < 2 * dim; ++j) A[col * 2 * dim + j] = F.mul(A[col * 2 * dim + j], s);
    for (uint64_t r = 0; r < dim; ++r) {
      if (r == col) continue;
      Fq f = A[r * 2 * dim + col];
      if (!f) continue;
      for (uint64_t j = 0; j < 2 * dim; ++j)
        A[r * 2 * dim + j] = F.sub(A[r * 2 * dim + j], F.mul(f, A[col * 2 * dim + j]));
    }
  }
  std::vector<Fq> S(dim * q, 0);
  for (uint64_t i = 0; i < dim; ++i)
    for (uint64_t r = 0; r < dim; ++r) S[i * q + pivot_rows[r]] = A[i * 2 * dim + dim + r];
  return S;
}

}  // namespace

HeckeOps::HeckeOps(const GModel& M) : M_(M) {
  const FieldCtx& F = M.F();
  const Box& box = M.box();
  const uint64_t q = M.q(), dim = box.dim;
  V0_.assign(q * dim, 0);
  V1_.assign(q * dim, 0);
  for (uint64_t lam = 0; lam < q; ++lam) {
    Fq ml = F.neg(static_cast<Fq>(lam));
    for (uint64_t i = 0; i < dim; ++i) {
      V0_[lam * dim + i] = F.pow(ml, static_cast<int64_t>(box.exponent[i]));
      V1_[lam * dim + i] = F.pow(ml, static_cast<int64_t>(box.exponent[box.top() - i]));
    }
  }
  S0_ = left_inverse(F, V0_, q, dim);
  S1_ = left_inverse(F, V1_, q, dim);

  inw0_.resize(q);
  inw1_.resize(q);
  const auto& r = M.weight().r_vec;
  for (uint64_t t = 0; t < q; ++t) {
    SymVec w0(dim, 0), w1(dim, 0);
    for (uint64_t i = 0; i < dim; ++i) {
      auto idx = box.unflatten(i);
      Fq c0 = 1, c1 = 1;
      Fq tw = static_cast<Fq>(t);
      for (size_t j = 0; j < idx.size(); ++j) {
        Fq bin = F.from_int(static_cast<int64_t>(binom_mod_p(r[j], idx[j], F.p())));
        c0 = F.mul(c0, F.mul(bin, F.pow(tw, static_cast<int64_t>(r[j] - idx[j]))));
        c1 = F.mul(c1, F.mul(bin, F.pow(tw, static_cast<int64_t>(idx[j]))));
        tw = F.frobenius(tw);
      }
      w0[i] = c0;
      w1[i] = c1;
    }
    inw0_[t] = std::move(w0);
    inw1_[t] = std::move(w1);
  }
}

Fq HeckeOps::out_coeff(uint32_t side, const SymVec& v, Fq lambda) const {
  const FieldCtx& F = M_.F();
  const std::vector<Fq>& V = side ? V1_ : V0_;
  const uint64_t dim = M_.box().dim;
  Fq acc = 0;
  for (uint64_t i = 0; i < dim; ++i)
    if (v[i]) acc = F.add(acc, F.mul(V[uint64_t(lambda) * dim + i], v[i]));
  return acc;
}

SymVec HeckeOps::inward_value(uint32_t side, Fq last_digit, Fq coeff) const {
  const FieldCtx& F = M_.F();
  const SymVec& base = side ? inw1_[last_digit] : inw0_[last_digit];
  SymVec out(base.size(), 0);
  if (coeff)
    for (size_t i = 0; i < base.size(); ++i) out[i] = F.mul(base[i], coeff);
  return out;
}

InducedElement HeckeOps::apply_T(const InducedElement& x) const {
  const FieldCtx& F = M_.F();
  const Box& box = M_.box();
  const uint64_t q = M_.q(), dim = box.dim;
  InducedElement out;
  auto add_vec = [&](uint64_t k, const SymVec& v) {
    auto it = out.find(k);
    if (it == out.end())
      out.emplace(k, v);
    else
      for (uint64_t i = 0; i < dim; ++i) it->second[i] = F.add(it->second[i], v[i]);
  };
  for (const auto& [k, v] : x) {
    TreeVertex vx = M_.vertex(k);
    // outward: children carry the highest (side 0) / lowest (side 1) vector
    uint64_t value_idx = vx.side == 0 ? 0 : box.top();
    std::vector<Fq> mu = vx.mu;
    mu.push_back(0);
    for (uint64_t lam = 0; lam < q; ++lam) {
      Fq c = out_coeff(vx.side, v, static_cast<Fq>(lam));
      if (!c) continue;
      mu.back() = static_cast<Fq>(lam);
      SymVec w(dim, 0);
      w[value_idx] = c;
      add_vec(M_.key(vx.side, vx.level + 1, mu), w);
    }
    // inward / level-0 cross terms
    if (vx.level >= 1) {
      Fq top_or_bottom = vx.side == 0 ? v[box.top()] : v[0];
      if (top_or_bottom) {
        std::vector<Fq> parent(vx.mu.begin(), vx.mu.end() - 1);
        add_vec(M_.key(vx.side, vx.level - 1, parent),
                inward_value(vx.side, vx.mu.back(), top_or_bottom));
      }
    } else if (vx.side == 0) {
      if (v[box.top()]) {
        SymVec w(dim, 0);
        w[box.top()] = v[box.top()];
        add_vec(M_.key(1, 0, {}), w);
      }
    } else {
      if (v[0]) {
        SymVec w(dim, 0);
        w[0] = v[0];
        add_vec(M_.key(0, 0, {}), w);
      }
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    bool zero = std::all_of(it->second.begin(), it->second.end(), [](Fq c) { return c == 0; });
    it = zero ? out.erase(it) : std::next(it);
  }
  return out;
}

InducedElement HeckeOps::propagate(const InducedElement& x) const {
  InducedElement out;
  for (uint64_t lam = 0; lam < M_.q(); ++lam) {
    Mat2Local g = M_.mat_of_vertex(TreeVertex{0, 1, {static_cast<Fq>(lam)}});
    M_.add_scaled(out, M_.act(g, x), 1);
  }
  return out;
}

InducedElement HeckeOps::reduce_mod_T(const InducedElement& y, uint32_t budget,
                                      InducedElement* preimage) const {
  const FieldCtx& F = M_.F();
  const Box& box = M_.box();
  const uint64_t q = M_.q(), dim = box.dim;
  if (M_.max_level(y) > budget) throw std::invalid_argument("reduce_mod_T: beyond budget");
  InducedElement u = y;
  if (preimage) preimage->clear();
  for (uint32_t m = budget; m >= 1; --m) {
    // group level-m support by parent
    for (uint32_t side = 0; side <= 1; ++side) {
      uint64_t lo = (uint64_t(m) << 58) | (uint64_t(side) << 57);
      uint64_t hi = lo + (1ull << 57);
      std::map<uint64_t, std::vector<std::pair<Fq, Fq>>> groups;  // parent -> (lambda, coeff)
      uint64_t value_idx = side == 0 ? 0 : box.top();
      for (auto it = u.lower_bound(lo); it != u.end() && it->first < hi; ++it) {
        Fq c = it->second[value_idx];
        if (!c) continue;
        TreeVertex vx = M_.vertex(it->first);
        std::vector<Fq> par(vx.mu.begin(), vx.mu.end() - 1);
        groups[M_.key(side, m - 1, par)].push_back({vx.mu.back(), c});
      }
      const std::vector<Fq>& S = side ? S1_ : S0_;
      const std::vector<Fq>& V = side ? V1_ : V0_;
      for (const auto& [pkey, vals] : groups) {
        SymVec c(dim, 0);
        for (const auto& [lam, cv] : vals)
          for (uint64_t i = 0; i < dim; ++i)
            if (S[i * q + lam]) c[i] = F.add(c[i], F.mul(S[i * q + lam], cv));
        bool czero = std::all_of(c.begin(), c.end(), [](Fq x) { return x == 0; });
        if (czero) continue;
        if (preimage) {
          auto it = preimage->find(pkey);
          if (it == preimage->end())
            preimage->emplace(pkey, c);
          else
            for (uint64_t i = 0; i < dim; ++i) it->second[i] = F.add(it->second[i], c[i]);
        }
        // subtract the outward image V c on the children
        TreeVertex pv = M_.vertex(pkey);
        std::vector<Fq> child = pv.mu;
        child.push_back(0);
        for (uint64_t lam = 0; lam < q; ++lam) {
          Fq acc = 0;
          for (uint64_t i = 0; i < dim; ++i)
            if (c[i]) acc = F.add(acc, F.mul(V[lam * dim + i], c[i]));
          if (!acc) continue;
          child.back() = static_cast<Fq>(lam);
          uint64_t ck = M_.key(side, m, child);
          auto it = u.find(ck);
          if (it == u.end()) {
            SymVec w(dim, 0);
            w[value_idx] = F.neg(acc);
            u.emplace(ck, std::move(w));
          } else {
            it->second[value_idx] = F.sub(it->second[value_idx], acc);
          }
        }
        // subtract the inward / cross part of T on the parent vertex
        if (m - 1 >= 1) {
          Fq tb = side == 0 ? c[box.top()] : c[0];
          if (tb) {
            std::vector<Fq> gp(pv.mu.begin(), pv.mu.end() - 1);
            SymVec w = inward_value(side, pv.mu.back(), tb);
            uint64_t gk = M_.key(side, m - 2, gp);
            auto it = u.find(gk);
            if (it == u.end()) {
              for (auto& x : w) x = F.neg(x);
              u.emplace(gk, std::move(w));
            } else {
              for (uint64_t i = 0; i < dim; ++i) it->second[i] = F.sub(it->second[i], w[i]);
            }
          }
        } else {
          Fq tb = side == 0 ? c[box.top()] : c[0];
          if (tb) {
            uint64_t ck = M_.key(1 - side, 0, {});
            uint64_t vi = side == 0 ? box.top() : 0;
            auto it = u.find(ck);
            if (it == u.end()) {
              SymVec w(dim, 0);
              w[vi] = F.neg(tb);
              u.emplace(ck, std::move(w));
            } else {
              it->second[vi] = F.sub(it->second[vi], tb);
            }
          }
        }
      }
    }
    if (m == 1) break;
  }
  for (auto it = u.begin(); it != u.end();) {
    bool zero = std::all_of(it->second.begin(), it->second.end(), [](Fq c) { return c == 0; });
    it = zero ? u.erase(it) : std::next(it);
  }
  return u;
}

bool HeckeOps::in_T_image(const InducedElement& y, uint32_t budget,
                          InducedElement* preimage) const {
  InducedElement res = reduce_mod_T(y, budget, preimage);
  if (!M_.is_zero(res)) {
    if (preimage) preimage->clear();
    return false;
  }
  return true;
}

InducedElement build_monomial(const GModel& M, uint32_t side, uint32_t n,
                              const std::vector<uint64_t>& digit_exps, uint64_t value_index,
                              Fq coeff) {
  if (digit_exps.size() != n) throw std::invalid_argument("build_monomial: arity mismatch");
  const FieldCtx& F = M.F();
  InducedElement out;
  if (coeff == 0) return out;
  for (uint64_t k : M.level_keys(side, n)) {
    TreeVertex v = M.vertex(k);
    Fq c = coeff;
    for (uint32_t i = 0; i < n && c; ++i)
      c = F.mul(c, F.pow(v.mu[i], static_cast<int64_t>(digit_exps[i])));
    if (!c) continue;
    SymVec w(M.box().dim, 0);
    w[value_index] = c;
    out.emplace(k, std::move(w));
  }
  return out;
}

InducedElement build_s(const GModel& M, uint32_t n, uint64_t k) {
  if (n == 0) {
    if (k != 0) throw std::invalid_argument("build_s: level 0 needs k = 0");
    SymVec w(M.box().dim, 0);
    w[0] = 1;
    InducedElement out;
    out.emplace(M.key(0, 0, {}), std::move(w));
    return out;
  }
  std::vector<uint64_t> exps(n, 0);
  exps[n - 1] = k;
  return build_monomial(M, 0, n, exps, 0);
}

InducedElement build_t(const GModel& M, uint32_t n, uint32_t k) {
  if (k >= M.f()) throw std::invalid_argument("build_t: k must be below f");
  if (M.weight().r_vec[k] < 1) throw std::invalid_argument("build_t: needs r_k >= 1");
  std::vector<uint32_t> idx(M.f(), 0);
  idx[k] = 1;
  return build_t_vec(M, n, idx);
}

InducedElement build_t_vec(const GModel& M, uint32_t n, const std::vector<uint32_t>& kvec) {
  if (kvec.size() != M.f()) throw std::invalid_argument("build_t_vec: bad arity");
  for (size_t j = 0; j < kvec.size(); ++j)
    if (kvec[j] > M.weight().r_vec[j])
      throw std::invalid_argument("build_t_vec: index outside the box");
  uint64_t flat = M.box().flatten(kvec);
  if (n == 0) {
    SymVec w(M.box().dim, 0);
    w[flat] = 1;
    InducedElement out;
    out.emplace(M.key(0, 0, {}), std::move(w));
    return out;
  }
  return build_monomial(M, 0, n, std::vector<uint64_t>(n, 0), flat);
}

InducedElement build_A0(const GModel& M, uint32_t n) { return build_s(M, n, 0); }

InducedElement build_A1(const GModel& M, uint32_t n) {
  return M.act(M.beta(), build_A0(M, n));
}

}  // namespace treerep
