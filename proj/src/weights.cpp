#include "treerep/weights.hpp"

#include <algorithm>
#include <cassert>

namespace treerep {

namespace {

uint64_t ipow(uint64_t b, uint64_t e) {
  uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

uint64_t mod_qm1(int64_t v, uint64_t qm1) {
  int64_t m = v % static_cast<int64_t>(qm1);
  if (m < 0) m += static_cast<int64_t>(qm1);
  return static_cast<uint64_t>(m);
}

}  // namespace

Box::Box(const std::vector<uint32_t>& r_vec, uint64_t p_) : r(r_vec), p(p_) {
  stride.resize(r.size());
  dim = 1;
  for (size_t j = 0; j < r.size(); ++j) {
    stride[j] = dim;
    dim *= r[j] + 1;
  }
  exponent.resize(dim);
  for (uint64_t flat = 0; flat < dim; ++flat) {
    uint64_t t = flat, e = 0, pw = 1;
    for (size_t j = 0; j < r.size(); ++j) {
      e += (t % (r[j] + 1)) * pw;
      t /= r[j] + 1;
      pw *= p;
    }
    exponent[flat] = e;
  }
}

std::vector<uint32_t> Box::unflatten(uint64_t flat) const {
  std::vector<uint32_t> idx(r.size());
  for (size_t j = 0; j < r.size(); ++j) {
    idx[j] = static_cast<uint32_t>(flat % (r[j] + 1));
    flat /= r[j] + 1;
  }
  return idx;
}

uint64_t Box::flatten(const std::vector<uint32_t>& idx) const {
  uint64_t flat = 0;
  for (size_t j = idx.size(); j-- > 0;) flat = flat * (r[j] + 1) + idx[j];
  return flat;
}

namespace {

// Single-factor action matrix: column i -> coefficients over k of
// (a x + c y)^{R-i} (b x + d y)^i on the basis x^{R-k} y^k.
std::vector<Fq> factor_matrix(const FieldCtx& F, uint32_t R, Fq a, Fq b, Fq c, Fq d) {
  const uint64_t n = R + 1;
  std::vector<Fq> M(n * n, 0);
  for (uint32_t i = 0; i <= R; ++i) {
    for (uint32_t s = 0; s <= R - i; ++s) {
      Fq left = F.mul(F.from_int(static_cast<int64_t>(binom_mod_p(R - i, s, F.p()))),
                      F.mul(F.pow(a, R - i - s), F.pow(c, s)));
      if (left == 0) continue;
      for (uint32_t t = 0; t <= i; ++t) {
        Fq right = F.mul(F.from_int(static_cast<int64_t>(binom_mod_p(i, t, F.p()))),
                         F.mul(F.pow(b, i - t), F.pow(d, t)));
        if (right == 0) continue;
        uint32_t k = s + t;
        M[uint64_t(k) * n + i] = F.add(M[uint64_t(k) * n + i], F.mul(left, right));
      }
    }
  }
  return M;
}

}  // namespace

std::vector<Fq> sym_matrix(const FieldCtx& F, const SerreWeight& wt, const Box& box,
                           const Mat2q& g) {
  Fq det = F.sub(F.mul(g.a, g.d), F.mul(g.b, g.c));
  if (det == 0) throw std::domain_error("sym_matrix: singular matrix");
  Fq twist = F.pow(det, static_cast<int64_t>(wt.w));
  const uint64_t f = wt.f();
  std::vector<std::vector<Fq>> per(f);
  Fq a = g.a, b = g.b, c = g.c, d = g.d;
  for (uint64_t j = 0; j < f; ++j) {
    per[j] = factor_matrix(F, wt.r_vec[j], a, b, c, d);
    a = F.frobenius(a);
    b = F.frobenius(b);
    c = F.frobenius(c);
    d = F.frobenius(d);
  }
  std::vector<Fq> M(box.dim * box.dim, 0);
  std::vector<uint32_t> ki(f), ii(f);
  for (uint64_t k = 0; k < box.dim; ++k) {
    ki = box.unflatten(k);
    for (uint64_t i = 0; i < box.dim; ++i) {
      ii = box.unflatten(i);
      Fq prod = twist;
      for (uint64_t j = 0; j < f && prod; ++j)
        prod = F.mul(prod, per[j][uint64_t(ki[j]) * (wt.r_vec[j] + 1) + ii[j]]);
      M[k * box.dim + i] = prod;
    }
  }
  return M;
}

SymVec sym_apply(const FieldCtx& F, const SerreWeight& wt, const Box& box, const Mat2q& g,
                 const SymVec& v) {
  Fq det = F.sub(F.mul(g.a, g.d), F.mul(g.b, g.c));
  if (det == 0) throw std::domain_error("sym_apply: singular matrix");
  const uint64_t f = wt.f();
  SymVec cur = v;
  Fq a = g.a, b = g.b, c = g.c, d = g.d;
  for (uint64_t j = 0; j < f; ++j) {
    std::vector<Fq> M = factor_matrix(F, wt.r_vec[j], a, b, c, d);
    const uint64_t n = wt.r_vec[j] + 1;
    const uint64_t stride = box.stride[j];
    SymVec next(box.dim, 0);
    for (uint64_t base = 0; base < box.dim; ++base) {
      if (cur[base] == 0) continue;
      uint64_t i = (base / stride) % n;
      uint64_t rem = base - i * stride;
      for (uint64_t k = 0; k < n; ++k) {
        Fq m = M[k * n + i];
        if (m) next[rem + k * stride] = F.add(next[rem + k * stride], F.mul(m, cur[base]));
      }
    }
    cur = std::move(next);
    a = F.frobenius(a);
    b = F.frobenius(b);
    c = F.frobenius(c);
    d = F.frobenius(d);
  }
  Fq twist = F.pow(det, static_cast<int64_t>(wt.w));
  if (twist != 1)
    for (auto& x : cur) x = F.mul(x, twist);
  return cur;
}

ICharacter char_of_invariant(const FieldCtx& F, const SerreWeight& wt, uint64_t k_total) {
  uint64_t qm1 = F.q() - 1;
  uint64_t r = wt.r_param(F.p());
  return ICharacter{mod_qm1(static_cast<int64_t>(r + wt.w) - static_cast<int64_t>(k_total), qm1),
                    (wt.w + k_total) % qm1};
}

ICharacter char_of_element(const FieldCtx& F, const SerreWeight& wt, ElementKind kind,
                           uint64_t k, const std::vector<uint32_t>& kvec) {
  switch (kind) {
    case ElementKind::s_n_k:
      return char_of_invariant(F, wt, k % (F.q() - 1));
    case ElementKind::t_n_k: {
      if (k >= wt.f()) throw std::invalid_argument("char_of_element: t_n^k needs k < f");
      if (wt.r_vec[k] < 1) throw std::invalid_argument("char_of_element: t_n^k needs r_k >= 1");
      return char_of_invariant(F, wt, ipow(F.p(), k));
    }
    case ElementKind::t_n_kvec: {
      if (kvec.size() != wt.f()) throw std::invalid_argument("char_of_element: bad kvec size");
      uint64_t tot = 0, pw = 1;
      for (size_t j = 0; j < kvec.size(); ++j) {
        if (kvec[j] > wt.r_vec[j])
          throw std::invalid_argument("char_of_element: kvec digit out of range");
        tot += kvec[j] * pw;
        pw *= F.p();
      }
      return char_of_invariant(F, wt, tot);
    }
    case ElementKind::A_n_0:
      return char_of_invariant(F, wt, 0);
    case ElementKind::A_n_1:
      return char_swap(char_of_invariant(F, wt, 0));
  }
  throw std::logic_error("char_of_element: bad kind");
}

std::vector<uint32_t> param_digits(uint64_t p, uint64_t f, uint64_t r) {
  uint64_t qm1 = ipow(p, f) - 1;
  r %= qm1;
  std::vector<uint32_t> d(f);
  for (uint64_t j = 0; j < f; ++j) {
    d[j] = static_cast<uint32_t>(r % p);
    r /= p;
  }
  return d;
}

SerreWeight weight_from_char(uint64_t p, uint64_t f, const ICharacter& chi) {
  uint64_t qm1 = ipow(p, f) - 1;
  uint64_t delta = mod_qm1(static_cast<int64_t>(chi.a_exp) - static_cast<int64_t>(chi.d_exp), qm1);
  std::vector<uint32_t> d = param_digits(p, f, delta);
  for (auto dj : d)
    if (dj < 1 || dj > p - 2)
      throw std::domain_error(
          "weight_from_char: irregular character (digit 0 or p-1), weight is ambiguous");
  return SerreWeight{d, chi.d_exp % qm1};
}

uint64_t apply_A(uint64_t p, uint64_t f, uint32_t j, uint64_t r) {
  if (j >= f) throw std::invalid_argument("apply_A: digit index out of range");
  uint64_t qm1 = ipow(p, f) - 1;
  uint64_t rj = param_digits(p, f, r)[j];
  return mod_qm1(static_cast<int64_t>(r % qm1) - 2 * static_cast<int64_t>((rj + 1) * ipow(p, j)),
                 qm1);
}

uint64_t apply_A_w(uint64_t p, uint64_t f, uint32_t j, uint64_t r, uint64_t w) {
  uint64_t qm1 = ipow(p, f) - 1;
  uint64_t rj = param_digits(p, f, r)[j];
  return (w + (rj + 1) * ipow(p, j)) % qm1;
}

WeightParam r_J_wJ(uint64_t p, uint64_t f, const std::vector<uint32_t>& J,
                   const SerreWeight& seed) {
  uint64_t qm1 = ipow(p, f) - 1;
  std::vector<bool> in(f, false);
  for (auto j : J) in.at(j) = true;
  int64_t r = 0, w = 0;
  for (uint64_t j = 0; j < f; ++j) {
    int64_t pj = static_cast<int64_t>(ipow(p, j));
    int64_t pj1 = static_cast<int64_t>(ipow(p, j + 1));  // p^f reduces to 1 mod q-1 below
    if (in[j]) {
      bool next_in = in[(j + 1) % f];
      int sign = ((next_in ? 1 : 0) + (j == f - 1 ? 1 : 0)) % 2 ? -1 : 1;
      r += static_cast<int64_t>((p - seed.r_vec[j] - 2)) * pj + sign * pj1;
      // the twist loses p^{j+1} only when the next place starts a fresh
      // det-pair; when j+1 is also in J the pair there absorbs it
      w += static_cast<int64_t>(seed.r_vec[j] + 1) * pj;
      if (j == f - 1 || !in[j + 1]) w -= pj1;
    } else {
      r += static_cast<int64_t>(seed.r_vec[j]) * pj;
    }
  }
  if (in[f - 1] && !in[0]) w += 1;
  return WeightParam{mod_qm1(r, qm1), mod_qm1(w + static_cast<int64_t>(seed.w), qm1)};
}

std::vector<uint32_t> schedule_aJ(uint64_t f, const std::vector<uint32_t>& J) {
  std::vector<bool> in(f, false);
  for (auto j : J) in.at(j) = true;
  std::vector<uint32_t> Jc_up, J_down;
  for (uint32_t j = 0; j < f; ++j)
    if (!in[j]) Jc_up.push_back(j);
  for (uint32_t j = f; j-- > 0;)
    if (in[j]) J_down.push_back(j);
  std::vector<uint32_t> seq;
  if (J.empty()) return seq;
  bool case1 = (in[0] && in[f - 1]) || !in[f - 1];
  if (case1) {
    seq = Jc_up;
    seq.insert(seq.end(), J_down.begin(), J_down.end());
    seq.insert(seq.end(), Jc_up.begin(), Jc_up.end());
  } else {
    uint32_t a = *std::min_element(J.begin(), J.end());
    std::vector<uint32_t> Jac_up;
    for (uint32_t j = a + 1; j < f; ++j)
      if (!in[j]) Jac_up.push_back(j);
    seq = Jac_up;
    seq.insert(seq.end(), J_down.begin(), J_down.end());
    seq.insert(seq.end(), Jac_up.begin(), Jac_up.end());
  }
  return seq;
}

std::string subset_label(const std::vector<uint32_t>& J) {
  std::string s = "{";
  std::vector<uint32_t> sorted = J;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(sorted[i]);
  }
  s += "}";
  return s;
}

namespace {

SerreWeight weight_from_param(uint64_t p, uint64_t f, const WeightParam& pw) {
  return SerreWeight{param_digits(p, f, pw.r), pw.w % (ipow(p, f) - 1)};
}

}  // namespace

std::vector<LabeledWeight> weight_set(const SerreWeight& seed, uint64_t p, uint64_t e,
                                      uint64_t f) {
  std::vector<LabeledWeight> out;
  if (e == 1) {
    for (uint64_t mask = 0; mask < (1ull << f); ++mask) {
      std::vector<uint32_t> J;
      for (uint64_t j = 0; j < f; ++j)
        if (mask & (1ull << j)) J.push_back(static_cast<uint32_t>(j));
      WeightParam pw = r_J_wJ(p, f, J, seed);
      out.push_back(LabeledWeight{weight_from_param(p, f, pw), subset_label(J), J, {}});
    }
    return out;
  }
  if (f != 2) throw std::invalid_argument("weight_set: ramified case needs f = 2");
  uint32_t rmin = *std::min_element(seed.r_vec.begin(), seed.r_vec.end());
  if (2 * e >= rmin) throw std::invalid_argument("weight_set: ramified case needs e < min(r_j)/2");
  uint64_t qm1 = p * p - 1;
  const int64_t r0 = seed.r_vec[0], r1 = seed.r_vec[1];
  const int64_t pe = static_cast<int64_t>(e), pp = static_cast<int64_t>(p);
  for (uint64_t d0 = 0; d0 < e; ++d0)
    for (uint64_t d1 = 0; d1 < e; ++d1) {
      const int64_t i0 = static_cast<int64_t>(d0), i1 = static_cast<int64_t>(d1);
      struct Row {
        std::vector<uint32_t> J;
        int64_t R0, R1, W0, W1;
      };
      const Row rows[4] = {
          {{}, r0 - 2 * i0, r1 - 2 * i1, i0, i1},
          {{1}, r0 - 2 * i0 - 1, pp - r1 + 2 * pe - 2 * i1 - 4, i0, r1 - pe + i1 + 2},
          {{0, 1}, pp - r0 + 2 * pe - 2 * i0 - 3, pp - r1 + 2 * pe - 2 * i1 - 5,
           r0 - pe + i0 + 1, r1 - pe + i1 + 2},
          {{0}, pp - r0 + 2 * pe - 2 * i0 - 4, r1 - 2 * i1 + 1, r0 - pe + i0 + 1,
           pp + i1 - 1},
      };
      for (const auto& row : rows) {
        if (row.R0 < 0 || row.R0 >= pp || row.R1 < 0 || row.R1 >= pp)
          throw std::logic_error("weight_set: parameter out of range, hypotheses violated");
        SerreWeight wgt{{static_cast<uint32_t>(row.R0), static_cast<uint32_t>(row.R1)},
                        mod_qm1(row.W0 + pp * row.W1 + static_cast<int64_t>(seed.w), qm1)};
        std::string label = subset_label(row.J) + ",(" + std::to_string(d0) + "," +
                            std::to_string(d1) + ")";
        out.push_back(LabeledWeight{wgt, label, row.J,
                                    {static_cast<uint32_t>(d0), static_cast<uint32_t>(d1)}});
      }
    }
  return out;
}

}  // namespace treerep
