#include "treerep/tree.hpp"

#include <algorithm>
#include <cassert>

namespace treerep {

GModel::GModel(const SerreWeight& wt, uint64_t p, uint64_t e, uint32_t budget, Fq eis_unit,
               uint32_t extra_prec)
    : GModel(wt,
             std::make_shared<LocalRing>(LocalParams{
                 p, wt.f(), e, std::max<uint64_t>(budget + extra_prec, e + 1), eis_unit}),
             budget) {}

GModel::GModel(const SerreWeight& wt, std::shared_ptr<LocalRing> ring, uint32_t budget)
    : wt_(wt), budget_(budget) {
  R_ = std::move(ring);
  F_ = R_->field_ptr();
  p_ = R_->params().p;
  e_ = R_->params().e;
  if (R_->params().f != wt_.f()) throw std::invalid_argument("GModel: ring degree mismatch");
  box_ = Box(wt_.r_vec, p_);
  digit_bits_ = 1;
  while ((1ull << digit_bits_) < F_->q()) ++digit_bits_;
}

uint64_t GModel::key(uint32_t side, uint32_t level, const std::vector<Fq>& mu) const {
  if (level * digit_bits_ > 57) throw std::invalid_argument("vertex key overflow");
  uint64_t k = (uint64_t(level) << 58) | (uint64_t(side) << 57);
  for (uint32_t i = 0; i < level; ++i)
    k |= uint64_t(mu[i]) << (digit_bits_ * (level - 1 - i));
  return k;
}

uint64_t GModel::key(const TreeVertex& v) const { return key(v.side, v.level, v.mu); }

TreeVertex GModel::vertex(uint64_t k) const {
  TreeVertex v;
  v.level = static_cast<uint32_t>(k >> 58);
  v.side = static_cast<uint32_t>((k >> 57) & 1);
  v.mu.resize(v.level);
  for (uint32_t i = 0; i < v.level; ++i)
    v.mu[i] = static_cast<Fq>((k >> (digit_bits_ * (v.level - 1 - i))) & ((1ull << digit_bits_) - 1));
  return v;
}

Mat2Local GModel::mat_of_vertex(const TreeVertex& v) const {
  const LocalRing& R = *R_;
  LElem mu = R.digit_build(v.mu);
  if (v.side == 0)
    return Mat2Local{R.pi_pow(v.level), mu, R.zero(), R.one(), 0};
  return Mat2Local{R.one(), R.zero(), R.mul(R.pi_pow(1), mu), R.pi_pow(v.level + 1), 0};
}

Mat2Local GModel::alpha() const {
  const LocalRing& R = *R_;
  return Mat2Local{R.one(), R.zero(), R.zero(), R.pi_pow(1), 0};
}

Mat2Local GModel::beta() const {
  const LocalRing& R = *R_;
  return Mat2Local{R.zero(), R.one(), R.pi_pow(1), R.zero(), 0};
}

Mat2Local GModel::weyl() const {
  const LocalRing& R = *R_;
  return Mat2Local{R.zero(), R.one(), R.one(), R.zero(), 0};
}

Mat2Local GModel::diag_teich(Fq a, Fq d) const {
  const LocalRing& R = *R_;
  if (a == 0 || d == 0) throw std::invalid_argument("diag_teich: torus entries must be units");
  return Mat2Local{R.teich(a), R.zero(), R.zero(), R.teich(d), 0};
}

Mat2Local GModel::delta_b(const LElem& b) const {
  const LocalRing& R = *R_;
  return Mat2Local{R.one(), b, R.zero(), R.one(), 0};
}

Mat2Local GModel::delta_c(const LElem& c) const {
  const LocalRing& R = *R_;
  return Mat2Local{R.one(), R.zero(), R.mul(R.pi_pow(1), c), R.one(), 0};
}

Mat2Local GModel::delta_a(const LElem& a) const {
  const LocalRing& R = *R_;
  return Mat2Local{R.add(R.mul(R.pi_pow(1), a), R.one()), R.zero(), R.zero(), R.one(), 0};
}

Mat2Local GModel::lower_unipotent(Fq lambda) const {
  const LocalRing& R = *R_;
  return Mat2Local{R.one(), R.zero(), R.teich(lambda), R.one(), 0};
}

CosetForm GModel::coset_normal_form(const Mat2Local& M0) const {
  const LocalRing& R = *R_;
  Mat2Local M = M0;
  uint32_t va = R.val(M.a), vb = R.val(M.b), vc = R.val(M.c), vd = R.val(M.d);
  uint32_t vmin = std::min(std::min(va, vb), std::min(vc, vd));
  uint32_t pmin = std::min(std::min(M.a.prec, M.b.prec), std::min(M.c.prec, M.d.prec));
  if (vmin >= pmin)
    throw std::domain_error("coset_normal_form: matrix vanishes to working precision");
  for (uint32_t i = 0; i < vmin; ++i) {
    M.a = R.div_pi_exact(M.a);
    M.b = R.div_pi_exact(M.b);
    M.c = R.div_pi_exact(M.c);
    M.d = R.div_pi_exact(M.d);
  }
  M.central += vmin;

  LElem det = R.sub(R.mul(M.a, M.d), R.mul(M.b, M.c));
  uint32_t n = R.val(det);
  if (n >= det.prec)
    throw std::domain_error("coset_normal_form: determinant vanishes to working precision");

  pmin = std::min(std::min(M.a.prec, M.b.prec), std::min(M.c.prec, M.d.prec));
  CosetForm out;
  out.central = M.central;
  if (R.val(M.c) == 0 || R.val(M.d) == 0) {
    // side 0, level n
    if (pmin < n + 1) throw std::domain_error("coset_normal_form: insufficient precision");
    LElem muu = (R.val(M.d) == 0) ? R.mul(M.b, R.inv(M.d)) : R.mul(M.a, R.inv(M.c));
    std::vector<Fq> digits = R.digit_expand(muu);
    digits.resize(n);
    out.vertex = TreeVertex{0, n, digits};
    LElem mu = R.digit_build(digits);
    LElem k11 = R.sub(M.a, R.mul(mu, M.c)), k12 = R.sub(M.b, R.mul(mu, M.d));
    for (uint32_t i = 0; i < n; ++i) {
      k11 = R.div_pi_exact(k11);
      k12 = R.div_pi_exact(k12);
    }
    out.kbar = Mat2q{R.residue(k11), R.residue(k12), R.residue(M.c), R.residue(M.d)};
  } else {
    // side 1, level n-1
    if (n == 0) throw std::logic_error("coset_normal_form: primitive matrix inconsistency");
    uint32_t lvl = n - 1;
    if (pmin < n + 1) throw std::domain_error("coset_normal_form: insufficient precision");
    LElem muu = (R.val(M.a) == 0) ? R.mul(R.div_pi_exact(M.c), R.inv(M.a))
                                  : R.mul(R.div_pi_exact(M.d), R.inv(M.b));
    std::vector<Fq> digits = R.digit_expand(muu);
    digits.resize(lvl);
    out.vertex = TreeVertex{1, lvl, digits};
    LElem mu = R.digit_build(digits);
    LElem pimu = R.mul(R.pi_pow(1), mu);
    LElem k21 = R.sub(M.c, R.mul(pimu, M.a)), k22 = R.sub(M.d, R.mul(pimu, M.b));
    for (uint32_t i = 0; i < n; ++i) {
      k21 = R.div_pi_exact(k21);
      k22 = R.div_pi_exact(k22);
    }
    out.kbar = Mat2q{R.residue(M.a), R.residue(M.b), R.residue(k21), R.residue(k22)};
  }
  Fq detk = F_->sub(F_->mul(out.kbar.a, out.kbar.d), F_->mul(out.kbar.b, out.kbar.c));
  if (detk == 0) throw std::logic_error("coset_normal_form: residual part not invertible");
  return out;
}

CosetForm GModel::act_vertex(const Mat2Local& g, uint64_t k) const {
  Mat2Local P = mat_mul(*R_, g, mat_of_vertex(k));
  return coset_normal_form(P);
}

SymVec GModel::transform(const Mat2q& kbar, const SymVec& v) const {
  return sym_apply(*F_, wt_, box_, kbar, v);
}

InducedElement GModel::act(const Mat2Local& g, const InducedElement& x) const {
  InducedElement out;
  for (const auto& [k, v] : x) {
    CosetForm nf = act_vertex(g, k);
    SymVec w = transform(nf.kbar, v);
    uint64_t nk = key(nf.vertex);
    auto it = out.find(nk);
    if (it == out.end()) {
      out.emplace(nk, std::move(w));
    } else {
      for (size_t i = 0; i < w.size(); ++i) it->second[i] = F_->add(it->second[i], w[i]);
    }
  }
  // prune zero values
  for (auto it = out.begin(); it != out.end();) {
    bool zero = std::all_of(it->second.begin(), it->second.end(), [](Fq c) { return c == 0; });
    it = zero ? out.erase(it) : std::next(it);
  }
  return out;
}

uint32_t GModel::max_level(const InducedElement& x) const {
  uint32_t m = 0;
  for (const auto& [k, v] : x) m = std::max(m, static_cast<uint32_t>(k >> 58));
  return m;
}

void GModel::add_scaled(InducedElement& dst, const InducedElement& src, Fq scale) const {
  if (scale == 0) return;
  for (const auto& [k, v] : src) {
    auto it = dst.find(k);
    if (it == dst.end()) {
      SymVec w(v.size());
      for (size_t i = 0; i < v.size(); ++i) w[i] = F_->mul(v[i], scale);
      dst.emplace(k, std::move(w));
    } else {
      for (size_t i = 0; i < v.size(); ++i)
        it->second[i] = F_->add(it->second[i], F_->mul(v[i], scale));
    }
  }
  for (auto it = dst.begin(); it != dst.end();) {
    bool zero = std::all_of(it->second.begin(), it->second.end(), [](Fq c) { return c == 0; });
    it = zero ? dst.erase(it) : std::next(it);
  }
}

bool GModel::is_zero(const InducedElement& x) const {
  for (const auto& [k, v] : x)
    for (Fq c : v)
      if (c) return false;
  return true;
}

bool GModel::equal(const InducedElement& x, const InducedElement& y) const {
  InducedElement d = x;
  add_scaled(d, y, F_->neg(1));
  return is_zero(d);
}

std::vector<uint64_t> GModel::level_keys(uint32_t side, uint32_t level) const {
  std::vector<uint64_t> keys;
  uint64_t q = F_->q(), total = 1;
  for (uint32_t i = 0; i < level; ++i) total *= q;
  keys.reserve(total);
  std::vector<Fq> mu(level, 0);
  for (uint64_t idx = 0; idx < total; ++idx) {
    uint64_t t = idx;
    for (uint32_t i = level; i-- > 0;) {  // mu_0 most significant for lex order
      mu[i] = static_cast<Fq>(t % q);
      t /= q;
    }
    keys.push_back(key(side, level, mu));
  }
  return keys;
}

}  // namespace treerep
