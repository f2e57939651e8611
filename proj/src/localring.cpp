#include "treerep/localring.hpp"

#include <cassert>

namespace treerep {

namespace {

uint64_t ipow(uint64_t b, uint64_t e) {
  uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace

LocalRing::LocalRing(const LocalParams& par) : par_(par) {
  if (par_.N < 1 || par_.e < 1 || par_.f < 1)
    throw std::invalid_argument("LocalRing: need N, e, f >= 1");
  F_ = std::make_shared<FieldCtx>(par_.p, par_.f);
  if (par_.eis_unit == 0 || par_.eis_unit >= F_->q())
    throw std::invalid_argument("LocalRing: eis_unit must be a residue unit");
  M_ = (par_.N + par_.e - 1) / par_.e;
  pM_ = ipow(par_.p, M_);
  mprec_pow_.resize(par_.e);
  for (uint64_t i = 0; i < par_.e; ++i) {
    uint64_t Mi = (par_.N > i) ? (par_.N - i + par_.e - 1) / par_.e : 0;
    mprec_pow_[i] = ipow(par_.p, Mi);
  }
  phi_.assign(F_->modulus().begin(), F_->modulus().end());

  // Teichmuller lifts: iterate z -> z^q until stable (gains >= 1 p-digit/step)
  teich_tab_.resize(F_->q());
  for (uint64_t mu = 0; mu < F_->q(); ++mu) {
    RElem z(par_.f, 0);
    auto co = F_->coords(static_cast<Fq>(mu));
    for (uint64_t i = 0; i < par_.f; ++i) z[i] = co[i];
    for (uint64_t it = 0; it <= M_; ++it) {
      RElem zq = z;
      for (uint64_t k = 1; k < F_->q(); ++k) zq = r_mul(zq, z);
      z = zq;
    }
    teich_tab_[mu] = z;
  }
  uR_ = teich_tab_[par_.eis_unit];
  uR_inv_ = r_inv(uR_);
}

LocalRing::RElem LocalRing::r_one() const {
  RElem r(par_.f, 0);
  r[0] = 1;
  return r;
}

LocalRing::RElem LocalRing::r_add(const RElem& a, const RElem& b) const {
  RElem r(par_.f);
  for (uint64_t i = 0; i < par_.f; ++i) r[i] = (a[i] + b[i]) % pM_;
  return r;
}

LocalRing::RElem LocalRing::r_sub(const RElem& a, const RElem& b) const {
  RElem r(par_.f);
  for (uint64_t i = 0; i < par_.f; ++i) r[i] = (a[i] + pM_ - b[i]) % pM_;
  return r;
}

LocalRing::RElem LocalRing::r_neg(const RElem& a) const {
  RElem r(par_.f);
  for (uint64_t i = 0; i < par_.f; ++i) r[i] = (pM_ - a[i]) % pM_;
  return r;
}

LocalRing::RElem LocalRing::r_mul(const RElem& a, const RElem& b) const {
  // multiply, then reduce by the monic lift phi of the residue modulus
  std::vector<uint64_t> prod(2 * par_.f - 1, 0);
  for (uint64_t i = 0; i < par_.f; ++i) {
    if (!a[i]) continue;
    for (uint64_t j = 0; j < par_.f; ++j) {
      if (!b[j]) continue;
      prod[i + j] = (prod[i + j] + (unsigned __int128)a[i] * b[j] % pM_) % pM_;
    }
  }
  for (uint64_t d = 2 * par_.f - 2; d + 1 > par_.f; --d) {
    uint64_t lead = prod[d];
    if (!lead) continue;
    prod[d] = 0;
    for (uint64_t i = 0; i < par_.f; ++i) {
      uint64_t sub = (unsigned __int128)lead * phi_[i] % pM_;
      prod[d - par_.f + i] = (prod[d - par_.f + i] + pM_ - sub) % pM_;
    }
  }
  prod.resize(par_.f);
  return prod;
}

LocalRing::RElem LocalRing::r_scale(const RElem& a, uint64_t s) const {
  RElem r(par_.f);
  s %= pM_;
  for (uint64_t i = 0; i < par_.f; ++i) r[i] = (unsigned __int128)a[i] * s % pM_;
  return r;
}

Fq LocalRing::r_residue(const RElem& a) const {
  std::vector<uint32_t> co(par_.f);
  for (uint64_t i = 0; i < par_.f; ++i) co[i] = static_cast<uint32_t>(a[i] % par_.p);
  return F_->from_coords(co);
}

bool LocalRing::r_zero_mod(const RElem& a, uint64_t mod) const {
  for (uint64_t i = 0; i < par_.f; ++i)
    if (a[i] % mod) return false;
  return true;
}

LocalRing::RElem LocalRing::r_inv(const RElem& a) const {
  Fq res = r_residue(a);
  if (res == 0) throw std::domain_error("LocalRing: inverting a non-unit");
  // lift the residue inverse and refine: z <- z(2 - a z)
  RElem z(par_.f, 0);
  auto co = F_->coords(F_->inv(res));
  for (uint64_t i = 0; i < par_.f; ++i) z[i] = co[i];
  RElem two(par_.f, 0);
  two[0] = 2 % pM_;
  for (uint64_t it = 0; it <= M_; ++it) z = r_mul(z, r_sub(two, r_mul(a, z)));
  return z;
}

void LocalRing::canon(Elem& x) const {
  for (uint64_t i = 0; i < par_.e; ++i)
    for (uint64_t j = 0; j < par_.f; ++j) x.c[i][j] %= mprec_pow_[i];
}

LElem LocalRing::zero() const {
  Elem x;
  x.c.assign(par_.e, r_zero());
  x.prec = static_cast<uint32_t>(par_.N);
  return x;
}

LElem LocalRing::one() const {
  Elem x = zero();
  x.c[0] = r_one();
  return x;
}

LElem LocalRing::from_int(int64_t v) const {
  Elem x = zero();
  int64_t m = v % static_cast<int64_t>(pM_);
  if (m < 0) m += static_cast<int64_t>(pM_);
  x.c[0][0] = static_cast<uint64_t>(m);
  canon(x);
  return x;
}

LElem LocalRing::teich(Fq mu) const {
  Elem x = zero();
  x.c[0] = teich_tab_[mu];
  canon(x);
  return x;
}

LElem LocalRing::pi_pow(uint64_t k) const {
  Elem x = one();
  for (uint64_t i = 0; i < k; ++i) x = mul_pi(x);
  x.prec = static_cast<uint32_t>(par_.N);
  return x;
}

LElem LocalRing::add(const Elem& a, const Elem& b) const {
  Elem x;
  x.c.resize(par_.e);
  for (uint64_t i = 0; i < par_.e; ++i) x.c[i] = r_add(a.c[i], b.c[i]);
  x.prec = std::min(a.prec, b.prec);
  canon(x);
  return x;
}

LElem LocalRing::sub(const Elem& a, const Elem& b) const {
  Elem x;
  x.c.resize(par_.e);
  for (uint64_t i = 0; i < par_.e; ++i) x.c[i] = r_sub(a.c[i], b.c[i]);
  x.prec = std::min(a.prec, b.prec);
  canon(x);
  return x;
}

LElem LocalRing::neg(const Elem& a) const {
  Elem x;
  x.c.resize(par_.e);
  for (uint64_t i = 0; i < par_.e; ++i) x.c[i] = r_neg(a.c[i]);
  x.prec = a.prec;
  return x;
}

LElem LocalRing::mul(const Elem& a, const Elem& b) const {
  // convolution in pi with one fold: pi^e = p [u]
  Elem x = zero();
  for (uint64_t i = 0; i < par_.e; ++i) {
    for (uint64_t j = 0; j < par_.e; ++j) {
      RElem t = r_mul(a.c[i], b.c[j]);
      uint64_t d = i + j;
      if (d >= par_.e) {
        d -= par_.e;
        t = r_scale(r_mul(t, uR_), par_.p);
      }
      x.c[d] = r_add(x.c[d], t);
    }
  }
  x.prec = std::min(a.prec, b.prec);
  canon(x);
  return x;
}

LElem LocalRing::inv(const Elem& a) const {
  if (!is_unit(a)) throw std::domain_error("LocalRing::inv: non-unit");
  // Newton: z <- z (2 - a z), doubling pi-adic accuracy
  Elem z = zero();
  z.c[0] = [&] {
    RElem r(par_.f, 0);
    auto co = F_->coords(F_->inv(residue(a)));
    for (uint64_t i = 0; i < par_.f; ++i) r[i] = co[i];
    return r;
  }();
  z.prec = a.prec;
  Elem two = from_int(2);
  two.prec = a.prec;
  uint64_t steps = 1;
  while ((1ull << steps) < par_.N + 1) ++steps;
  for (uint64_t it = 0; it <= steps; ++it) z = mul(z, sub(two, mul(a, z)));
  z.prec = a.prec;
  return z;
}

LElem LocalRing::mul_pi(const Elem& a) const {
  Elem x = zero();
  for (uint64_t i = 0; i + 1 < par_.e; ++i) x.c[i + 1] = a.c[i];
  x.c[0] = r_scale(r_mul(a.c[par_.e - 1], uR_), par_.p);
  x.prec = std::min<uint32_t>(a.prec + 1, static_cast<uint32_t>(par_.N));
  canon(x);
  return x;
}

LElem LocalRing::div_pi_exact(const Elem& a) const {
  if (a.prec == 0) throw std::domain_error("div_pi_exact: no precision left");
  if (!r_zero_mod(a.c[0], par_.p)) throw std::domain_error("div_pi_exact: not divisible by pi");
  Elem x = zero();
  for (uint64_t i = 0; i + 1 < par_.e; ++i) x.c[i] = a.c[i + 1];
  RElem top(par_.f);
  for (uint64_t i = 0; i < par_.f; ++i) top[i] = a.c[0][i] / par_.p;
  x.c[par_.e - 1] = r_mul(top, uR_inv_);
  x.prec = a.prec - 1;
  canon(x);
  return x;
}

Fq LocalRing::residue(const Elem& a) const {
  if (a.prec == 0) throw std::domain_error("residue: no precision left");
  return r_residue(a.c[0]);
}

uint32_t LocalRing::val(const Elem& a) const {
  Elem x = a;
  for (uint32_t v = 0; v < a.prec; ++v) {
    if (r_residue(x.c[0]) != 0) return v;
    x = div_pi_exact(x);
  }
  return a.prec;
}

bool LocalRing::is_zero(const Elem& a) const { return val(a) == a.prec; }

bool LocalRing::eq(const Elem& a, const Elem& b) const {
  return is_zero(sub(a, b));
}

std::vector<Fq> LocalRing::digit_expand(const Elem& a) const {
  std::vector<Fq> d;
  Elem x = a;
  for (uint32_t i = 0; i < a.prec; ++i) {
    Fq mu = residue(x);
    d.push_back(mu);
    x = div_pi_exact(sub(x, [&] {
      Elem t = teich(mu);
      t.prec = x.prec;
      return t;
    }()));
  }
  return d;
}

LElem LocalRing::digit_build(const std::vector<Fq>& digits) const {
  if (digits.size() > par_.N) throw std::invalid_argument("digit_build: too many digits");
  Elem x = zero();
  for (size_t i = digits.size(); i-- > 0;) x = add(mul_pi(x), teich(digits[i]));
  x.prec = static_cast<uint32_t>(par_.N);
  return x;
}

LElem LocalRing::truncate(const Elem& a, uint32_t n) const {
  auto d = digit_expand(a);
  if (n < d.size()) d.resize(n);
  Elem x = digit_build(d);
  x.prec = a.prec;
  return x;
}

Mat2Local mat_identity(const LocalRing& R) {
  return Mat2Local{R.one(), R.zero(), R.zero(), R.one(), 0};
}

Mat2Local mat_mul(const LocalRing& R, const Mat2Local& x, const Mat2Local& y) {
  Mat2Local z;
  z.a = R.add(R.mul(x.a, y.a), R.mul(x.b, y.c));
  z.b = R.add(R.mul(x.a, y.b), R.mul(x.b, y.d));
  z.c = R.add(R.mul(x.c, y.a), R.mul(x.d, y.c));
  z.d = R.add(R.mul(x.c, y.b), R.mul(x.d, y.d));
  z.central = x.central + y.central;
  return z;
}

Fq carry_P0(const LocalRing& R, Fq a, Fq b) {
  const FieldCtx& F = R.residue_field();
  if (R.precision() < R.params().e + 1)
    throw std::invalid_argument("carry_P0: ring precision below e+1");
  LElem lhs = R.add(R.teich(a), R.teich(b));
  LElem rhs = R.teich(F.add(a, b));
  LElem diff = R.sub(lhs, rhs);
  auto d = R.digit_expand(diff);
  for (uint64_t i = 0; i < R.params().e && i < d.size(); ++i)
    if (d[i] != 0) throw std::logic_error("carry_P0: unexpected low-digit carry");
  return d.size() > R.params().e ? d[R.params().e] : 0;
}

Fq carry_P0(uint64_t p, uint64_t f, uint64_t e, Fq a, Fq b) {
  LocalRing R(LocalParams{p, f, e, e + 1, 1});
  return carry_P0(R, a, b);
}

}  // namespace treerep
