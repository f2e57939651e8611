#include "treerep/gfq.hpp"

#include <algorithm>
#include <cassert>

namespace treerep {

namespace {

// Dense polynomial arithmetic over GF(p), coefficient vectors little-endian.
using Poly = std::vector<uint32_t>;

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

Poly poly_mul(const Poly& a, const Poly& b, uint64_t p) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      c[i + j] = static_cast<uint32_t>((c[i + j] + uint64_t(a[i]) * b[j]) % p);
  trim(c);
  return c;
}

Poly poly_mod(Poly a, const Poly& f, uint64_t p) {
  // f monic
  trim(a);
  while (a.size() >= f.size()) {
    uint64_t lead = a.back();
    size_t shift = a.size() - f.size();
    for (size_t i = 0; i < f.size(); ++i) {
      uint64_t sub = (lead * f[i]) % p;
      a[shift + i] = static_cast<uint32_t>((a[shift + i] + p - sub) % p);
    }
    trim(a);
  }
  return a;
}

Poly poly_powmod(Poly base, uint64_t e, const Poly& f, uint64_t p) {
  Poly r = {1};
  base = poly_mod(std::move(base), f, p);
  while (e) {
    if (e & 1) r = poly_mod(poly_mul(r, base, p), f, p);
    base = poly_mod(poly_mul(base, base, p), f, p);
    e >>= 1;
  }
  return r;
}

Poly poly_gcd(Poly a, Poly b, uint64_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    // make b monic
    uint64_t lb = b.back();
    if (lb != 1) {
      // modular inverse of lb
      uint64_t inv = 1, base = lb, e = p - 2;
      while (e) {
        if (e & 1) inv = inv * base % p;
        base = base * base % p;
        e >>= 1;
      }
      for (auto& c : b) c = static_cast<uint32_t>(c * inv % p);
    }
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

bool is_irreducible(const Poly& f, uint64_t p) {
  // f monic of degree m >= 1: irreducible iff gcd(f, x^{p^d} - x) = 1 for
  // 1 <= d <= m/2.
  size_t m = f.size() - 1;
  if (m == 1) return true;
  Poly x = {0, 1};
  Poly xp = x;
  for (size_t d = 1; d <= m / 2; ++d) {
    xp = poly_powmod(xp, p, f, p);  // x^{p^d} mod f
    Poly diff = xp;
    if (diff.size() < 2) diff.resize(2, 0);
    diff[1] = static_cast<uint32_t>((diff[1] + p - 1) % p);
    trim(diff);
    Poly g = poly_gcd(f, diff, p);
    if (!(g.size() == 1)) return false;
  }
  return true;
}

uint64_t ipow(uint64_t b, uint64_t e) {
  uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace

FieldCtx::FieldCtx(uint64_t p, uint64_t m) : p_(p), m_(m) {
  if (p < 3 || m < 1) throw std::invalid_argument("FieldCtx: need odd prime p and m >= 1");
  for (uint64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) throw std::invalid_argument("FieldCtx: p not prime");
  q_ = ipow(p, m);
  // least monic irreducible of degree m, coefficient vectors ordered by index
  modulus_.assign(m + 1, 0);
  modulus_[m] = 1;
  if (m == 1) {
    // x itself would be reducible only in the trivial sense; x + 0 is fine?
    // For m = 1 the modulus is x (quotient is GF(p)); arithmetic never uses it.
    modulus_ = {0, 1};
  } else {
    bool found = false;
    for (uint64_t k = 0; k < q_ && !found; ++k) {
      Poly f(m + 1, 0);
      uint64_t t = k;
      for (uint64_t i = 0; i < m; ++i) {
        f[i] = static_cast<uint32_t>(t % p);
        t /= p;
      }
      f[m] = 1;
      if (f[0] == 0) continue;  // divisible by x
      if (is_irreducible(f, p)) {
        modulus_.assign(f.begin(), f.end());
        found = true;
      }
    }
    if (!found) throw std::logic_error("FieldCtx: no irreducible found");
  }
  if (q_ <= kTableLimit) build_tables();
  // multiplicative generator
  gen_ = 0;
  for (Fq c = 1; c < q_; ++c) {
    Fq x = c;
    uint64_t ord = 1;
    while (x != 1) {
      x = mul(x, c);
      ++ord;
    }
    if (ord == q_ - 1) {
      gen_ = c;
      break;
    }
  }
}

Fq FieldCtx::from_int(int64_t v) const {
  int64_t r = v % static_cast<int64_t>(p_);
  if (r < 0) r += static_cast<int64_t>(p_);
  return static_cast<Fq>(r);
}

std::vector<uint32_t> FieldCtx::coords(Fq a) const {
  std::vector<uint32_t> c(m_);
  for (uint64_t i = 0; i < m_; ++i) {
    c[i] = static_cast<uint32_t>(a % p_);
    a = static_cast<Fq>(a / p_);
  }
  return c;
}

Fq FieldCtx::from_coords(const std::vector<uint32_t>& c) const {
  if (c.size() != m_) throw std::invalid_argument("from_coords: wrong length");
  uint64_t idx = 0;
  for (size_t i = c.size(); i-- > 0;) idx = idx * p_ + (c[i] % p_);
  return static_cast<Fq>(idx);
}

Fq FieldCtx::add_slow(Fq a, Fq b) const {
  uint64_t idx = 0, mult = 1;
  for (uint64_t i = 0; i < m_; ++i) {
    idx += mult * ((a % p_ + b % p_) % p_);
    a /= p_;
    b /= p_;
    mult *= p_;
  }
  return static_cast<Fq>(idx);
}

Fq FieldCtx::mul_slow(Fq a, Fq b) const {
  Poly pa(m_), pb(m_);
  for (uint64_t i = 0; i < m_; ++i) {
    pa[i] = a % p_;
    a /= p_;
    pb[i] = b % p_;
    b /= p_;
  }
  Poly pc = poly_mod(poly_mul(pa, pb, p_), Poly(modulus_.begin(), modulus_.end()), p_);
  uint64_t idx = 0;
  for (size_t i = pc.size(); i-- > 0;) idx = idx * p_ + pc[i];
  return static_cast<Fq>(idx);
}

void FieldCtx::build_tables() {
  tables_ = true;
  mul_tab_.assign(q_ * q_, 0);
  add_tab_.assign(q_ * q_, 0);
  for (uint64_t a = 0; a < q_; ++a)
    for (uint64_t b = a; b < q_; ++b) {
      Fq pr = mul_slow(static_cast<Fq>(a), static_cast<Fq>(b));
      mul_tab_[a * q_ + b] = pr;
      mul_tab_[b * q_ + a] = pr;
      Fq s = add_slow(static_cast<Fq>(a), static_cast<Fq>(b));
      add_tab_[a * q_ + b] = s;
      add_tab_[b * q_ + a] = s;
    }
  neg_tab_.assign(q_, 0);
  for (uint64_t a = 0; a < q_; ++a) {
    std::vector<uint32_t> c = coords(static_cast<Fq>(a));
    for (auto& x : c) x = static_cast<uint32_t>((p_ - x) % p_);
    neg_tab_[a] = from_coords(c);
  }
  inv_tab_.assign(q_, 0);
  for (uint64_t a = 1; a < q_; ++a) {
    if (inv_tab_[a]) continue;
    for (uint64_t b = 1; b < q_; ++b)
      if (mul_tab_[a * q_ + b] == 1) {
        inv_tab_[a] = static_cast<Fq>(b);
        inv_tab_[b] = static_cast<Fq>(a);
        break;
      }
  }
  frob_tab_.assign(q_, 0);
  for (uint64_t a = 0; a < q_; ++a) {
    Fq r = 1;
    for (uint64_t i = 0; i < p_; ++i) r = mul_tab_[r * q_ + a];
    frob_tab_[a] = r;
  }
}

Fq FieldCtx::add(Fq a, Fq b) const { return tables_ ? add_tab_[uint64_t(a) * q_ + b] : add_slow(a, b); }

Fq FieldCtx::sub(Fq a, Fq b) const { return add(a, neg(b)); }

Fq FieldCtx::neg(Fq a) const {
  if (tables_) return neg_tab_[a];
  std::vector<uint32_t> c = coords(a);
  for (auto& x : c) x = static_cast<uint32_t>((p_ - x) % p_);
  return from_coords(c);
}

Fq FieldCtx::mul(Fq a, Fq b) const { return tables_ ? mul_tab_[uint64_t(a) * q_ + b] : mul_slow(a, b); }

Fq FieldCtx::inv(Fq a) const {
  if (a == 0) throw std::domain_error("FieldCtx::inv: zero has no inverse");
  if (tables_) return inv_tab_[a];
  return pow(a, static_cast<int64_t>(q_) - 2);
}

Fq FieldCtx::pow(Fq a, int64_t e) const {
  uint64_t ee;
  if (e < 0) {
    a = inv(a);
    ee = static_cast<uint64_t>(-e);
  } else {
    ee = static_cast<uint64_t>(e);
  }
  if (a == 0) return ee == 0 ? 1 : 0;
  ee %= (q_ - 1);
  Fq r = 1, base = a;
  while (ee) {
    if (ee & 1) r = mul(r, base);
    base = mul(base, base);
    ee >>= 1;
  }
  return r;
}

Fq FieldCtx::frobenius(Fq a) const {
  if (tables_) return frob_tab_[a];
  return pow(a, static_cast<int64_t>(p_));
}

Fq FieldCtx::frobenius_iter(Fq a, uint64_t k) const {
  for (uint64_t i = 0; i < k; ++i) a = frobenius(a);
  return a;
}

SubfieldEmbed::SubfieldEmbed(const FieldCtx& small, const FieldCtx& big) {
  if (small.p() != big.p() || big.m() % small.m() != 0)
    throw std::invalid_argument("SubfieldEmbed: not a subfield pair");
  const uint64_t p = small.p();
  // least root of the small modulus inside the big field
  Fq root = 0;
  bool found = false;
  for (uint64_t x = 0; x < big.q() && !found; ++x) {
    Fq acc = 0, xp = 1;
    for (size_t i = 0; i < small.modulus().size(); ++i) {
      acc = big.add(acc, big.mul(big.from_int(small.modulus()[i]), xp));
      xp = big.mul(xp, static_cast<Fq>(x));
    }
    if (acc == 0 && (small.m() > 1 || x == 0)) {
      // for m = 1 the modulus is x; the embedding is the prime-field one
      root = static_cast<Fq>(x);
      found = true;
    }
  }
  if (small.m() == 1) {
    found = true;
    root = 0;
  }
  if (!found) throw std::logic_error("SubfieldEmbed: no root found");
  tab_.assign(small.q(), 0);
  for (uint64_t a = 0; a < small.q(); ++a) {
    auto c = small.coords(static_cast<Fq>(a));
    Fq acc = 0, rp = 1;
    for (uint64_t i = 0; i < small.m(); ++i) {
      acc = big.add(acc, big.mul(big.from_int(c[i]), rp));
      rp = big.mul(rp, root);
    }
    tab_[a] = acc;
  }
}

uint64_t binom_mod_p(uint64_t n, uint64_t k, uint64_t p) {
  if (k > n) return 0;
  // Pascal triangle for digits below p
  static thread_local uint64_t cached_p = 0;
  static thread_local std::vector<uint64_t> small;
  if (cached_p != p) {
    small.assign(p * p, 0);
    for (uint64_t a = 0; a < p; ++a) {
      small[a * p + 0] = 1 % p;
      for (uint64_t b = 1; b <= a; ++b)
        small[a * p + b] =
            (small[(a - 1) * p + b - 1] + (b <= a - 1 ? small[(a - 1) * p + b] : 0)) % p;
    }
    cached_p = p;
  }
  uint64_t r = 1 % p;
  while (n || k) {
    uint64_t nd = n % p, kd = k % p;
    if (kd > nd) return 0;
    r = r * small[nd * p + kd] % p;
    n /= p;
    k /= p;
  }
  return r;
}

uint64_t nu_p_factorial(uint64_t n, uint64_t p) {
  uint64_t s = 0, t = n;
  while (t) {
    s += t % p;
    t /= p;
  }
  return (n - s) / (p - 1);
}

uint64_t nu_p(uint64_t n, uint64_t p) {
  if (n == 0) throw std::invalid_argument("nu_p of zero");
  uint64_t v = 0;
  while (n % p == 0) {
    ++v;
    n /= p;
  }
  return v;
}

uint64_t nu_p_binom_prime_power(uint64_t k, uint64_t m, uint64_t p) {
  uint64_t pk = 1;
  for (uint64_t i = 0; i < k; ++i) pk *= p;
  if (m == 0 || m > pk) throw std::invalid_argument("nu_p_binom_prime_power: need 0 < m <= p^k");
  return k - nu_p(m, p);
}

namespace {

// Per-axis inverse Vandermonde over all of F_q: column d of V is x -> x^d.
std::vector<Fq> vandermonde_inverse(const FieldCtx& F) {
  const uint64_t q = F.q();
  std::vector<Fq> A(q * 2 * q, 0);  // [V | I]
  for (uint64_t x = 0; x < q; ++x)
    for (uint64_t d = 0; d < q; ++d)
      A[x * 2 * q + d] = F.pow(static_cast<Fq>(x), static_cast<int64_t>(d));
  for (uint64_t x = 0; x < q; ++x) A[x * 2 * q + q + x] = 1;
  // Gauss-Jordan
  for (uint64_t col = 0; col < q; ++col) {
    uint64_t piv = col;
    while (piv < q && A[piv * 2 * q + col] == 0) ++piv;
    if (piv == q) throw std::logic_error("vandermonde singular");
    if (piv != col)
      for (uint64_t j = 0; j < 2 * q; ++j) std::swap(A[piv * 2 * q + j], A[col * 2 * q + j]);
    Fq s = F.inv(A[col * 2 * q + col]);
    for (uint64_t j = 0; j < 2 * q; ++j) A[col * 2 * q + j] = F.mul(A[col * 2 * q + j], s);
    for (uint64_t r = 0; r < q; ++r) {
      if (r == col) continue;
      Fq f = A[r * 2 * q + col];
      if (f == 0) continue;
      for (uint64_t j = 0; j < 2 * q; ++j)
        A[r * 2 * q + j] = F.sub(A[r * 2 * q + j], F.mul(f, A[col * 2 * q + j]));
    }
  }
  std::vector<Fq> inv(q * q);
  for (uint64_t r = 0; r < q; ++r)
    for (uint64_t c = 0; c < q; ++c) inv[r * q + c] = A[r * 2 * q + q + c];
  return inv;
}

}  // namespace

ReducedPoly reduced_interpolate(const FieldCtx& F, uint32_t nvars,
                                const std::vector<Fq>& values) {
  const uint64_t q = F.q();
  uint64_t total = 1;
  for (uint32_t i = 0; i < nvars; ++i) total *= q;
  if (values.size() != total)
    throw std::invalid_argument("reduced_interpolate: table must cover the full grid");
  std::vector<Fq> Vinv = vandermonde_inverse(F);
  std::vector<Fq> cur = values;
  // transform one axis at a time: coefficients c = Vinv * values
  uint64_t stride = 1;
  for (uint32_t ax = 0; ax < nvars; ++ax) {
    std::vector<Fq> next(cur.size(), 0);
    uint64_t outer = total / (stride * q);
    for (uint64_t o = 0; o < outer; ++o)
      for (uint64_t in = 0; in < stride; ++in) {
        uint64_t base = o * stride * q + in;
        for (uint64_t d = 0; d < q; ++d) {
          Fq acc = 0;
          for (uint64_t x = 0; x < q; ++x)
            acc = F.add(acc, F.mul(Vinv[d * q + x], cur[base + x * stride]));
          next[base + d * stride] = acc;
        }
      }
    cur = std::move(next);
    stride *= q;
  }
  return ReducedPoly{nvars, std::move(cur)};
}

Fq eval_poly(const FieldCtx& F, const ReducedPoly& P, const std::vector<Fq>& point) {
  if (point.size() != P.nvars) throw std::invalid_argument("eval_poly: wrong arity");
  const uint64_t q = F.q();
  // Horner from the last axis inward
  std::vector<Fq> cur = P.coeff;
  uint64_t size = cur.size();
  for (uint32_t ax = P.nvars; ax-- > 0;) {
    uint64_t stride = size / q;
    std::vector<Fq> next(stride, 0);
    Fq x = point[ax];
    for (uint64_t i = 0; i < stride; ++i) {
      Fq acc = 0;
      for (uint64_t d = q; d-- > 0;) acc = F.add(F.mul(acc, x), cur[i + d * stride]);
      next[i] = acc;
    }
    cur = std::move(next);
    size = stride;
  }
  return cur[0];
}

std::vector<Fq> eval_poly_grid(const FieldCtx& F, const ReducedPoly& P) {
  const uint64_t q = F.q();
  uint64_t total = 1;
  for (uint32_t i = 0; i < P.nvars; ++i) total *= q;
  std::vector<Fq> out(total);
  std::vector<Fq> pt(P.nvars);
  for (uint64_t idx = 0; idx < total; ++idx) {
    uint64_t t = idx;
    for (uint32_t i = 0; i < P.nvars; ++i) {
      pt[i] = static_cast<Fq>(t % q);
      t /= q;
    }
    out[idx] = eval_poly(F, P, pt);
  }
  return out;
}

}  // namespace treerep
