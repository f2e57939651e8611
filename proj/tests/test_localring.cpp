#include "doctest.h"

#include <random>

#include "treerep/localring.hpp"

using namespace treerep;

TEST_CASE("teichmuller digits in Z/25") {
  LocalRing R(LocalParams{5, 1, 1, 2, 1});
  // [1] + [1] has digits (2, 4): [2] = 7 in Z/25 and 2 - 7 = -5
  LElem two = R.add(R.teich(1), R.teich(1));
  CHECK(R.digit_expand(two) == std::vector<Fq>{2, 4});
  CHECK(R.digit_expand(R.from_int(2)) == std::vector<Fq>{2, 4});
  CHECK(carry_P0(R, 1, 1) == 4);
}

TEST_CASE("teichmuller multiplicativity") {
  for (auto par : {LocalParams{5, 2, 1, 3, 1}, LocalParams{7, 1, 2, 4, 1},
                   LocalParams{7, 2, 2, 5, 1}, LocalParams{5, 1, 3, 6, 2}}) {
    LocalRing R(par);
    const FieldCtx& F = R.residue_field();
    for (Fq a = 0; a < F.q(); ++a)
      for (Fq b = 0; b < F.q(); ++b) {
        LElem prod = R.mul(R.teich(a), R.teich(b));
        CHECK(R.eq(prod, R.teich(F.mul(a, b))));
      }
  }
}

TEST_CASE("ring axioms at precision N") {
  std::mt19937_64 rng(7);
  for (auto par : {LocalParams{5, 1, 1, 4, 1}, LocalParams{5, 2, 1, 3, 1},
                   LocalParams{7, 1, 2, 4, 1}, LocalParams{7, 2, 2, 4, 1},
                   LocalParams{5, 1, 2, 5, 3}}) {
    LocalRing R(par);
    const FieldCtx& F = R.residue_field();
    auto rnd = [&] {
      std::vector<Fq> d(par.N);
      for (auto& x : d) x = static_cast<Fq>(rng() % F.q());
      return R.digit_build(d);
    };
    for (int it = 0; it < 40; ++it) {
      LElem a = rnd(), b = rnd(), c = rnd();
      CHECK(R.eq(R.mul(a, R.mul(b, c)), R.mul(R.mul(a, b), c)));
      CHECK(R.eq(R.mul(a, R.add(b, c)), R.add(R.mul(a, b), R.mul(a, c))));
      CHECK(R.eq(R.add(a, b), R.add(b, a)));
      CHECK(R.is_zero(R.add(a, R.neg(a))));
      if (R.is_unit(a)) {
        CHECK(R.eq(R.mul(a, R.inv(a)), R.one()));
      }
    }
    CHECK_THROWS(R.inv(R.pi_pow(1)));
  }
}

TEST_CASE("digit expand and build are inverse") {
  LocalRing R(LocalParams{5, 2, 2, 4, 1});
  const FieldCtx& F = R.residue_field();
  std::mt19937_64 rng(11);
  for (int it = 0; it < 1000; ++it) {
    std::vector<Fq> d(4);
    for (auto& x : d) x = static_cast<Fq>(rng() % F.q());
    CHECK(R.digit_expand(R.digit_build(d)) == d);
  }
  CHECK(R.is_zero(R.digit_build({0, 0, 0, 0})));
}

TEST_CASE("truncate") {
  LocalRing R(LocalParams{5, 1, 1, 3, 1});
  LElem x = R.digit_build({3, 1, 4});
  CHECK(R.digit_expand(R.truncate(x, 2)) == std::vector<Fq>{3, 1, 0});
  CHECK(R.is_zero(R.truncate(x, 0)));
  CHECK(R.eq(R.truncate(x, 3), x));
}

TEST_CASE("carry identity exhaustive") {
  // digits([a]+[b]) match digits([a+b] + pi^e [P0(a,b)]) through position e
  struct Case {
    uint64_t p, f, e;
  };
  for (auto cs : {Case{5, 1, 1}, Case{7, 1, 1}, Case{5, 2, 1}, Case{7, 1, 2}, Case{7, 2, 2}}) {
    LocalRing R(LocalParams{cs.p, cs.f, cs.e, cs.e + 1, 1});
    const FieldCtx& F = R.residue_field();
    for (Fq a = 0; a < F.q(); ++a)
      for (Fq b = 0; b < F.q(); ++b) {
        Fq c = carry_P0(R, a, b);
        LElem lhs = R.add(R.teich(a), R.teich(b));
        LElem rhs = R.add(R.teich(F.add(a, b)), R.mul(R.pi_pow(cs.e), R.teich(c)));
        CHECK(R.eq(lhs, rhs));
      }
    CHECK(carry_P0(R, 3 % F.q(), 0) == 0);
    for (Fq a = 0; a < F.q(); ++a) CHECK(carry_P0(R, a, F.neg(a)) == 0);
  }
}

TEST_CASE("carry closed form for e = f = 1") {
  // P0(a,b) = -(1/p) sum_{s=1}^{p-1} C(p,s) a^s b^{p-s} evaluated in F_p
  for (uint64_t p : {5ull, 7ull, 11ull}) {
    LocalRing R(LocalParams{p, 1, 1, 2, 1});
    const FieldCtx& F = R.residue_field();
    // C(p,s)/p via exact integer Pascal
    std::vector<uint64_t> row{1};
    for (uint64_t n = 1; n <= p; ++n) {
      std::vector<uint64_t> next(n + 1, 1);
      for (uint64_t k = 1; k < n; ++k) next[k] = row[k - 1] + row[k];
      row = std::move(next);
    }
    for (Fq a = 0; a < p; ++a)
      for (Fq b = 0; b < p; ++b) {
        Fq acc = 0;
        for (uint64_t s = 1; s <= p - 1; ++s) {
          Fq term = F.from_int(static_cast<int64_t>(row[s] / p));
          term = F.mul(term, F.mul(F.pow(a, static_cast<int64_t>(s)),
                                   F.pow(b, static_cast<int64_t>(p - s))));
          acc = F.add(acc, term);
        }
        CHECK(carry_P0(R, a, b) == F.neg(acc));
      }
  }
}

TEST_CASE("no carry below pi^e when e > 1") {
  LocalRing R(LocalParams{5, 2, 3, 4, 1});
  const FieldCtx& F = R.residue_field();
  for (Fq a = 0; a < F.q(); ++a)
    for (Fq b = 0; b < F.q(); ++b) {
      auto d = R.digit_expand(R.sub(R.add(R.teich(a), R.teich(b)), R.teich(F.add(a, b))));
      for (uint64_t i = 0; i < 3; ++i) CHECK(d[i] == 0);
    }
}

TEST_CASE("configurable eisenstein unit") {
  LocalRing R(LocalParams{5, 1, 2, 4, 2});  // pi^2 = 5 [2]
  LElem lhs = R.mul(R.pi_pow(1), R.pi_pow(1));
  LElem rhs = R.mul(R.from_int(5), R.teich(2));
  CHECK(R.eq(lhs, rhs));
}

TEST_CASE("matrix product tracks central power") {
  LocalRing R(LocalParams{5, 1, 1, 4, 1});
  Mat2Local a = mat_identity(R);
  a.central = 2;
  Mat2Local b = mat_identity(R);
  b.central = -1;
  Mat2Local c = mat_mul(R, a, b);
  CHECK(c.central == 1);
  CHECK(R.eq(c.a, R.one()));
  CHECK(R.is_zero(c.b));
}
