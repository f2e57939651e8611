#include "doctest.h"

#include <random>

#include "treerep/hecke.hpp"
#include "treerep/tree.hpp"

using namespace treerep;

namespace {

Mat2Local random_K(const GModel& M, std::mt19937_64& rng) {
  const LocalRing& R = M.R();
  const FieldCtx& F = M.F();
  while (true) {
    auto rnd = [&] {
      std::vector<Fq> d(R.precision());
      for (auto& x : d) x = static_cast<Fq>(rng() % F.q());
      return R.digit_build(d);
    };
    Mat2Local k{rnd(), rnd(), rnd(), rnd(), 0};
    LElem det = R.sub(R.mul(k.a, k.d), R.mul(k.b, k.c));
    if (R.val(det) == 0) return k;
  }
}

InducedElement random_element(const GModel& M, std::mt19937_64& rng, uint32_t max_level,
                              int nverts) {
  InducedElement x;
  const FieldCtx& F = M.F();
  for (int i = 0; i < nverts; ++i) {
    uint32_t lvl = static_cast<uint32_t>(rng() % (max_level + 1));
    uint32_t side = static_cast<uint32_t>(rng() % 2);
    std::vector<Fq> mu(lvl);
    for (auto& d : mu) d = static_cast<Fq>(rng() % F.q());
    SymVec v(M.box().dim);
    for (auto& c : v) c = static_cast<Fq>(rng() % F.q());
    M.add_scaled(x, InducedElement{{M.key(side, lvl, mu), v}}, 1);
  }
  return x;
}

}  // namespace

TEST_CASE("normal form of standard representatives") {
  GModel M(SerreWeight{{3, 3}, 0}, 7, 1, 3);
  for (uint32_t side = 0; side <= 1; ++side)
    for (uint32_t lvl = 0; lvl <= 2; ++lvl) {
      std::vector<Fq> mu(lvl);
      for (uint32_t i = 0; i < lvl; ++i) mu[i] = static_cast<Fq>((i * 13 + 5) % 49);
      TreeVertex v{side, lvl, mu};
      CosetForm nf = M.coset_normal_form(M.mat_of_vertex(v));
      CHECK(nf.vertex.side == side);
      CHECK(nf.vertex.level == lvl);
      CHECK(nf.vertex.mu == mu);
      CHECK(nf.central == 0);
      CHECK(nf.kbar.a == 1);
      CHECK(nf.kbar.b == 0);
      CHECK(nf.kbar.c == 0);
      CHECK(nf.kbar.d == 1);
    }
}

TEST_CASE("beta is the level zero side 1 vertex with antidiagonal part") {
  GModel M(SerreWeight{{3}, 0}, 5, 1, 2);
  CosetForm nf = M.coset_normal_form(M.beta());
  CHECK(nf.vertex.side == 1);
  CHECK(nf.vertex.level == 0);
  CHECK(nf.kbar.a == 0);
  CHECK(nf.kbar.b == 1);
  CHECK(nf.kbar.c == 1);
  CHECK(nf.kbar.d == 0);
}

TEST_CASE("right KZ invariance and central normalization") {
  GModel M(SerreWeight{{2, 2}, 0}, 5, 1, 2);
  const LocalRing& R = M.R();
  std::mt19937_64 rng(5);
  for (int it = 0; it < 30; ++it) {
    uint32_t lvl = static_cast<uint32_t>(rng() % 3);
    uint32_t side = static_cast<uint32_t>(rng() % 2);
    std::vector<Fq> mu(lvl);
    for (auto& d : mu) d = static_cast<Fq>(rng() % 25);
    Mat2Local base = M.mat_of_vertex(TreeVertex{side, lvl, mu});
    Mat2Local k = random_K(M, rng);
    Mat2Local prod = mat_mul(R, base, k);
    // central pi^t via an explicit scalar matrix
    Mat2Local scal{R.pi_pow(1), R.zero(), R.zero(), R.pi_pow(1), 0};
    prod = mat_mul(R, prod, scal);
    CosetForm nf = M.coset_normal_form(prod);
    CHECK(nf.vertex.side == side);
    CHECK(nf.vertex.level == lvl);
    CHECK(nf.vertex.mu == mu);
    CHECK(nf.central == 1);
  }
}

TEST_CASE("normal form is idempotent") {
  GModel M(SerreWeight{{3, 3}, 0}, 7, 2, 2);
  std::mt19937_64 rng(9);
  for (int it = 0; it < 20; ++it) {
    Mat2Local g = random_K(M, rng);
    Mat2Local prod = mat_mul(M.R(), g, M.mat_of_vertex(TreeVertex{1, 1, {static_cast<Fq>(it % 49)}}));
    CosetForm nf = M.coset_normal_form(prod);
    CosetForm nf2 = M.coset_normal_form(M.mat_of_vertex(nf.vertex));
    CHECK(nf2.vertex.side == nf.vertex.side);
    CHECK(nf2.vertex.level == nf.vertex.level);
    CHECK(nf2.vertex.mu == nf.vertex.mu);
  }
}

TEST_CASE("identity acts trivially, beta squared is central") {
  GModel M(SerreWeight{{3, 3}, 4}, 7, 1, 2);
  std::mt19937_64 rng(31);
  InducedElement x = random_element(M, rng, 2, 4);
  CHECK(M.equal(M.act(mat_identity(M.R()), x), x));
  InducedElement y = M.act(M.beta(), M.act(M.beta(), x));
  CHECK(M.equal(y, x));
}

TEST_CASE("upper unipotent translates level one vertices") {
  // (1 b; 0 1) g^0_{1,mu} = g^0_{1,[b0+mu]} times something trivial on x^r
  GModel M(SerreWeight{{3, 3}, 0}, 7, 1, 2);
  const FieldCtx& F = M.F();
  const LocalRing& R = M.R();
  for (Fq b0 : {Fq(1), Fq(5), Fq(23)}) {
    std::vector<Fq> bd(R.precision(), 0);
    bd[0] = b0;
    Mat2Local db = M.delta_b(R.digit_build(bd));
    for (Fq mu = 0; mu < 49; mu = static_cast<Fq>(mu + 7)) {
      SymVec hv(M.box().dim, 0);
      hv[0] = 1;
      InducedElement x{{M.key(0, 1, {mu}), hv}};
      InducedElement y = M.act(db, x);
      REQUIRE(y.size() == 1);
      CHECK(y.begin()->first == M.key(0, 1, {F.add(b0, mu)}));
      CHECK(y.begin()->second == hv);
    }
  }
}

TEST_CASE("action is associative") {
  GModel M(SerreWeight{{2, 2}, 3}, 5, 2, 2);
  std::mt19937_64 rng(77);
  for (int it = 0; it < 15; ++it) {
    Mat2Local g1 = random_K(M, rng), g2 = random_K(M, rng);
    if (it % 3 == 0) g1 = M.beta();
    if (it % 4 == 0) g2 = M.alpha();
    InducedElement x = random_element(M, rng, 1, 3);
    InducedElement lhs = M.act(mat_mul(M.R(), g1, g2), x);
    InducedElement rhs = M.act(g1, M.act(g2, x));
    CHECK(M.equal(lhs, rhs));
  }
}

TEST_CASE("insufficient precision is an error, not a truncation") {
  GModel M(SerreWeight{{2}, 0}, 5, 1, 1, 1, 2);  // precision 3
  const LocalRing& R = M.R();
  // determinant valuation 4 exceeds what 3 digits can resolve
  Mat2Local bad{R.pi_pow(2), R.zero(), R.zero(), R.pi_pow(2), 0};
  Mat2Local prod = mat_mul(R, bad, bad);
  CHECK_THROWS(M.coset_normal_form(prod));
}
