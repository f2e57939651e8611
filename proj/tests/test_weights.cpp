#include "doctest.h"

#include <map>
#include <random>
#include <set>

#include "treerep/weights.hpp"

using namespace treerep;

namespace {

SymVec basis_vec(const Box& box, uint64_t flat) {
  SymVec v(box.dim, 0);
  v[flat] = 1;
  return v;
}

}  // namespace

TEST_CASE("sym action basics") {
  FieldCtx F(7, 2);
  SerreWeight wt{{3, 3}, 5};
  Box box(wt.r_vec, 7);
  CHECK(box.dim == 16);
  std::mt19937_64 rng(3);
  // identity fixes everything
  for (int it = 0; it < 10; ++it) {
    SymVec v(box.dim);
    for (auto& c : v) c = static_cast<Fq>(rng() % 49);
    CHECK(sym_apply(F, wt, box, Mat2q{1, 0, 0, 1}, v) == v);
  }
  CHECK_THROWS(sym_apply(F, wt, box, Mat2q{1, 1, 1, 1}, basis_vec(box, 0)));

  // diag(a, d) on the highest vector multiplies by a^r (ad)^w
  uint64_t r = wt.r_param(7);
  for (Fq a = 1; a < 10; ++a)
    for (Fq d = 1; d < 10; ++d) {
      SymVec out = sym_apply(F, wt, box, Mat2q{a, 0, 0, d}, basis_vec(box, 0));
      Fq want = F.mul(F.pow(a, static_cast<int64_t>(r)),
                      F.pow(F.mul(a, d), static_cast<int64_t>(wt.w)));
      CHECK(out[0] == want);
      for (uint64_t i = 1; i < box.dim; ++i) CHECK(out[i] == 0);
    }

  // antidiagonal sends the highest vector to (-1)^w times the lowest
  SymVec sw = sym_apply(F, wt, box, Mat2q{0, 1, 1, 0}, basis_vec(box, 0));
  Fq sign = F.pow(F.neg(1), static_cast<int64_t>(wt.w));
  CHECK(sw[box.top()] == sign);
  for (uint64_t i = 0; i < box.top(); ++i) CHECK(sw[i] == 0);
}

TEST_CASE("sym action is multiplicative") {
  FieldCtx F(5, 2);
  SerreWeight wt{{2, 3}, 7};
  Box box(wt.r_vec, 5);
  std::mt19937_64 rng(17);
  auto rnd_gl2 = [&] {
    while (true) {
      Mat2q g{static_cast<Fq>(rng() % 25), static_cast<Fq>(rng() % 25),
              static_cast<Fq>(rng() % 25), static_cast<Fq>(rng() % 25)};
      if (F.sub(F.mul(g.a, g.d), F.mul(g.b, g.c)) != 0) return g;
    }
  };
  for (int it = 0; it < 25; ++it) {
    Mat2q g = rnd_gl2(), h = rnd_gl2();
    Mat2q gh{F.add(F.mul(g.a, h.a), F.mul(g.b, h.c)), F.add(F.mul(g.a, h.b), F.mul(g.b, h.d)),
             F.add(F.mul(g.c, h.a), F.mul(g.d, h.c)), F.add(F.mul(g.c, h.b), F.mul(g.d, h.d))};
    SymVec v(box.dim);
    for (auto& c : v) c = static_cast<Fq>(rng() % 25);
    CHECK(sym_apply(F, wt, box, gh, v) == sym_apply(F, wt, box, g, sym_apply(F, wt, box, h, v)));
    // matrix route agrees with the axis-wise route
    auto Mg = sym_matrix(F, wt, box, g);
    SymVec w(box.dim, 0);
    for (uint64_t k = 0; k < box.dim; ++k)
      for (uint64_t i = 0; i < box.dim; ++i)
        w[k] = F.add(w[k], F.mul(Mg[k * box.dim + i], v[i]));
    CHECK(w == sym_apply(F, wt, box, g, v));
  }
}

TEST_CASE("characters of the basic invariants") {
  FieldCtx F(7, 2);
  SerreWeight wt{{3, 3}, 0};
  uint64_t r = wt.r_param(7);
  CHECK(r == 24);
  // s_n^0 has character a^r
  CHECK(char_of_element(F, wt, ElementKind::s_n_k, 0) == ICharacter{24, 0});
  // t_n^k: a^{r-2p^k} (ad)^{p^k}
  CHECK(char_of_element(F, wt, ElementKind::t_n_k, 1) == ICharacter{17, 7});
  // reduction mod q-1: s_n^{28} acts by a^{16}(ad)^{28}, i.e. exponents (44, 28)
  ICharacter c = char_of_element(F, wt, ElementKind::s_n_k, 28);
  CHECK(c.a_exp == 44);
  CHECK(c.d_exp == 28);
  CHECK((c.a_exp + 48 - c.d_exp) % 48 == 16);
  CHECK_THROWS(char_of_element(F, wt, ElementKind::t_n_kvec, 0, {3, 4}));
}

TEST_CASE("weight recovery from regular characters") {
  // a^{16}(ad)^{28} at p=7, f=2 comes from the weight (2,2) twisted by 28
  SerreWeight w = weight_from_char(7, 2, ICharacter{44, 28});
  CHECK(w.r_vec == std::vector<uint32_t>{2, 2});
  CHECK(w.w == 28);
  // round trip on regular weights
  FieldCtx F(7, 2);
  for (uint32_t r0 = 1; r0 <= 5; ++r0)
    for (uint32_t r1 = 1; r1 <= 5; ++r1)
      for (uint64_t tw : {0ull, 3ull, 28ull}) {
        SerreWeight wt{{r0, r1}, tw};
        ICharacter chi = char_of_element(F, wt, ElementKind::A_n_0, 0);
        CHECK(weight_from_char(7, 2, chi) == wt);
      }
  // irregular digit p-1 is rejected
  CHECK_THROWS(weight_from_char(7, 2, ICharacter{6, 0}));
}

TEST_CASE("A_j steps on parameters") {
  CHECK(apply_A(7, 2, 1, 24) == 16);  // 24 - 2*4*7 = -32
  CHECK(apply_A(7, 2, 0, 16) == 10);  // digits of 16 are (2,2); 16 - 2*3
  CHECK(apply_A(7, 2, 1, 10) == 30);
  CHECK_THROWS(apply_A(7, 2, 2, 24));
  // determinism of repeated application
  uint64_t x = 24;
  for (int i = 0; i < 5; ++i) x = apply_A(7, 2, static_cast<uint32_t>(i % 2), x);
  uint64_t y = 24;
  for (int i = 0; i < 5; ++i) y = apply_A(7, 2, static_cast<uint32_t>(i % 2), y);
  CHECK(x == y);
}

TEST_CASE("closed form for sigma_J parameters") {
  SerreWeight seed{{3, 3}, 0};
  CHECK(r_J_wJ(7, 2, {}, seed).r == 24);
  CHECK(r_J_wJ(7, 2, {}, seed).w == 0);
  CHECK(r_J_wJ(7, 2, {1}, seed).r == 16);
  CHECK(r_J_wJ(7, 2, {0, 1}, seed).r == 10);
  CHECK(r_J_wJ(7, 2, {0}, seed).r == 30);
}

TEST_CASE("schedules evaluate to the closed form") {
  // f = 2 examples
  CHECK(schedule_aJ(2, {1}) == std::vector<uint32_t>{1});
  CHECK(schedule_aJ(2, {0}) == std::vector<uint32_t>{1, 0, 1});
  CHECK(schedule_aJ(2, {}).empty());
  {
    uint64_t x = 24;
    for (auto j : schedule_aJ(2, {0})) x = apply_A(7, 2, j, x);
    CHECK(x == 30);
  }
  // brute force over subsets and random admissible seeds
  std::mt19937_64 rng(23);
  for (uint64_t f : {2ull, 3ull, 4ull}) {
    uint64_t p = 11;
    for (uint64_t mask = 0; mask < (1ull << f); ++mask) {
      std::vector<uint32_t> J;
      for (uint64_t j = 0; j < f; ++j)
        if (mask & (1ull << j)) J.push_back(static_cast<uint32_t>(j));
      for (int it = 0; it < 12; ++it) {
        std::vector<uint32_t> r(f);
        for (auto& rj : r) rj = static_cast<uint32_t>(3 + rng() % (p - 6));  // 2 < r_j < p-3
        SerreWeight seed{r, 0};
        uint64_t x = seed.r_param(p), w = 0;
        for (auto j : schedule_aJ(f, J)) {
          w = apply_A_w(p, f, j, x, w);
          x = apply_A(p, f, j, x);
        }
        WeightParam want = r_J_wJ(p, f, J, seed);
        CHECK(x == want.r);
        CHECK(w == want.w);
      }
    }
  }
}

TEST_CASE("weight set in the unramified case") {
  SerreWeight seed{{3, 3}, 0};
  auto ws = weight_set(seed, 7, 1, 2);
  REQUIRE(ws.size() == 4);
  std::map<std::string, SerreWeight> by_label;
  for (const auto& lw : ws) by_label[lw.label] = lw.weight;
  CHECK(by_label["{}"] == SerreWeight{{3, 3}, 0});
  CHECK(by_label["{1}"] == SerreWeight{{2, 2}, (3 + 1) * 7 % 48});
  CHECK(by_label["{0,1}"] == SerreWeight{{3, 1}, (3 + 7 * 4) % 48});
  CHECK(by_label["{0}"] == SerreWeight{{2, 4}, (3 + 7 * 6) % 48});
  // multiplicity one: distinct parameters
  std::set<uint64_t> params;
  for (const auto& lw : ws) params.insert(lw.weight.r_param(7));
  CHECK(params.size() == 4);

  auto ws1 = weight_set(SerreWeight{{3}, 0}, 7, 1, 1);
  CHECK(ws1.size() == 2);
}

TEST_CASE("weight set in the ramified f=2 case") {
  SerreWeight seed{{5, 5}, 0};
  auto ws = weight_set(seed, 11, 2, 2);
  REQUIRE(ws.size() == 16);
  std::set<std::pair<uint64_t, uint64_t>> distinct;
  for (const auto& lw : ws) distinct.insert({lw.weight.r_param(11), lw.weight.w});
  CHECK(distinct.size() == 16);
  // the (0,0) lattice point matches the unramified-style perturbation rows
  std::map<std::string, SerreWeight> by_label;
  for (const auto& lw : ws) by_label[lw.label] = lw.weight;
  CHECK(by_label["{},(0,0)"] == SerreWeight{{5, 5}, 0});
  CHECK(by_label["{1},(0,0)"] == SerreWeight{{4, 6}, 55});
  CHECK(by_label["{0,1},(0,0)"] == SerreWeight{{7, 5}, 59});
  CHECK(by_label["{0},(0,0)"] == SerreWeight{{6, 6}, 114});
  CHECK(by_label["{},(1,1)"] == SerreWeight{{3, 3}, 1 + 11});
  CHECK_THROWS(weight_set(SerreWeight{{3, 3}, 0}, 7, 2, 2));  // e >= min r_j / 2
}

TEST_CASE("dimension equals the box size") {
  SerreWeight wt{{3, 2}, 0};
  CHECK(wt.dim() == 12);
  Box box(wt.r_vec, 7);
  CHECK(box.dim == 12);
  for (uint64_t i = 0; i < box.dim; ++i) CHECK(box.flatten(box.unflatten(i)) == i);
}
