#include "doctest.h"

#include <random>
#include <set>

#include "treerep/quotient.hpp"

using namespace treerep;

TEST_CASE("degree two unramified staged run reproduces the worked example") {
  SerreWeight seed{{3, 3}, 0};
  RunOptions opt;
  opt.budget = 2;
  StagedRun run = run_unramified(seed, 7, opt);
  CHECK(run.ok);
  REQUIRE(run.expected.size() == 4);

  // the four parameters and weights
  std::map<uint64_t, SerreWeight> by_param;
  for (const auto& row : run.ledger) by_param[row.predicted.r] = row.predicted_weight;
  CHECK(by_param.at(24) == SerreWeight{{3, 3}, 0});
  CHECK(by_param.at(16) == SerreWeight{{2, 2}, 28});
  CHECK(by_param.at(10) == SerreWeight{{3, 1}, 31});
  CHECK(by_param.at(30) == SerreWeight{{2, 4}, 45});

  // displayed torus exponents of the two deeper generators
  std::map<uint64_t, ICharacter> chars;
  for (const auto& row : run.ledger) chars[row.predicted.r] = row.character;
  CHECK(chars.at(10) == ICharacter{41, 31});  // a^{10}(ad)^{31}
  CHECK(chars.at(30) == ICharacter{27, 45});  // a^{30}(ad)^{45}

  // every materialized row is verified and survives; level <= 2 rows have
  // certified spans
  for (const auto& row : run.ledger) {
    if (row.materialized) {
      CHECK(row.char_verified);
      CHECK(row.survived);
      if (row.level <= 2 && !row.reused) CHECK(row.kz_certified);
    }
    CHECK(row.in_weight_set);
  }
  // multiplicity one among expected weights
  std::set<std::pair<uint64_t, uint64_t>> params;
  for (const auto& row : run.ledger) params.insert({row.predicted.r, row.predicted.w});
  CHECK(params.size() == 4);
  // all four weights present in the socle report
  std::set<uint64_t> socle_params;
  for (const auto& s : run.socle) socle_params.insert(s.weight.r_param(7));
  CHECK(socle_params == std::set<uint64_t>{24, 16, 10});  // level-3 element not materialized
}

TEST_CASE("kz dimensions along the stages") {
  SerreWeight seed{{3, 3}, 0};
  RunOptions opt;
  opt.budget = 2;
  StagedRun run = run_unramified(seed, 7, opt);
  std::map<uint64_t, uint64_t> dims;
  for (const auto& row : run.ledger)
    if (row.kz_dimension) dims[row.predicted.r] = row.kz_dimension;
  CHECK(dims.at(24) == 16);
  CHECK(dims.at(16) == 9);
  CHECK(dims.at(10) == 8);  // (3+1)(1+1)
}

TEST_CASE("cleanup removal empties the socle entry") {
  SerreWeight seed{{3, 3}, 0};
  RunOptions opt;
  opt.budget = 2;
  StagedRun base = run_unramified(seed, 7, opt);
  // drop the stage-one weight from the allowed set; its full image is then
  // quotiented out and the generator no longer survives
  std::string victim;
  for (const auto& row : base.ledger)
    if (row.stage == 1 && !row.reused) victim = row.path;
  REQUIRE(!victim.empty());
  opt.drop_from_allowed = {victim};
  StagedRun run = run_unramified(seed, 7, opt);
  bool present = false;
  for (const auto& s : run.socle) present = present || s.path == victim;
  CHECK_FALSE(present);
  // the seed still survives
  bool seed_present = false;
  for (const auto& s : run.socle) seed_present = seed_present || s.weight == seed;
  CHECK(seed_present);
}

TEST_CASE("process walk lists nothing extra for the degree two case") {
  SerreWeight seed{{3, 3}, 0};
  for (std::vector<uint32_t> J : {std::vector<uint32_t>{}, {0}, {1}, {0, 1}})
    CHECK(process_intermediates(7, 2, seed, J).empty());
}

TEST_CASE("process walk matches the listed intermediates for degree three") {
  SerreWeight seed{{5, 5, 5}, 0};
  // subset {1}
  auto got1 = process_intermediates(11, 3, seed, {1});
  std::vector<SerreWeight> want1 = {
      {{4, 4, 5}, 6},   // (p-r0-2, r0+1, r1-1, 0, r2, 0)
      {{3, 4, 5}, 6},   // (p-r0-3, r0+1, r1-1, 0, r2, 0)
      {{3, 4, 4}, 732},  // (p-r0-3, r0+1, r1-1, 0, p-r2-2, r2+1)
      {{3, 5, 3}, 787},  // (p-r0-3, r0+1, p-r1-1, r1, p-r2-3, r2+1)
      {{6, 4, 3}, 791},  // (r0+1, p-1, p-r1-2, r1, p-r2-3, r2+1)
  };
  CHECK(got1 == want1);
  // subset {2,0}
  auto got2 = process_intermediates(11, 3, seed, {0, 2});
  std::vector<SerreWeight> want2 = {
      {{5, 4, 4}, 66},   // (r0, 0, p-r1-2, r1+1, r2-1, 0)
      {{4, 4, 4}, 671},  // (r0-1, 0, p-r1-2, r1+1, p-r2-2, r2)
      {{5, 3, 4}, 676},  // (p-r0-1, r0, p-r1-3, r1+1, p-r2-2, r2)
  };
  CHECK(got2 == want2);
}

TEST_CASE("transport steps agree with the built elements") {
  GModel M(SerreWeight{{3, 3}, 0}, 7, 1, 2);
  SymVec hv(M.box().dim, 0);
  hv[0] = 1;
  InducedElement seed{{M.key(0, 0, {}), hv}};
  CHECK(M.equal(transport_next(M, seed, 28), build_s(M, 1, 28)));
  // prepended digits pick up the new exponent
  InducedElement s2 = transport_next(M, build_s(M, 1, 28), 3);
  InducedElement want = build_monomial(M, 0, 2, {3, 28}, 0);
  CHECK(M.equal(s2, want));
}

TEST_CASE("phi transport is equivariant and well defined") {
  GModel M(SerreWeight{{3, 3}, 0}, 7, 1, 2);
  HeckeOps H(M);
  QuotientContext ctx(M, H, 2, true);
  InducedElement s = build_s(M, 1, 28);
  PhiMap phi(M, ctx, SerreWeight{{2, 2}, 28}, s);
  // the highest vector goes to the generator
  SymVec hv(phi.source_box().dim, 0);
  hv[0] = 1;
  CHECK(M.equal(phi.apply(mat_identity(M.R()), hv), s));
  // K-equivariance on random vectors: phi(k.(Id (x) v)) = k.phi(Id (x) v)
  GModel S(SerreWeight{{2, 2}, 28}, M.R_ptr(), 2);
  std::mt19937_64 rng(5);
  for (int it = 0; it < 6; ++it) {
    SymVec v(phi.source_box().dim);
    for (auto& c : v) c = static_cast<Fq>(rng() % 49);
    Fq lam = static_cast<Fq>(rng() % 49);
    Mat2Local k = M.lower_unipotent(lam);
    CosetForm nf = S.coset_normal_form(k);
    SymVec kv = sym_apply(S.F(), S.weight(), S.box(), nf.kbar, v);
    InducedElement lhs = phi.apply(mat_identity(M.R()), kv);
    InducedElement rhs = M.act(k, phi.apply(mat_identity(M.R()), v));
    InducedElement diff = lhs;
    M.add_scaled(diff, rhs, M.F().neg(1));
    CHECK(ctx.contains(diff));
  }
  CHECK_THROWS(PhiMap(M, ctx, SerreWeight{{3, 3}, 0}, s));
}

TEST_CASE("ramified staged run instantiates the full expected set") {
  SerreWeight seed{{5, 5}, 0};
  RunOptions opt;
  opt.budget = 2;
  opt.kz_coord_limit = 600000;
  StagedRun run = run_f2_ramified(seed, 11, 2, opt);
  CHECK(run.ok);
  REQUIRE(run.expected.size() == 16);
  // sixteen distinct expected classes, all appearing in the ledger
  std::set<std::pair<uint64_t, uint64_t>> classes;
  for (const auto& row : run.ledger) {
    CHECK(row.in_weight_set);
    classes.insert({row.predicted.r, row.predicted.w});
  }
  CHECK(classes.size() == 16);
  std::set<std::pair<uint64_t, uint64_t>> expect;
  for (const auto& lw : run.expected)
    expect.insert({lw.weight.r_param(11) % 120, lw.weight.w % 120});
  CHECK(classes == expect);
  // the materialized seeds are certified
  for (const auto& row : run.ledger)
    if (row.stage == 0 && row.materialized) {
      CHECK(row.char_verified);
      CHECK(row.kz_certified);
    }
}
