#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "ofsim/contfrac.hpp"

using namespace ofsim;
using namespace ofsim::contfrac;

TEST_CASE("rational expansions terminate exactly") {
  auto q = cf_expand(PreciseReal::rational(7, 3), 5);
  CHECK(q.quotients == std::vector<std::uint64_t>{2, 3});
  CHECK(q.terminated);

  auto whole = cf_expand(PreciseReal::rational(4, 1), 3);
  CHECK(whole.quotients == std::vector<std::uint64_t>{4});
  CHECK(whole.terminated);

  auto small = cf_expand(PreciseReal::rational(1, 3), 4);
  CHECK(small.quotients == std::vector<std::uint64_t>{0, 3});

  CHECK_THROWS_AS(PreciseReal::rational(1, 0), InvalidArgument);
  CHECK_THROWS_AS(cf_expand(PreciseReal::rational(7, 3), 0), InvalidArgument);
}

TEST_CASE("quadratic irrationals match their known periodic forms") {
  auto sqrt2 = cf_expand(PreciseReal::sqrt_int(2), 20);
  std::vector<std::uint64_t> want2{1};
  want2.insert(want2.end(), 19, 2);
  CHECK(sqrt2.quotients == want2);
  CHECK_FALSE(sqrt2.terminated);

  auto phi = cf_expand(PreciseReal::golden(), 20);
  CHECK(phi.quotients == std::vector<std::uint64_t>(20, 1));

  auto sqrt5 = cf_expand(PreciseReal::sqrt_int(5), 5);
  CHECK(sqrt5.quotients == std::vector<std::uint64_t>{2, 4, 4, 4, 4});
}

TEST_CASE("Lagrange periodicity detected for small square roots") {
  const std::map<unsigned long, std::size_t> want{{2, 1}, {3, 2}, {5, 1}, {7, 4}};
  for (const auto& [d, period] : want) {
    auto q = cf_expand(PreciseReal::sqrt_int(d), 40);
    auto p = detect_period(q.quotients);
    REQUIRE(p.has_value());
    CHECK(*p == period);
  }
  // Golden ratio: period 1.
  auto phi = cf_expand(PreciseReal::golden(), 40);
  CHECK(detect_period(phi.quotients) == std::size_t{1});
}

TEST_CASE("transcendental expansions match the integer-Euclid oracle") {
  CHECK(cf_expand(PreciseReal::root_of_log(10, 3), 9).quotients ==
        fixtures::kCbrtLog10First9);
  CHECK(cf_expand(PreciseReal::root_of_log(2, 3), 20).quotients ==
        fixtures::kCbrtLog2First20);
  CHECK(cf_expand(PreciseReal::root_of_log(7, 3), 30).quotients ==
        fixtures::kCbrtLog7First30);
}

TEST_CASE("transcendental_from_nonce domain and behavior") {
  CHECK_THROWS_AS(transcendental_from_nonce(1, 3), InvalidNonce);
  CHECK_THROWS_AS(transcendental_from_nonce(0, 3), InvalidNonce);
  CHECK_THROWS_AS(transcendental_from_nonce(10, 2), InvalidArgument);

  // Defining identity, via the decimal rendering against the oracle.
  auto x = transcendental_from_nonce(2, 3);
  std::string dec = x.decimal(80);
  CHECK(dec.substr(0, 60) == fixtures::kCbrtLog2Decimal80.substr(0, 60));

  // A 129-bit nonce still expands stably and never terminates in 50 steps.
  mpz_class big = (mpz_class(1) << 128) + 1;
  auto q = cf_expand(transcendental_from_nonce(big, 3), 50);
  CHECK(q.quotients == fixtures::kCbrtLogBigFirst50);
  CHECK_FALSE(q.terminated);
}

TEST_CASE("windows are stable when recomputed at double precision") {
  for (int digits : {256, 512}) {
    auto x = PreciseReal::root_of_log(fixtures::kFcNonce, 3, digits);
    auto w = cf_window(x, 20, 9);
    CHECK(w.stable_precision >= digits);
    auto x2 = PreciseReal::root_of_log(fixtures::kFcNonce, 3, digits * 2);
    CHECK(cf_window(x2, 20, 9).quotients == w.quotients);
  }
}

TEST_CASE("multi_continuation realizes distinct numbers sharing the window") {
  DeterministicRandom rng(31);
  PartialQuotients window;
  window.quotients = {1, 2, 3};

  auto reals = multi_continuation(window, 3, rng);
  REQUIRE(reals.size() == 3);

  std::set<std::string> renderings;
  for (const auto& r : reals) {
    renderings.insert(r.decimal(60));
    auto q = cf_expand(r, 12);
    // The window appears as a consecutive run somewhere in the expansion.
    bool found = false;
    for (std::size_t i = 0; i + 3 <= q.quotients.size(); ++i)
      if (q.quotients[i] == 1 && q.quotients[i + 1] == 2 && q.quotients[i + 2] == 3)
        found = true;
    CHECK(found);
  }
  CHECK(renderings.size() == 3);  // pairwise distinct values

  CHECK_THROWS_AS(multi_continuation(window, 1, rng), InvalidArgument);
  PartialQuotients empty;
  CHECK_THROWS_AS(multi_continuation(empty, 3, rng), InvalidArgument);
}

TEST_CASE("multi_continuation recovers a real protocol window") {
  DeterministicRandom rng(32);
  auto x = PreciseReal::root_of_log(7, 3);
  auto window = cf_expand(x, 9);
  REQUIRE(window.quotients.size() == 9);

  for (const auto& r : multi_continuation(window, 3, rng)) {
    auto q = cf_expand(r, 9 + 8);
    bool found = false;
    for (std::size_t i = 0; i + 9 <= q.quotients.size() && !found; ++i) {
      bool match = true;
      for (std::size_t k = 0; k < 9; ++k)
        if (q.quotients[i + k] != window.quotients[k]) {
          match = false;
          break;
        }
      found = match;
    }
    CHECK(found);
  }
}

TEST_CASE("derive_fc matches the oracle and is order-sensitive") {
  auto key_a = crypto::GroupElement::from_bytes(from_hex(fixtures::kFcKeyA));
  auto key_b = crypto::GroupElement::from_bytes(from_hex(fixtures::kFcKeyB));

  auto ab = derive_fc(fixtures::kFcNonce, key_a, key_b);
  CHECK(ab.quotients.offset == fixtures::kFcOffsetAB);
  CHECK(ab.quotients.quotients == fixtures::kFcQuotientsAB);

  auto ba = derive_fc(fixtures::kFcNonce, key_b, key_a);
  CHECK(ba.quotients.offset == fixtures::kFcOffsetBA);
  CHECK(ba.quotients.quotients == fixtures::kFcQuotientsBA);

  CHECK(ab != ba);
  CHECK(derive_fc(fixtures::kFcNonce, key_a, key_b) == ab);  // deterministic

  // Transport encoding: first quotient in the first 8 bytes, big-endian.
  auto enc = ab.encode();
  CHECK(enc.size() == 72);
  CHECK(get_u64_be(ByteView(enc).subspan(0, 8)) == ab.quotients.quotients[0]);
  auto dec = FcChallenge::decode(enc);
  REQUIRE(dec.has_value());
  CHECK(dec->quotients.quotients == ab.quotients.quotients);

  CHECK_THROWS_AS(derive_fc(1, key_a, key_b), InvalidNonce);
}

TEST_CASE("expression grammar round-trips through provenance") {
  for (const std::string& expr :
       {std::string("7/3"), std::string("sqrt(2)"), std::string("golden"),
        std::string("root(3,log(10))")}) {
    auto x = PreciseReal::parse_expression(expr);
    CHECK(x.provenance() == expr);
  }
  CHECK_THROWS_AS(PreciseReal::parse_expression("banana"), InvalidArgument);
  CHECK_THROWS_AS(PreciseReal::parse_expression("root(2,log(10))"),
                  InvalidArgument);  // r < 3
}

TEST_CASE("fixture file format parses and formats") {
  std::string text =
      "# golden vectors\n"
      "sqrt(2) ; 256 ; 1,2,2,2\n"
      "root(3,log(10)) ; 512 ; 1,3,8\n";
  auto fixtures_parsed = parse_fixture_lines(text);
  REQUIRE(fixtures_parsed.size() == 2);
  CHECK(fixtures_parsed[0].expression == "sqrt(2)");
  CHECK(fixtures_parsed[0].precision == 256);
  CHECK(fixtures_parsed[0].quotients == std::vector<std::uint64_t>{1, 2, 2, 2});

  // Each line re-verifies against a fresh expansion.
  for (const auto& f : fixtures_parsed) {
    auto x = PreciseReal::parse_expression(f.expression, f.precision);
    auto q = cf_expand(x, f.quotients.size());
    CHECK(q.quotients == f.quotients);
  }

  CHECK(format_fixture(fixtures_parsed[0]) == "sqrt(2) ; 256 ; 1,2,2,2");
}
