#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "dsq/model.hpp"
#include "dsq/sim.hpp"
#include "support.hpp"

using namespace dsq;

namespace {

const ModelParams kExample1 = ModelParams::simple(1.0, 2.0, 3.0, 4.0);

bool has_transition(const std::vector<Transition>& ts, State to, double rate) {
  return std::any_of(ts.begin(), ts.end(), [&](const Transition& t) {
    return t.to == to && t.rate == doctest::Approx(rate);
  });
}

}  // namespace

TEST_CASE("params validation") {
  CHECK_THROWS_AS(ModelParams::simple(-1.0, 1.0, 1.0, 1.0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::simple(1.0, 0.0, 1.0, 1.0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::simple(1.0, 1.0, 1.0, 0.0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::simple(1.0, 1.0, 1.0, 1.0, 0).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(ModelParams::simple(0.0, 1.0, 0.0, 1.0).validate());
}

TEST_CASE("state space shape") {
  const StateSpace space(3, 6);
  CHECK(space.phase_count(0) == 2);
  CHECK(space.phase_count(1) == 3);
  CHECK(space.phase_count(2) == 4);
  CHECK(space.phase_count(3) == 4);
  CHECK(space.phase_count(6) == 4);
  CHECK(space.total_states() == 2 + 3 + 4 + 4 * 4);

  // Index mapping is a bijection.
  for (std::size_t i = 0; i < space.total_states(); ++i) {
    CHECK(space.index_of(space.state_of(i)) == i);
  }
  CHECK_THROWS_AS(space.index_of(State{2, 4}), std::invalid_argument);
  CHECK_THROWS_AS(space.index_of(State{7, 0}), std::invalid_argument);
}

TEST_CASE("transition rules") {
  SUBCASE("(1,1): arrival, service, server departure") {
    const auto ts = transition_rates(kExample1, State{1, 1});
    CHECK(ts.size() == 3);
    CHECK(has_transition(ts, State{2, 1}, 1.0));
    CHECK(has_transition(ts, State{0, 1}, 2.0));
    CHECK(has_transition(ts, State{1, 0}, 4.0));
  }
  SUBCASE("(2,3): dormant, no service") {
    const auto ts = transition_rates(kExample1, State{2, 3});
    CHECK(ts.size() == 2);
    CHECK(has_transition(ts, State{3, 3}, 1.0));
    CHECK(has_transition(ts, State{2, 2}, 4.0));
  }
  SUBCASE("(0,0): arrival only") {
    const auto ts = transition_rates(kExample1, State{0, 0});
    CHECK(ts.size() == 1);
    CHECK(has_transition(ts, State{1, 0}, 1.0));
  }
  SUBCASE("(n,n): no server arrival at k = n") {
    const auto ts = transition_rates(kExample1, State{2, 2});
    CHECK(!has_transition(ts, State{2, 3}, 3.0));
  }
  SUBCASE("(3,3): cap K reached") {
    const auto ts = transition_rates(kExample1, State{3, 3});
    CHECK(ts.size() == 3);  // arrival, service, departure
    CHECK(has_transition(ts, State{2, 3}, 6.0));
  }
  SUBCASE("invalid state throws") {
    CHECK_THROWS_AS(transition_rates(kExample1, State{1, 3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(transition_rates(kExample1, State{-1, 0}),
                    std::invalid_argument);
  }
  SUBCASE("all reported rates are positive") {
    for (const auto& t : transition_rates(kExample1, State{5, 2})) {
      CHECK(t.rate > 0.0);
    }
  }
}

TEST_CASE("build_blocks matches the printed Example 1 blocks") {
  const BlockSet blocks = build_blocks(kExample1);

  SUBCASE("A0 = diag(0, 2, 4, 6)") {
    const std::vector<double> d = {0.0, 2.0, 4.0, 6.0};
    CHECK(max_abs_diff(blocks.a0, Matrix::diagonal(d)) == 0.0);
  }
  SUBCASE("A1 = I") {
    CHECK(max_abs_diff(blocks.a1, Matrix::identity(4)) == 0.0);
  }
  SUBCASE("A2 matches the printed matrix") {
    const Matrix expected(4, 4,
                          {-4, 3, 0, 0,
                           4, -10, 3, 0,
                           0, 4, -12, 3,
                           0, 0, 4, -11});
    CHECK(max_abs_diff(blocks.a_repeat, expected) == 0.0);
  }
  SUBCASE("B11 matches the printed matrix") {
    const Matrix expected(3, 3, {-4, 3, 0, 4, -7, 0, 0, 4, -5});
    CHECK(max_abs_diff(blocks.b11(), expected) == 0.0);
  }
  SUBCASE("B00, B01, B10 follow the symbolic forms") {
    CHECK(max_abs_diff(blocks.b00(), Matrix(2, 2, {-1, 0, 4, -5})) == 0.0);
    CHECK(max_abs_diff(blocks.b01(), Matrix(2, 3, {1, 0, 0, 0, 1, 0})) == 0.0);
    CHECK(max_abs_diff(blocks.b10(), Matrix(3, 2, {0, 0, 0, 2, 0, 0})) == 0.0);
  }
  SUBCASE("B22 row for (2,2) has no server arrival") {
    const Matrix expected(4, 4,
                          {-4, 3, 0, 0,
                           4, -10, 3, 0,
                           0, 4, -9, 0,
                           0, 0, 4, -5});
    CHECK(max_abs_diff(blocks.b22(), expected) == 0.0);
  }
  SUBCASE("B12 and B21") {
    CHECK(max_abs_diff(blocks.b12(),
                       Matrix(3, 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0})) == 0.0);
    CHECK(max_abs_diff(blocks.b21(),
                       Matrix(4, 3, {0, 0, 0, 0, 2, 0, 0, 0, 4, 0, 0, 0})) == 0.0);
  }
}

TEST_CASE("build_blocks corner cases") {
  SUBCASE("lambda_c = 0 gives a zero A1") {
    const BlockSet blocks = build_blocks(ModelParams::simple(0.0, 2.0, 3.0, 4.0));
    CHECK(max_abs(blocks.a1) == 0.0);
  }
  SUBCASE("level-dependent boundary records the non-repeating blocks") {
    ModelParams p;
    p.lambda_c = 1.0;
    p.mu = 2.0;
    p.server_arrival = {0.0, 2.0, 4.0, 5.0, 3.0};  // constant from level 4
    p.server_departure = {4.0};
    const BlockSet blocks = build_blocks(p);
    CHECK(!blocks.level_dependent.empty());
    // Tail block uses the tail arrival rate.
    CHECK(blocks.a_repeat(0, 1) == doctest::Approx(3.0));
  }
}

TEST_CASE("assembled generator shape and conservation") {
  SUBCASE("13x13 at max_level = 3") {
    const Matrix q = assemble_truncated_generator(kExample1, 3);
    CHECK(q.rows() == 13);
  }
  SUBCASE("max_level below K throws") {
    CHECK_THROWS_AS(assemble_truncated_generator(kExample1, 2),
                    std::invalid_argument);
  }
  SUBCASE("row for (0,0)") {
    const Matrix q = assemble_truncated_generator(kExample1, 3);
    const StateSpace space(3, 3);
    const auto i = space.index_of(State{0, 0});
    CHECK(q(i, i) == doctest::Approx(-1.0));
    CHECK(q(i, space.index_of(State{1, 0})) == doctest::Approx(1.0));
  }
  SUBCASE("rows sum to zero for random parameters at level 50") {
    Rng rng = Rng::from_seed(17, 0);
    for (int round = 0; round < 5; ++round) {
      const ModelParams p = ModelParams::simple(
          testsupport::uniform_in(rng, 0.0, 3.0),
          testsupport::uniform_in(rng, 0.1, 3.0),
          testsupport::uniform_in(rng, 0.0, 3.0),
          testsupport::uniform_in(rng, 0.1, 3.0));
      const Matrix q = assemble_truncated_generator(p, 50);
      CHECK(validate_generator(q).pass);
    }
  }
}

TEST_CASE("block extraction agrees with the rules everywhere") {
  // Rates read back from the assembled generator must equal transition_rates
  // exactly for every state with n <= 6.
  const int max_level = 8;
  const Matrix q = assemble_truncated_generator(kExample1, max_level);
  const StateSpace space(3, max_level);
  for (int n = 0; n <= 6; ++n) {
    for (int k = 0; k < space.phase_count(n); ++k) {
      const State s{n, k};
      const auto i = space.index_of(s);
      const auto expected = transition_rates(kExample1, s);
      double off_diag_total = 0.0;
      for (std::size_t j = 0; j < q.cols(); ++j) {
        if (j == i || q(i, j) == 0.0) continue;
        off_diag_total += q(i, j);
        const State to = space.state_of(j);
        bool found = false;
        for (const auto& t : expected) {
          if (t.to == to) {
            found = true;
            CHECK(q(i, j) == t.rate);
          }
        }
        CHECK(found);
      }
      CHECK(q(i, i) == doctest::Approx(-off_diag_total));
    }
  }
}

TEST_CASE("repeating structure holds from level K on") {
  // With constant-tail rates, the tail blocks read from any level n >= K+1
  // must equal a_repeat / a1 / a0.
  const BlockSet blocks = build_blocks(kExample1);
  const int max_level = 9;
  const Matrix q = assemble_truncated_generator(kExample1, max_level);
  const StateSpace space(3, max_level);
  for (int n = 4; n <= max_level - 1; ++n) {
    for (int k = 0; k < 4; ++k) {
      for (int kk = 0; kk < 4; ++kk) {
        const auto row = space.level_offset(n) + static_cast<std::size_t>(k);
        CHECK(q(row, space.level_offset(n) + static_cast<std::size_t>(kk)) ==
              blocks.a_repeat(static_cast<std::size_t>(k), static_cast<std::size_t>(kk)));
        CHECK(q(row, space.level_offset(n + 1) + static_cast<std::size_t>(kk)) ==
              blocks.a1(static_cast<std::size_t>(k), static_cast<std::size_t>(kk)));
        CHECK(q(row, space.level_offset(n - 1) + static_cast<std::size_t>(kk)) ==
              blocks.a0(static_cast<std::size_t>(k), static_cast<std::size_t>(kk)));
      }
    }
  }
}

TEST_CASE("no transition leaves the legal state region") {
  Rng rng = Rng::from_seed(4242, 0);
  for (int round = 0; round < 20; ++round) {
    const ModelParams p = ModelParams::simple(
        testsupport::uniform_in(rng, 0.0, 4.0),
        testsupport::uniform_in(rng, 0.1, 4.0),
        testsupport::uniform_in(rng, 0.0, 4.0),
        testsupport::uniform_in(rng, 0.1, 4.0),
        1 + static_cast<int>(testsupport::uniform_in(rng, 0.0, 4.0)));
    const StateSpace space(p.max_servers, 12);
    for (std::size_t i = 0; i < space.total_states(); ++i) {
      for (const auto& t : transition_rates(p, space.state_of(i))) {
        CHECK(t.to.customers >= 0);
        CHECK(t.to.servers >= 0);
        CHECK(t.to.servers <= std::min(t.to.customers + 1, p.max_servers));
      }
    }
  }
}

TEST_CASE("validate_generator") {
  SUBCASE("assembled generator passes") {
    const Matrix q = assemble_truncated_generator(kExample1, 10);
    const GeneratorReport report = validate_generator(q);
    CHECK(report.pass);
    CHECK(report.max_abs_row_sum <= 1e-12);
  }
  SUBCASE("perturbed rate fails with the row located") {
    Matrix q = assemble_truncated_generator(kExample1, 10);
    q(5, 6) += 1e-6;
    const GeneratorReport report = validate_generator(q);
    CHECK(!report.pass);
    CHECK(report.worst_row == 5);
    CHECK(report.max_abs_row_sum == doctest::Approx(1e-6));
  }
  SUBCASE("1x1 zero matrix passes") {
    CHECK(validate_generator(Matrix(1, 1)).pass);
  }
}
