#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "coexist/analytic.hpp"
#include "coexist/chain.hpp"
#include "coexist/closed_form.hpp"
#include "coexist/errors.hpp"
#include "oracles.hpp"

using namespace coexist;
using namespace coexist::analytic;

namespace {

const std::vector<double> kRhos = {0.1, 0.5, 0.9};

template <typename Fn>
void at_random_points(int count, Fn fn) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < count; ++i) {
    const double a = u(rng), c = u(rng);
    fn(a, c);
  }
}

}  // namespace

TEST_CASE("matrix coefficients") {
  const auto c = matrix_coefficients(0.6, 0.3, 4, 5);
  const double u = 0.6 * (0.3 - 1);
  CHECK(c.u == doctest::Approx(u));
  CHECK(c.h == doctest::Approx(1 * u));
  CHECK(c.e == doctest::Approx(2 * u));
  CHECK(c.v == doctest::Approx(0.3));
  CHECK(c.z == doctest::Approx(0.6 * 0.7));
  CHECK(c.w == doctest::Approx(0.7));
  CHECK(matrix_coefficients(0.6, 0.3, 4, 8).g == doctest::Approx(2 * u));
}

TEST_CASE("published idle-system matrices") {
  at_random_points(100, [](double a, double c) {
    const auto long_pkt = build_A(a, c, 4, 5);
    CHECK(long_pkt.form == MatrixForm::LongPacket);
    CHECK((long_pkt.A - Eigen::MatrixXd(oracle::published_A_l5_s4(a, c))).lpNorm<Eigen::Infinity>() <=
          1e-15);
    const auto short_pkt = build_A(a, c, 4, 2);
    CHECK(short_pkt.form == MatrixForm::ShortPacket);
    CHECK((short_pkt.A - Eigen::MatrixXd(oracle::published_A_l2_s4(a, c))).lpNorm<Eigen::Infinity>() <=
          1e-15);
  });
}

TEST_CASE("integer-multiple template") {
  for (int S : {2, 4, 8}) {
    const double a = 0.3, c = 0.8;
    const auto sys = build_A(a, c, S, S);
    CHECK(sys.form == MatrixForm::IntegerMultiple);
    const double g = a * (c - 1), f = a + c - a * c;
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < S; ++j) {
        const double expected = i == 0 ? g : (j == i - 1 ? f : 0.0);
        CHECK(sys.A(i, j) == doctest::Approx(expected).epsilon(1e-15));
      }
  }
}

TEST_CASE("idle fraction") {
  CHECK(closed_form::idle_fraction(0.5, 0.5, 2, 2) ==
        doctest::Approx(oracle::kAlphaEqualS2).epsilon(1e-14));
  CHECK(closed_form::idle_fraction_equal(0.5, 0.5, 2) ==
        doctest::Approx(oracle::kAlphaEqualS2).epsilon(1e-14));

  SystemConfig silent;
  silent.aloha_nodes = 3;
  silent.csma_nodes = 3;
  silent.slot_len = 4;
  silent.csma_len = 5;
  CHECK(alpha_C(silent) == doctest::Approx(1.0).epsilon(1e-14));

  at_random_points(100, [](double a, double c) {
    const auto y = solve_idle(build_A(a, c, 4, 2)).y;
    CHECK(std::abs(y.sum() - oracle::published_alpha_l2_s4(a, c)) <= 1e-12);
  });
}

TEST_CASE("singular idle system is reported") {
  IdleSystem sys;
  sys.A = Eigen::MatrixXd::Identity(3, 3);
  sys.b = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(solve_idle(sys), DegenerateParameterError);
}

TEST_CASE("span counts") {
  CHECK(span_counts(4, 4) == std::vector<int>{1, 2, 2, 2});
  CHECK(span_counts(4, 6) == std::vector<int>{2, 2, 2, 3});
  CHECK(span_counts(4, 2) == std::vector<int>{1, 1, 1, 2});
  for (int S = 1; S <= 12; ++S)
    for (int l = 1; l <= 40; ++l) {
      CAPTURE(S);
      CAPTURE(l);
      const auto m = span_counts(S, l);
      const auto brute = oracle::brute_span_counts(S, l);
      CHECK(m == brute);
      for (std::size_t k = 0; k < m.size(); ++k) {
        CHECK(m[k] >= 1);
        if (k > 0) CHECK(m[k] >= m[k - 1]);
      }
    }
}

TEST_CASE("Aloha throughput") {
  CHECK(closed_form::aloha_throughput(1, 0.5, 0.5, 2, 2) ==
        doctest::Approx(oracle::kLambdaAEqualS2).epsilon(1e-14));

  SystemConfig cfg;
  cfg.aloha_nodes = 4;
  cfg.csma_nodes = 4;
  cfg.csma_tx_prob = 0.2;
  cfg.slot_len = 4;
  cfg.csma_len = 6;
  CHECK(aloha_throughput(cfg) == 0.0);

  for (int n : {1, 3, 20})
    at_random_points(50, [n](double a, double c) {
      const auto e = evaluate(rates_from_idle(n, 7, a, c, 4), 4, 2);
      CHECK(std::abs(e.lambda_A - oracle::published_lambda_a_l2_s4(n, a, c)) <= 1e-12);
    });
}

TEST_CASE("CSMA throughput") {
  SystemConfig cfg;
  cfg.aloha_nodes = 4;
  cfg.csma_nodes = 4;
  cfg.aloha_tx_prob = 0.2;
  cfg.slot_len = 4;
  cfg.csma_len = 6;
  CHECK(csma_throughput(cfg) == 0.0);
  CHECK(evaluate(rates_from_idle(2, 5, 0.4, 1.0, 4), 4, 3).lambda_C == 0.0);

  // The published l_C = 2, S = 4 expression carries a flipped overall sign.
  for (int n : {1, 5, 20})
    at_random_points(50, [n](double a, double c) {
      const auto e = evaluate(rates_from_idle(3, n, a, c, 4), 4, 2);
      CHECK(std::abs(e.lambda_C + oracle::published_lambda_c_l2_s4(n, a, c)) <= 1e-12);
    });
}

TEST_CASE("silent network report") {
  SystemConfig cfg;
  cfg.aloha_nodes = 2;
  cfg.csma_nodes = 2;
  cfg.slot_len = 4;
  cfg.csma_len = 5;
  for (auto m : {Method::ClosedForm, Method::ChainSolve}) {
    const auto r = throughput_report(cfg, m);
    CHECK(r.lambda_A == 0.0);
    CHECK(r.lambda_C == 0.0);
    CHECK(r.lambda_total == 0.0);
    CHECK(r.alpha_C == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("routes") {
  auto cfg = SystemConfig::from_idle_probs(1, 20, 0.5, 0.5, 4, 5);
  CHECK(throughput_report(cfg, Method::ClosedForm).route == kRouteGeneral);
  CHECK(throughput_report(cfg, Method::ChainSolve).route == kRouteChain);
  cfg.csma_len = 8;
  CHECK(throughput_report(cfg, Method::ClosedForm).route == kRouteIntegerMultiple);
  CHECK(throughput_report(cfg, Method::ClosedForm).provenance == Provenance::ClosedForm);
}

TEST_CASE("closed form agrees with the chain solve") {
  for (int S : {2, 4, 8})
    for (int l = 1; l <= 12; ++l)
      for (double a : kRhos)
        for (double c : kRhos)
          for (int n : {1, 20}) {
            CAPTURE(S);
            CAPTURE(l);
            const auto rates = rates_from_idle(n, 20, a, c, S);
            const auto cf = evaluate(rates, S, l);
            const auto ch = evaluate_chain(model::enumerate_chain(rates, S, l));
            CHECK(std::abs(cf.lambda_A - ch.lambda_A) <= 1e-9);
            CHECK(std::abs(cf.lambda_C - ch.lambda_C) <= 1e-9);
            CHECK(std::abs(cf.alpha_C - ch.alpha_C) <= 1e-9);
          }
}

TEST_CASE("integer-multiple formulas equal the idle-system solve") {
  for (int S : {2, 4, 8})
    for (int mult : {1, 2, 3})
      for (double a : kRhos)
        for (double c : kRhos) {
          const int l = mult * S;
          const double sum = solve_idle(build_A(a, c, S, l)).y.sum();
          CHECK(std::abs(closed_form::idle_fraction(a, c, S, l) - sum) <= 1e-12);
          const auto y = solve_idle(build_A(a, c, S, l)).y;
          const double f = a + c - a * c;
          for (int d = 0; d < S; ++d) CHECK(std::abs(y(d) - std::pow(f, d) * y(0)) <= 1e-12);
        }
}

TEST_CASE("l_C = S reductions") {
  for (int S : {1, 2, 4, 8, 10, 20})
    for (double a : kRhos)
      for (double c : kRhos)
        for (int n : {1, 20}) {
          CHECK(std::abs(closed_form::idle_fraction(a, c, S, S) -
                         closed_form::idle_fraction_equal(a, c, S)) <= 1e-12);
          CHECK(std::abs(closed_form::aloha_throughput(n, a, c, S, S) -
                         closed_form::aloha_throughput_equal(n, a, c, S)) <= 1e-12);
          CHECK(std::abs(closed_form::csma_throughput(n, a, c, S, S) -
                         closed_form::csma_throughput_equal(n, a, c, S)) <= 1e-12);
        }
}

TEST_CASE("Aloha throughput falls as CSMA packets lengthen") {
  double prev = 1.0;
  for (int l : {1, 5, 10, 15, 30}) {
    const double v = evaluate(rates_from_idle(20, 20, 0.5, 0.5, 10), 10, l).lambda_A;
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("throughputs and idle fraction stay in range") {
  for (int S : {2, 4, 10})
    for (int l : {1, 3, 7, 10, 25})
      for (double a : {0.01, 0.3, 0.7, 0.99})
        for (double c : {0.01, 0.3, 0.7, 0.99}) {
          const auto e = evaluate(rates_from_idle(5, 5, a, c, S), S, l);
          CHECK(e.lambda_A >= 0.0);
          CHECK(e.lambda_C >= 0.0);
          CHECK(e.alpha_C >= 0.0);
          CHECK(e.alpha_C <= 1.0);
          CHECK(e.lambda_A + e.lambda_C + e.alpha_C <= 1.0 + 1e-12);
        }
}

TEST_SUITE("printed-forms") {
  // The printed expression for the limiting probability of (I,I,0) at
  // l_C = 5, S = 4 does not follow from the printed matrix it accompanies.
  TEST_CASE("printed limiting probability of (I,I,0), l_C = 5, S = 4") {
    at_random_points(100, [](double a, double c) {
      const auto ch = model::enumerate_chain(rates_from_idle(1, 20, a, c, 4), 4, 5);
      const double direct = ch.limiting(model::make_state('I', 'I', 0));
      CHECK(std::abs(direct - oracle::derived_pi_tilde_ii0_l5_s4(a, c)) <= 1e-12);
      CHECK(std::abs(direct - oracle::published_pi_tilde_ii0_l5_s4(a, c)) <= 1e-12);
    });
  }
}
