#include "doctest.h"

#include <cmath>
#include <random>

#include "thermoforge/errors.hpp"
#include "thermoforge/fixtures.hpp"
#include "thermoforge/measures.hpp"
#include "thermoforge/pressure.hpp"

using namespace thermoforge;

namespace {

const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);

double binary_entropy(double q) { return -q * std::log(q) - (1 - q) * std::log(1 - q); }

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

int order_for(const Potential& g) { return std::max(1, g.as_additive()->range() - 1); }

}  // namespace

TEST_CASE("periodic-orbit measures") {
  const auto full = ShiftSpace::full_shift(2);
  const auto p1 = pofp_measure(full, Potential::letter(full, {0.0, kLog3}), 1);
  REQUIRE(p1.atoms.size() == 2);
  CHECK(p1.atoms[0].weight == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p1.atoms[1].weight == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p1.log_z == doctest::Approx(std::log(4.0)));
  const auto u = pofp_measure(full, Potential::zero(full), 7);
  for (const auto& a : u.atoms) CHECK(a.weight == doctest::Approx(1.0 / 128).epsilon(1e-14));
  for (const auto& fx : identity_fixtures()) {
    for (int n = 1; n <= 10; ++n) {
      const auto p = pofp_measure(fx.space, fx.potential, n);
      double total = 0.0;
      for (const auto& a : p.atoms) total += a.weight;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(p.log_z == doctest::Approx(log_partition(fx.space, fx.potential, n)).epsilon(1e-14));
    }
  }
}

TEST_CASE("radon-nikodym identity on periodic orbits") {
  std::vector<Fixture> fixtures = identity_fixtures();
  fixtures.push_back(matrix_product_fixture());
  for (const auto& fx : fixtures) {
    for (int n = 1; n <= 10; ++n) {
      const auto p = pofp_measure(fx.space, fx.potential, n);
      for (const auto& a : p.atoms) {
        const auto image = apply_reversal(fx.space, fx.reversal, a.word);
        const auto idx = p.find(image);
        REQUIRE(idx.has_value());
        const double sigma = entropy_production(fx.space, fx.potential, fx.reversal, a.word);
        CHECK(std::abs(p.atoms[*idx].weight * std::exp(sigma) - a.weight) <= 1e-12);
      }
    }
  }
}

TEST_CASE("block empirical measures") {
  const auto e1 = block_empirical({{0, 1}}, 1);
  CHECK(e1.frequency({0}) == 0.5);
  CHECK(e1.frequency({1}) == 0.5);
  const auto e2 = block_empirical({{0, 0, 1, 1}}, 2);
  for (const Word w : {Word{0, 0}, Word{0, 1}, Word{1, 1}, Word{1, 0}}) CHECK(e2.frequency(w) == 0.25);
  for (int k = 1; k <= 5; ++k) {
    const auto z = block_empirical({{0, 0, 0}}, k);
    REQUIRE(z.frequencies.size() == 1);
    CHECK(z.frequency(Word(static_cast<std::size_t>(k), 0)) == 1.0);
  }
  for (const auto& w : periodic_points(ShiftSpace::golden_mean(), 9))
    for (int k = 2; k <= 4; ++k) CHECK(marginal_inconsistency(block_empirical(w, k)) <= 1e-15);
}

TEST_CASE("level-2 empirical law against a binomial tail") {
  const auto full = ShiftSpace::full_shift(2);
  const auto p = pofp_measure(full, Potential::zero(full), 12);
  const auto law = pushforward_empirical(p, 1);
  const auto at_least = [](double t) {
    return [t](const BlockEmpirical& mu) { return mu.frequency({1}) >= t - 1e-12; };
  };
  const double expected = std::log((12.0 + 1.0) / 4096.0) / 12.0;  // C(12,11) + C(12,12)
  CHECK(law.log_rate(at_least(0.9)) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(law.log_rate([](const BlockEmpirical&) { return true; }) == 0.0);
  CHECK(law.log_rate([](const BlockEmpirical&) { return false; }) == -INFINITY);
  double prev = 1.0;
  for (double t = 0.0; t <= 1.0; t += 1.0 / 24) {
    const double pr = law.probability(at_least(t));
    CHECK(pr <= prev);
    prev = pr;
  }
  double total = 0.0;
  for (const auto& atom : law.atoms) total += atom.second;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(law.atoms.size() == 13);
}

TEST_CASE("reverse markov examples") {
  const auto full = ShiftSpace::full_shift(3);
  // Detailed balance from a symmetric weight matrix.
  Eigen::MatrixXd w(3, 3);
  w << 1.0, 2.0, 0.5, 2.0, 0.3, 1.5, 0.5, 1.5, 2.5;
  Eigen::MatrixXd p = w;
  for (int i = 0; i < 3; ++i) p.row(i) /= w.row(i).sum();
  const auto q = MarkovMeasure::from_transition(full, 1, p);
  const auto qh = reverse_markov(q, Reversal::identity_time_reversal(3));
  CHECK(max_abs_diff(qh.transition(), q.transition()) <= 1e-12);

  const auto full2 = ShiftSpace::full_shift(2);
  const auto b = MarkovMeasure::bernoulli(full2, {0.3, 0.7});
  for (const auto& theta : {Reversal::time_reversal({1, 0}), Reversal::commutation({1, 0})}) {
    const auto bh = reverse_markov(b, theta);
    CHECK(bh.stationary()(0) == doctest::Approx(0.7).epsilon(1e-14));
    for (int u = 0; u < 2; ++u) CHECK(bh.transition()(u, 0) == doctest::Approx(0.7).epsilon(1e-14));
  }
}

TEST_CASE("reverse markov: time reversal formula for order 1") {
  std::mt19937_64 rng(17);
  const auto full = ShiftSpace::full_shift(3);
  const std::vector<Symbol> perm{2, 1, 0};
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = random_markov(full, 1, rng);
    const auto qh = reverse_markov(q, Reversal::time_reversal(perm));
    const auto& pi = q.stationary();
    const auto& pm = q.transition();
    for (int a = 0; a < 3; ++a) {
      const int ia = perm[static_cast<std::size_t>(a)];  // the swap is its own inverse
      CHECK(qh.stationary()(a) == doctest::Approx(pi(ia)).epsilon(1e-12));
      for (int c = 0; c < 3; ++c) {
        const int ib = perm[static_cast<std::size_t>(c)];
        CHECK(qh.transition()(a, c) == doctest::Approx(pi(ib) * pm(ib, ia) / pi(ia)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("reverse markov is an entropy-preserving involution") {
  std::mt19937_64 rng(29);
  std::vector<Fixture> fixtures = identity_fixtures();
  for (const auto& fx : fixtures) {
    for (int order = 1; order <= 3; ++order) {
      for (int trial = 0; trial < 20; ++trial) {
        const auto q = random_markov(fx.space, order, rng);
        const auto qh = reverse_markov(q, fx.reversal);
        const auto qhh = reverse_markov(qh, fx.reversal);
        CHECK(max_abs_diff(qhh.transition(), q.transition()) <= 1e-12);
        CHECK((qhh.stationary() - q.stationary()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(std::abs(entropy_rate(qh) - entropy_rate(q)) <= 1e-12);
        CHECK(qh.invariant_residual() <= 1e-12);
      }
    }
  }
}

TEST_CASE("level-2 rate function") {
  const auto full = ShiftSpace::full_shift(2);
  const auto zero = Potential::zero(full);
  for (double q : {0.1, 0.25, 0.5, 0.8}) {
    const auto b = MarkovMeasure::bernoulli(full, {q, 1 - q});
    CHECK(rate_level2(b, zero, kLog2) == doctest::Approx(kLog2 - binary_entropy(q)).epsilon(1e-14));
  }
  std::mt19937_64 rng(31);
  for (const auto& fx : identity_fixtures()) {
    const double p = spectral_pressure(fx.space, fx.potential);
    CHECK(std::abs(rate_level2(equilibrium_markov(fx.space, fx.potential), fx.potential, p)) <= 1e-10);
    for (int i = 0; i < 50; ++i) CHECK(rate_level2(random_markov(fx.space, order_for(fx.potential), rng), fx.potential, p) >= -1e-10);
  }
}

TEST_CASE("level-2 fluctuation relation and ep antisymmetry") {
  std::mt19937_64 rng(37);
  std::vector<Fixture> fixtures = identity_fixtures();
  fixtures.push_back(bernoulli_fixture());
  int total = 0;
  for (const auto& fx : fixtures) {
    const double p = spectral_pressure(fx.space, fx.potential);
    for (int i = 0; i < 50; ++i, ++total) {
      const auto q = random_markov(fx.space, order_for(fx.potential) + i % 2, rng);
      const auto qh = reverse_markov(q, fx.reversal);
      const double ep = mean_entropy_production(q, fx.potential, fx.reversal);
      CHECK(std::abs(rate_level2(qh, fx.potential, p) - rate_level2(q, fx.potential, p) - ep) <= 1e-10);
      CHECK(std::abs(mean_entropy_production(qh, fx.potential, fx.reversal) + ep) <= 1e-12);
    }
  }
  CHECK(total >= 500);
  // Reversible case.
  const auto full = ShiftSpace::full_shift(2);
  const auto letter = Potential::letter(full, {0.2, -0.7});
  const auto q = random_markov(full, 1, rng);
  CHECK(std::abs(mean_entropy_production(q, letter, Reversal::identity_time_reversal(2))) <= 1e-15);
}

TEST_CASE("weak gibbs constants") {
  const auto full = ShiftSpace::full_shift(2);
  const auto uniform = MarkovMeasure::bernoulli(full, {0.5, 0.5});
  for (int n = 1; n <= 12; ++n) CHECK(weak_gibbs_constants(uniform, Potential::zero(full), kLog2, n) == 0.0);

  const auto fx = range2_fixture();
  const double p = spectral_pressure(fx.space, fx.potential);
  const auto eq = equilibrium_markov(fx.space, fx.potential);
  double prev = INFINITY;
  for (int n = 4; n <= 16; ++n) {
    const double k = weak_gibbs_constants(eq, fx.potential, p, n);
    CHECK(k <= 1.0 / n);
    CHECK(k < prev);
    prev = k;
  }
  // Bernoulli(1/4, 3/4) against G = 0: the worst cylinder is 0^n with ratio 2^-n.
  const auto b = MarkovMeasure::bernoulli(full, {0.25, 0.75});
  for (int n : {4, 8, 12}) CHECK(weak_gibbs_constants(b, Potential::zero(full), kLog2, n) == doctest::Approx(kLog2).epsilon(1e-13));

  const auto mp = matrix_product_fixture();
  const auto bm = MarkovMeasure::bernoulli(mp.space, {0.5, 0.5});
  CHECK(std::isfinite(weak_gibbs_constants(bm, mp.potential, 1.7, 6)));
  const auto ex = Potential::explicit_sequence(10, [](int, std::span<const Symbol>) { return 0.0; });
  CHECK_THROWS_AS(weak_gibbs_constants(bm, ex, 0.0, 4), ContractError);
}
