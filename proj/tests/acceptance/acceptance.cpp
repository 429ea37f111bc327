// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every quantity is checked against an oracle computed here.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "thermoforge/fixtures.hpp"
#include "thermoforge/fluctuation.hpp"
#include "thermoforge/io.hpp"
#include "thermoforge/measures.hpp"
#include "thermoforge/numeric.hpp"
#include "thermoforge/pressure.hpp"
#include "thermoforge/runner.hpp"

using namespace thermoforge;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool passed = true;
  std::string detail;
};

int failures = 0;

void report(int number, const std::string& title, const std::function<Outcome()>& body) {
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  if (!out.passed) ++failures;
  fmt::print("{} [{:>2}] {}: {}\n", out.passed ? "PASS" : "FAIL", number, title, out.detail);
  std::fflush(stdout);
}

double eigen_spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  double best = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::max(best, es.eigenvalues()[i].real());
  return best;
}

// Closed forms for the Bernoulli fixture: full 2-shift, letters (g0, g1),
// time reversal with the swap.
constexpr double kG0 = 0.0;
constexpr double kG1 = 0.5;

double closed_e(double alpha) {
  return std::log(std::exp((1 - alpha) * kG0 + alpha * kG1) + std::exp(alpha * kG0 + (1 - alpha) * kG1)) -
         std::log(std::exp(kG0) + std::exp(kG1));
}

double closed_sbar() { return -(kG1 - kG0) * (std::exp(kG0) - std::exp(kG1)) / (std::exp(kG0) + std::exp(kG1)); }

// Cramer rate of sigma_n / n = (g0 - g1)(1 - 2 f), f the frequency of 1s.
double cramer_rate(double s) {
  const double q1 = std::exp(kG1) / (std::exp(kG0) + std::exp(kG1));
  const double f = (1.0 - s / (kG0 - kG1)) / 2.0;
  return xlogx(f) - f * std::log(q1) + xlogx(1 - f) - (1 - f) * std::log(1 - q1);
}

// A grid sup with alpha step h undershoots the exact conjugate by at most
// h^2/8 * max e''; here e'' = d^2 sech^2(d(alpha - 1/2)) <= d^2 with d = g1 - g0.
double legendre_grid_bound() {
  const double h = 0.01;
  return h * h / 8.0 * (kG1 - kG0) * (kG1 - kG0);
}

std::vector<Fixture> fr_fixtures() {
  std::vector<Fixture> out;
  for (auto& f : identity_fixtures()) {
    if (f.potential.as_additive()->range() <= 2) out.push_back(f);
  }
  return out;
}

Outcome criterion1() {
  const auto start = Clock::now();
  const auto fixtures = fr_fixtures();
  std::vector<double> alpha;
  for (int i = 0; i < 25; ++i) alpha.push_back(-1.0 + 0.125 * i);
  double jz = 0.0, rs = 0.0;
  for (const auto& fx : fixtures) {
    for (int n = 1; n <= 16; ++n) {
      const auto law = sigma_law(fx.space, fx.potential, fx.reversal, n);
      jz = std::max(jz, std::abs(jarzynski(law) - 1.0));
      for (double a : alpha) rs = std::max(rs, std::abs(renyi(law, a) - renyi(law, 1.0 - a)));
    }
  }
  const double t = seconds_since(start);
  const bool ok = fixtures.size() >= 5 && jz <= 1e-12 && rs <= 1e-10 && t < 10.0;
  return {ok, fmt::format("{} fixtures, n<=16, max|jarzynski-1|={:.2e}, max renyi asymmetry={:.2e}, {:.2f} s",
                          fixtures.size(), jz, rs, t)};
}

Outcome criterion2() {
  std::vector<Fixture> fixtures = identity_fixtures();
  fixtures.push_back(bernoulli_fixture());
  fixtures.push_back(matrix_product_fixture());
  double worst = 0.0;
  std::size_t atoms = 0;
  for (const auto& fx : fixtures) {
    for (int n = 1; n <= 16; ++n) {
      const auto law = sigma_law(fx.space, fx.potential, fx.reversal, n);
      for (const auto& a : law.atoms()) {
        const Atom* m = law.find(-a.value);
        worst = std::max(worst, m ? std::abs(m->weight - a.weight * std::exp(-a.value)) : INFINITY);
        ++atoms;
      }
    }
  }
  return {worst <= 1e-12, fmt::format("{} fixtures, {} atoms, worst |w(-s) - w(s)e^-s|={:.2e}", fixtures.size(), atoms, worst)};
}

Outcome criterion3() {
  double worst = 0.0;
  int cases = 0;
  for (const auto& fx : identity_fixtures()) {
    const auto tm = transfer_matrix(fx.space, fx.potential);
    const int r = fx.potential.as_additive()->range();
    for (int n = std::max(1, r - 1); n <= 16; ++n, ++cases) {
      const double lz = log_partition(fx.space, fx.potential, n);
      const double lt = log_trace_power(tm.matrix, n);
      worst = std::max(worst, std::abs(lz - lt) / std::max(1.0, std::abs(lt)));
    }
  }
  return {worst <= 1e-9, fmt::format("{} (fixture, n) pairs, worst relative gap={:.2e}", cases, worst)};
}

Outcome criterion4() {
  const auto golden = ShiftSpace::golden_mean();
  const double log_phi = std::log(eigen_spectral_radius((Eigen::MatrixXd(2, 2) << 1, 1, 1, 0).finished()));
  const auto est = pressure_periodic(golden, Potential::zero(golden), 16);
  bool monotone = true;
  for (int n = 5; n <= 16; ++n) {
    const double prev = std::abs(est.per_n[static_cast<std::size_t>(n - 2)].value - log_phi);
    const double cur = std::abs(est.per_n[static_cast<std::size_t>(n - 1)].value - log_phi);
    monotone = monotone && cur <= prev;
  }
  const double err16 = std::abs(est.per_n.back().value - log_phi);

  const auto full = ShiftSpace::full_shift(2);
  const auto b = pressure_periodic(full, Potential::letter(full, {0.0, std::log(3.0)}), 16);
  double worst = 0.0;
  for (const auto& pt : b.per_n) {
    double binom = 0.0, c = 1.0;
    for (int j = 0; j <= pt.n; ++j) {
      binom += c * std::pow(3.0, j);
      c = c * (pt.n - j) / (j + 1);
    }
    worst = std::max(worst, std::abs(pt.value - std::log(binom) / pt.n));
  }
  const bool ok = err16 <= 0.05 && monotone && worst <= 1e-10;
  return {ok, fmt::format("golden |p16-log phi|={:.2e}, error nonincreasing for n>=4: {}; full shift max|p_n-log4|={:.2e}",
                          err16, monotone ? "yes" : "no", worst)};
}

Outcome criterion5() {
  std::mt19937_64 rng(1);
  std::vector<Fixture> fixtures = identity_fixtures();
  fixtures.push_back(bernoulli_fixture());
  fixtures.push_back(range2_fixture());
  double excess = -INFINITY, gap = 0.0, oracle = 0.0;
  for (const auto& fx : fixtures) {
    const double p = spectral_pressure(fx.space, fx.potential);
    oracle = std::max(oracle, std::abs(p - std::log(eigen_spectral_radius(transfer_matrix(fx.space, fx.potential).matrix))));
    const auto eq = equilibrium_markov(fx.space, fx.potential);
    gap = std::max(gap, std::abs(entropy_rate(eq) + mean_potential(eq, fx.potential) - p));
    const int order = std::max(1, fx.potential.as_additive()->range() - 1);
    for (int i = 0; i < 200; ++i) {
      const auto q = random_markov(fx.space, order, rng);
      excess = std::max(excess, entropy_rate(q) + mean_potential(q, fx.potential) - p);
    }
  }
  const bool ok = excess <= 1e-10 && gap < 1e-10 && oracle <= 1e-12;
  return {ok, fmt::format("{} fixtures x 200 chains, max h+G-p={:.3e}, equilibrium gap={:.2e}, |p - dense eig|={:.1e}",
                          fixtures.size(), excess, gap, oracle)};
}

Outcome criterion6() {
  std::mt19937_64 rng(2);
  std::vector<Fixture> fixtures = identity_fixtures();
  fixtures.push_back(bernoulli_fixture());
  double fr = 0.0, inv = 0.0, ent = 0.0;
  const int total = 500;
  for (int i = 0; i < total; ++i) {
    const auto& fx = fixtures[static_cast<std::size_t>(i) % fixtures.size()];
    const double p = spectral_pressure(fx.space, fx.potential);
    const int order = std::max(1, fx.potential.as_additive()->range() - 1) + (i / static_cast<int>(fixtures.size())) % 2;
    const auto q = random_markov(fx.space, order, rng);
    const auto qh = reverse_markov(q, fx.reversal);
    const auto qhh = reverse_markov(qh, fx.reversal);
    fr = std::max(fr, std::abs(rate_level2(qh, fx.potential, p) - rate_level2(q, fx.potential, p) -
                               mean_entropy_production(q, fx.potential, fx.reversal)));
    inv = std::max({inv, (qhh.transition() - q.transition()).cwiseAbs().maxCoeff(),
                    (qhh.stationary() - q.stationary()).cwiseAbs().maxCoeff()});
    ent = std::max(ent, std::abs(entropy_rate(qh) - entropy_rate(q)));
  }
  const bool ok = fr <= 1e-10 && inv <= 1e-12 && ent <= 1e-12;
  return {ok, fmt::format("{} chains, max|I(Q^)-I(Q)-ep(Q)|={:.2e}, involution={:.2e}, entropy={:.2e}", total, fr, inv, ent)};
}

Outcome criterion7() {
  const auto fx = bernoulli_fixture();
  const auto ep = entropic_pressure(fx.space, fx.potential, fx.reversal, default_alpha_grid());
  double e_oracle = 0.0;
  for (std::size_t i = 0; i < ep.alpha.size(); ++i) e_oracle = std::max(e_oracle, std::abs(ep.e[i] - closed_e(ep.alpha[i])));
  const auto rate = legendre(ep.grid());
  double fr = 0.0, cramer = 0.0;
  int overlap = 0;
  for (std::size_t i = 0; i < rate.grid.size(); ++i) {
    const double s = rate.grid[i];
    const auto mirror = rate.at(-s);
    if (rate.boundary[i] || !mirror) continue;
    fr = std::max(fr, std::abs(*mirror - rate.values[i] - s));
    if (std::abs(s) < 0.5) cramer = std::max(cramer, std::abs(rate.values[i] - cramer_rate(s)));
    ++overlap;
  }
  const auto curve = contraction_parametric(fx.space, fx.potential, fx.reversal, uniform_grid(-2.0, 3.0, 0.01));
  const auto at_curve = legendre(ep.grid(), curve.grid);
  double route = 0.0;
  int shared = 0;
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    if (at_curve.boundary[i]) continue;
    route = std::max(route, std::abs(at_curve.values[i] - curve.values[i]));
    ++shared;
  }
  const bool ok = fr <= 1e-6 && route <= 1e-6 && overlap > 0 && shared > 0 && e_oracle <= 1e-12 &&
                  cramer <= legendre_grid_bound();
  return {ok, fmt::format("max|I(-s)-I(s)-s|={:.2e} on {} points, contraction vs legendre={:.2e} on {} points, "
                          "|e - closed form|={:.1e}, |I - Cramer|={:.1e} (grid bound {:.1e})",
                          fr, overlap, route, shared, e_oracle, cramer, legendre_grid_bound())};
}

Outcome criterion8() {
  const auto fx = bernoulli_fixture();
  const auto ep = entropic_pressure(fx.space, fx.potential, fx.reversal, default_alpha_grid());
  const auto rate = legendre(ep.grid());
  const double s = -0.3, delta = 0.05;
  const auto inf = rate.infimum(s - delta, s + delta);
  if (!inf || !std::isfinite(*inf)) return {false, "I is not finite near s"};
  double oracle = INFINITY;
  for (double x = s - delta; x <= s + delta + 1e-12; x += 1e-4) oracle = std::min(oracle, cramer_rate(x));
  auto err = [&](int n) { return std::abs(ft_empirical_check(fx.space, fx.potential, fx.reversal, n, s - delta, s + delta) + *inf); };
  const double e10 = err(10), e20 = err(20);
  const bool ok = e20 <= 0.1 && e20 < e10 && std::abs(*inf - oracle) <= legendre_grid_bound();
  return {ok, fmt::format("s={}, delta={}, inf I={:.6f} (Cramer {:.6f}), error n=10: {:.4f}, n=20: {:.4f}", s, delta, *inf,
                          oracle, e10, e20)};
}

Outcome criterion9() {
  const auto fx = bernoulli_fixture();
  const auto law = sigma_law(fx.space, fx.potential, fx.reversal, 20);
  const double chern = std::abs(chernoff_exponent(law, 20) - closed_e(0.5));
  const double minus_de0 = -entropic_pressure_derivative(fx.space, fx.potential, fx.reversal, 0.0);
  const double stein = std::abs(stein_exponent(law, 20) - minus_de0);
  const double sbar = closed_sbar();
  const double i0 = -closed_e(0.5);
  const auto alphas = hoeffding_alpha_grid();
  const auto e = entropic_pressure(fx.space, fx.potential, fx.reversal, alphas);
  std::vector<double> r{0.0, i0};
  for (double x : uniform_grid(sbar, sbar + 1.0, 0.05)) r.push_back(x);
  const auto f = hoeffding_curve(e.grid(), r);
  bool tail_zero = true;
  for (std::size_t i = 2; i < r.size(); ++i) tail_zero = tail_zero && f.y[i] == 0.0;
  const double f0 = std::abs(f.y[0] - sbar);
  const double fixed = std::abs(f.y[1] - i0);
  const bool ok = chern <= 0.05 && stein <= 0.05 && std::abs(minus_de0 - sbar) <= 1e-6 && f0 <= 1e-3 && tail_zero &&
                  fixed <= 1e-3;
  return {ok, fmt::format("|chernoff20-e(1/2)|={:.4f}, |stein20+e'(0)|={:.2e}, |f(0)-sbar|={:.2e}, f=0 beyond sbar: {}, "
                          "|f(I(0))-I(0)|={:.2e}",
                          chern, stein, f0, tail_zero ? "yes" : "no", fixed)};
}

Outcome criterion10() {
  const auto fx = range2_fixture();
  const double p = spectral_pressure(fx.space, fx.potential);
  const auto eq = equilibrium_markov(fx.space, fx.potential);
  bool bounded = true, decreasing = true;
  double prev = INFINITY, last = 0.0;
  for (int n = 4; n <= 16; ++n) {
    const double k = weak_gibbs_constants(eq, fx.potential, p, n);
    bounded = bounded && k <= 1.0 / n;
    decreasing = decreasing && k < prev;
    prev = last = k;
  }
  const auto full = ShiftSpace::full_shift(2);
  double uniform = 0.0;
  for (int n = 4; n <= 16; ++n)
    uniform = std::max(uniform, std::abs(weak_gibbs_constants(MarkovMeasure::bernoulli(full, {0.5, 0.5}),
                                                              Potential::zero(full), std::log(2.0), n)));
  const bool ok = bounded && decreasing && uniform == 0.0;
  return {ok, fmt::format("range-2 equilibrium: <=1/n {}, decreasing {}, value at n=16 {:.4f}; uniform case max {}",
                          bounded ? "yes" : "no", decreasing ? "yes" : "no", last, uniform)};
}

Outcome criterion11() {
  double additive = 0.0;
  for (const auto& fx : identity_fixtures())
    for (int k = 1; k <= 8; ++k)
      for (int n : {8, 12}) additive = std::max(additive, aa_defect(fx.space, fx.potential, k, n));
  const auto mp = matrix_product_fixture();
  const double d2 = aa_defect(mp.space, mp.potential, 2, 16);
  const double d4 = aa_defect(mp.space, mp.potential, 4, 16);
  const double d8 = aa_defect(mp.space, mp.potential, 8, 16);
  const double p16 = pressure_periodic(mp.space, mp.potential, 16).per_n.back().value;
  const auto block = block_average(mp.space, mp.potential, 8);
  const double pb = spectral_pressure(mp.space, block);
  const double pb_oracle = std::log(eigen_spectral_radius(transfer_matrix(mp.space, block).matrix));
  const bool ok = additive == 0.0 && d2 > d4 && d4 > d8 && std::abs(p16 - pb) <= 0.05 && std::abs(pb - pb_oracle) <= 1e-10;
  return {ok, fmt::format("additive defect {}; matrix product k=2,4,8: {:.4f}, {:.4f}, {:.4f}; p16={:.4f} vs block-8 {:.4f}",
                          additive, d2, d4, d8, p16, pb)};
}

Outcome criterion12() {
  const fs::path root = fs::temp_directory_path() / "thermoforge-acceptance";
  fs::remove_all(root);
  VerifyOptions opt;
  opt.n_max = 16;
  opt.seed = 1;
  const auto start = Clock::now();
  opt.output_dir = root / "a";
  const auto first = run_verify(opt);
  const double t = seconds_since(start);
  opt.output_dir = root / "b";
  const auto second = run_verify(opt);
  bool identical = first.files == second.files;
  for (const auto& name : first.files)
    identical = identical && read_text_file(root / "a" / name) == read_text_file(root / "b" / name);
  bool passed = true;
  for (const auto& c : first.checks) passed = passed && c.passed;
  fs::remove_all(root);
  return {identical && passed && t < 60.0,
          fmt::format("{} files byte-identical: {}, all identities pass: {}, one run {:.2f} s", first.files.size(),
                      identical ? "yes" : "no", passed ? "yes" : "no", t)};
}

}  // namespace

int main() {
  report(1, "exact transient FR", criterion1);
  report(2, "atomwise Radon-Nikodym identity", criterion2);
  report(3, "trace/orbit cross-oracle", criterion3);
  report(4, "pressure convergence", criterion4);
  report(5, "variational principle", criterion5);
  report(6, "level-2 FR and reversed chains", criterion6);
  report(7, "FR for the rate function", criterion7);
  report(8, "LDP empirical check", criterion8);
  report(9, "error exponents", criterion9);
  report(10, "weak Gibbs constants", criterion10);
  report(11, "asymptotic additivity diagnostics", criterion11);
  report(12, "determinism and runtime of verify", criterion12);
  fmt::print("{} of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
