#include "thermoforge/fixtures.hpp"

#include <cmath>

namespace thermoforge {
namespace {

const std::vector<Symbol> kSwap{1, 0};
const std::vector<Symbol> kIdentity{0, 1};

Potential full_range2(const ShiftSpace& s) {
  return Potential::additive(s, 2, std::map<Word, double>{
                                       {{0, 0}, 0.2}, {{0, 1}, -0.5}, {{1, 0}, 0.7}, {{1, 1}, 0.1}});
}

Potential full_range3(const ShiftSpace& s) {
  return Potential::additive(s, 3, [](std::span<const Symbol> w) {
    return 0.4 * w[0] - 0.25 * w[1] * w[2] + 0.15 * w[2] - 0.1 * w[0] * w[1];
  });
}

Potential golden_range2(const ShiftSpace& s) {
  return Potential::additive(s, 2, std::map<Word, double>{{{0, 0}, 0.1}, {{0, 1}, 0.6}, {{1, 0}, -0.3}});
}

Potential golden_range3(const ShiftSpace& s) {
  return Potential::additive(s, 3, std::map<Word, double>{{{0, 0, 0}, 0.05},
                                                          {{0, 0, 1}, 0.5},
                                                          {{0, 1, 0}, -0.2},
                                                          {{1, 0, 0}, -0.35},
                                                          {{1, 0, 1}, 0.3}});
}

}  // namespace

std::vector<Fixture> identity_fixtures() {
  const ShiftSpace full = ShiftSpace::full_shift(2);
  const ShiftSpace golden = ShiftSpace::golden_mean();
  const Potential full_r1 = Potential::letter(full, {0.0, std::log(3.0)});
  const Potential golden_r1 = Potential::letter(golden, {0.3, -0.4});
  std::vector<Fixture> out;
  out.push_back({"full2-r1-time", full, full_r1, Reversal::time_reversal(kSwap)});
  out.push_back({"full2-r1-comm", full, full_r1, Reversal::commutation(kSwap)});
  out.push_back({"full2-r2-time", full, full_range2(full), Reversal::time_reversal(kSwap)});
  out.push_back({"full2-r2-comm", full, full_range2(full), Reversal::commutation(kSwap)});
  out.push_back({"full2-r3-time", full, full_range3(full), Reversal::time_reversal(kSwap)});
  out.push_back({"golden-r1-time", golden, golden_r1, Reversal::time_reversal(kIdentity)});
  out.push_back({"golden-r1-comm", golden, golden_r1, Reversal::commutation(kIdentity)});
  out.push_back({"golden-r2-time", golden, golden_range2(golden), Reversal::time_reversal(kIdentity)});
  out.push_back({"golden-r2-comm", golden, golden_range2(golden), Reversal::commutation(kIdentity)});
  out.push_back({"golden-r3-time", golden, golden_range3(golden), Reversal::time_reversal(kIdentity)});
  return out;
}

Fixture bernoulli_fixture() {
  const ShiftSpace full = ShiftSpace::full_shift(2);
  return {"bernoulli", full, Potential::letter(full, {0.0, 0.5}), Reversal::time_reversal(kSwap)};
}

Fixture range2_fixture() {
  const ShiftSpace golden = ShiftSpace::golden_mean();
  return {"golden-range2", golden,
          Potential::additive(golden, 2, [](std::span<const Symbol> w) { return 0.3 * w[0] - 0.2 * w[1] + 0.1; }),
          Reversal::time_reversal(kIdentity)};
}

Fixture matrix_product_fixture() {
  const ShiftSpace full = ShiftSpace::full_shift(2);
  Eigen::MatrixXd m0(2, 2);
  Eigen::MatrixXd m1(2, 2);
  m0 << 2, 1, 1, 1;
  m1 << 1, 1, 1, 3;
  return {"matrix-product", full, Potential::matrix_product(full, {m0, m1}), Reversal::time_reversal(kSwap)};
}

}  // namespace thermoforge
