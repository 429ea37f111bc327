#pragma once

#include <string>
#include <vector>

#include "thermoforge/potential.hpp"
#include "thermoforge/shift_space.hpp"

namespace thermoforge {

/// A dynamical system with a potential and a reversal.
struct Fixture {
  std::string name;
  ShiftSpace space;
  Potential potential;
  Reversal reversal;
};

/// Full 2-shift and golden mean, range 1, 2 and 3 potentials, both reversal
/// kinds. On the golden mean the only admissible permutation is the identity.
std::vector<Fixture> identity_fixtures();

/// Full 2-shift, g = (0, 0.5), time reversal with the swap 0 <-> 1.
Fixture bernoulli_fixture();

/// Golden mean with g(ab) = 0.3 a - 0.2 b + 0.1.
Fixture range2_fixture();

/// Full 2-shift with M_0 = [[2,1],[1,1]], M_1 = [[1,1],[1,3]] and the
/// infinity norm; time reversal with the swap.
Fixture matrix_product_fixture();

}  // namespace thermoforge
