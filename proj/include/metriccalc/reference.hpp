#pragma once

#include "metriccalc/derivation.hpp"
#include "metriccalc/ladder.hpp"
#include "metriccalc/lip.hpp"
#include "metriccalc/space.hpp"

#include <vector>

namespace mc::reference {

// Serial implementations written straight from the definitions, kept as the
// comparison baseline for the OpenMP kernels. Outputs must match bitwise.

double glip(const ScalarField& f);

void lip_resolved(const ScalarField& f, const ScaleLadder& ladder, std::vector<double>& upper,
                  std::vector<double>& lower);

ComponentTable component_table(const std::vector<Derivation>& derivations,
                               const std::vector<ScalarField>& generators);

ScalarField mcshane_extend(const Space& space, const std::vector<int>& A,
                           const std::vector<double>& f_on_A, double L);

} // namespace mc::reference
