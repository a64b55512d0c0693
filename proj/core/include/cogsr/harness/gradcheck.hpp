#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogsr/numerics/grad_check.hpp"

namespace cogsr::harness {

struct NamedGradReport {
  std::string name;
  numerics::GradCheckReport report;
};

// Central-difference check of every registered tape op on small random
// inputs, each reduced to a scalar through a fixed random projection.
std::vector<NamedGradReport> gradcheck_ops(std::uint64_t seed = 0);

// Check of the full rectified-flow loss through a depth-2 DiT with
// conditioning, all parameters perturbed away from their initial values.
NamedGradReport gradcheck_dit(std::uint64_t seed = 0);

}  // namespace cogsr::harness
