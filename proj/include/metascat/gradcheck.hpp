#pragma once

#include "metascat/calibrate.hpp"

namespace metascat {

// Central finite differences against the analytic adjoint on a random
// instance, with the alignment phase frozen at its base-point value (the
// objective the analytic gradient is exact for). Returns the largest
// absolute coordinate deviation divided by the largest gradient magnitude.
double finite_difference_check(std::uint64_t seed, CostKind kind, int n_antennas = 2,
                               int n_meta = 3, int batch = 4, double step = 1e-6);

}  // namespace metascat
