#pragma once

#include <functional>

namespace npmix {

// Adaptive Gauss-Kronrod integration over a finite interval to an absolute
// tolerance.  Throws QuadratureFailure if the error estimate cannot be
// brought below the tolerance.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol = 1e-10);

}  // namespace npmix
