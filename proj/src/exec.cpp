#include "teugels/exec.hpp"

#include <omp.h>

#include "teugels/errors.hpp"

namespace teugels {

void set_worker_count(int n) {
    if (n < 1) throw ValidationError("worker count must be >= 1");
    omp_set_num_threads(n);
}

int worker_count() { return omp_get_max_threads(); }

} // namespace teugels
