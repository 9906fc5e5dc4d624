#pragma once

#include <cstddef>

namespace teugels {

// Every data-parallel kernel takes one of these. Both policies produce
// bit-identical results: work is split by path / node index and reductions
// run in a fixed order.
enum class Exec { serial, parallel };

// Fixed block size for ordered reductions. Independent of thread count.
inline constexpr std::size_t kReductionBlock = 2048;

void set_worker_count(int n);
int worker_count();

} // namespace teugels
