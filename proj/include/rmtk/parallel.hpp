#pragma once

#include <cstddef>
#include <functional>

namespace rmtk {

/// Worker count from RMTK_WORKERS, else the hardware concurrency (at least 1).
std::size_t default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
/// runs exactly once; callers write results into slot i, so reductions done
/// afterwards in index order are independent of scheduling. If any body
/// throws, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace rmtk
