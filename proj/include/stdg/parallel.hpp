#pragma once

#include <functional>

namespace stdg {

/// Worker count used by parallel_for. Defaults to 1; results never depend on it because
/// every index writes only its own output slot.
void set_num_threads(int n);
[[nodiscard]] int num_threads();

/// Calls body(i) for i in [0, n), split into contiguous chunks across the worker threads.
/// The first exception thrown by any chunk is rethrown on the caller.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace stdg
