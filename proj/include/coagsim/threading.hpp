#pragma once

#include <functional>

namespace coagsim {

// Caps internal parallelism of the operator and dynamics loops. 1 = serial.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n). Every index is computed independently and
// accumulated locally, so the result does not depend on the thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace coagsim
