#pragma once

#include <functional>

namespace xpci {

// Worker cap: XPCI_THREADS when set (>= 1), else hardware concurrency.
int max_threads();

// Runs fn(0) ... fn(n-1), partitioned over at most max_threads() workers in
// contiguous index blocks. fn must not touch another index's output slot;
// under that contract results are identical to the serial order.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace xpci
