#pragma once

#include <optional>

namespace rankseg {

/// Thread count from an explicit request, else RANKSEG_THREADS, else 0
/// (leave the OpenMP default alone).
int resolve_threads(std::optional<int> requested);

/// Applies a thread count to subsequent parallel regions; n <= 0 is a no-op.
void set_threads(int n);
int max_threads();

}  // namespace rankseg
