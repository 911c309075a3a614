#pragma once

#include <cstddef>
#include <functional>

namespace qmoco {

/// Worker count used by parallel_for; defaults to 1.
void set_threads(std::size_t n);
std::size_t threads();

/// Runs fn(i) for i in [0, n). Each index must write only its own output slot,
/// so results do not depend on scheduling. Exceptions are rethrown (first one).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qmoco
