// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace pilotplan {

/// Runs fn(begin, end) over disjoint chunks of [0, count) on `workers`
/// threads (0 = hardware concurrency). Callers that need determinism must
/// make fn write to per-index storage; chunking never affects results.
void parallel_for_chunks(std::int64_t count, int workers,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace pilotplan
