// Copyright 2026 The VOCA-cpp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VOCA_PARALLEL_H_
#define VOCA_PARALLEL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

namespace voca {

// Worker count: VOCA_THREADS if set and positive, otherwise the hardware
// concurrency.
int ThreadCount();

// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and the thread count, and each index is written by exactly
// one chunk, so results are independent of scheduling.
void ParallelFor(size_t n, const std::function<void(size_t, size_t)>& fn);

// Fixed derivation of sub-seeds from the single user-facing seed.
uint64_t DeriveSeed(uint64_t seed, std::string_view purpose);

}  // namespace voca

#endif  // VOCA_PARALLEL_H_
