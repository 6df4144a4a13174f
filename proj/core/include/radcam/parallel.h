/* Copyright 2026 The Radcam Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Scene-level parallel loop. Results land in per-index slots, so callers
// reduce them in index order and stay independent of the thread count.

#ifndef RADCAM_PARALLEL_H_
#define RADCAM_PARALLEL_H_

#include <functional>

namespace radcam {

// Runs fn(i) for i in [0, n) on up to `threads` workers. The exception of
// the lowest failing index is rethrown after all workers finish.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn);

// Keeps freed tape memory in the heap instead of returning it to the OS.
// Training allocates and drops many mid-sized buffers per step; without
// this most of the time goes to mmap/munmap. No-op off glibc.
void TuneAllocator();

}  // namespace radcam

#endif  // RADCAM_PARALLEL_H_
