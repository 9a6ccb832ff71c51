/* Copyright 2026 The bevmot Authors. All Rights Reserved.

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
#pragma once

#include <chrono>
#include <stdexcept>
#include <vector>

#include "bevmot/core.hpp"
#include "bevmot/eval.hpp"
#include "bevmot/tracker.hpp"

namespace bevmot {

/// Wall-clock latency of each tracker step on a clip, pooled across
/// repeats (fresh runtime per repeat). Detection filtering and file I/O
/// happen outside the timed region.
inline LatencyReport bench_tracker(const TrackerConfig& cfg,
                                   const SequenceClip& clip, int repeats) {
  if (repeats < 1) throw std::invalid_argument("bench_tracker: repeats must be >= 1");

  std::vector<FrameDetections> filtered;
  filtered.reserve(clip.frames.size());
  for (const FrameDetections& frame : clip.frames) {
    filtered.push_back(filter_detections(frame, cfg));
  }

  using Clock = std::chrono::steady_clock;
  std::vector<double> samples_ms;
  samples_ms.reserve(filtered.size() * static_cast<std::size_t>(repeats));
  for (int rep = 0; rep < repeats; ++rep) {
    TrackerRuntime runtime(cfg);
    for (const FrameDetections& frame : filtered) {
      const Clock::time_point start = Clock::now();
      volatile std::size_t sink = runtime.step(frame).size();
      const Clock::time_point stop = Clock::now();
      (void)sink;
      samples_ms.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
    }
  }
  return latency_percentiles(std::move(samples_ms));
}

}  // namespace bevmot
