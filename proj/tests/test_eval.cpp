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
#include <catch2/catch.hpp>
#include <random>

#include "bevmot/bench.hpp"
#include "bevmot/eval.hpp"
#include "test_support.hpp"

using namespace bevmot;
using support::person_box;

namespace {

Detection scored(const OrientedBox3D& box, double score) {
  return Detection(box, ClassId::kPerson, score);
}

std::vector<TrackOutput> track_line(int id, int first_frame, int last_frame,
                                    double x, double y) {
  std::vector<TrackOutput> outputs;
  for (int f = first_frame; f <= last_frame; ++f) {
    outputs.push_back({f, id, person_box(x, y), 1.0});
  }
  return outputs;
}

void append(std::vector<TrackOutput>& into, const std::vector<TrackOutput>& from) {
  into.insert(into.end(), from.begin(), from.end());
}

}  // namespace

TEST_CASE("match_detections") {
  const OrientedBox3D gt = person_box(1, 1);
  SECTION("exact hit is a TP with IoU 1") {
    const DetectionMatches m = match_detections({scored(gt, 0.9)}, {gt}, 0.10);
    REQUIRE(m.matches.size() == 1);
    CHECK(std::get<2>(m.matches[0]) == 1.0);
    CHECK(m.unmatched_preds.empty());
    CHECK(m.unmatched_gts.empty());
  }
  SECTION("two predictions on one GT: higher score wins, other is FP") {
    const DetectionMatches m =
        match_detections({scored(gt, 0.7), scored(gt, 0.9)}, {gt}, 0.10);
    REQUIRE(m.matches.size() == 1);
    CHECK(std::get<0>(m.matches[0]) == 1);  // the 0.9 prediction
    CHECK(m.unmatched_preds == std::vector<int>{0});
  }
  SECTION("IoU just below the threshold is an FP") {
    // Slide a person box along x until the IoU drops to ~0.09.
    // IoU(s) = (0.8-s)/(0.8+s) = 0.09 at s = 0.8*0.91/1.09.
    const double s = 0.8 * (1.0 - 0.09) / (1.0 + 0.09);
    const OrientedBox3D pred_box = person_box(1 + s, 1);
    REQUIRE(rotated_bev_iou(pred_box, gt) == Approx(0.09).margin(1e-6));
    const DetectionMatches m = match_detections({scored(pred_box, 0.9)}, {gt}, 0.10);
    CHECK(m.matches.empty());
    CHECK(m.unmatched_preds == std::vector<int>{0});
    CHECK(m.unmatched_gts == std::vector<int>{0});
  }
}

TEST_CASE("average_precision") {
  SECTION("all TPs covering all GT") {
    CHECK(average_precision({{0.9, true}, {0.8, true}}, 2) == 1.0);
  }
  SECTION("no TPs with GT present") {
    CHECK(average_precision({{0.9, false}}, 3) == 0.0);
  }
  SECTION("three-detection case from the PR envelope") {
    const double ap =
        average_precision({{0.9, true}, {0.8, false}, {0.7, true}}, 2);
    CHECK(ap == Approx(5.0 / 6.0).margin(1e-9));
  }
  SECTION("empty-world conventions") {
    CHECK(average_precision({}, 0) == 1.0);
    CHECK(average_precision({{0.5, false}}, 0) == 0.0);
  }
  SECTION("invariant under monotone score transforms") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::pair<double, bool>> flags;
      long gt = 0;
      for (int k = 0; k < 20; ++k) {
        const bool tp = u(rng) < 0.5;
        gt += tp;
        flags.emplace_back(u(rng), tp);
      }
      gt += 2;  // some never-detected GT
      std::vector<std::pair<double, bool>> squashed = flags;
      for (auto& [score, tp] : squashed) score = std::tanh(3.0 * score) + 7.0;
      CHECK(average_precision(flags, gt) ==
            Approx(average_precision(squashed, gt)).margin(1e-12));
    }
  }
}

TEST_CASE("detection_metrics_sliced") {
  EvalConfig cfg;

  SECTION("perfect predictions give ones everywhere") {
    std::vector<FrameDetections> gt(3), pred(3);
    for (int f = 0; f < 3; ++f) {
      gt[f].frame_index = pred[f].frame_index = f;
      for (double r : {0.5, 2.5, 4.2}) {
        gt[f].detections.push_back(scored(person_box(r, 0), 1.0));
        pred[f].detections.push_back(scored(person_box(r, 0), 0.9));
      }
    }
    const std::vector<DetectionMetricsRow> rows =
        detection_metrics_sliced(pred, gt, cfg);
    REQUIRE(rows.size() == 5);
    for (const DetectionMetricsRow& row : rows) {
      CHECK(row.precision == 1.0);
      CHECK(row.recall == 1.0);
      CHECK(row.f1 == 1.0);
      CHECK(row.ap == 1.0);
      CHECK(row.fp == 0);
      CHECK(row.fn == 0);
    }
    CHECK(rows[0].tp == 3);   // only the 0.5 m person
    CHECK(rows[4].tp == 9);
  }

  SECTION("a missed GT at 2.5 m appears as FN only from the 3 m row on") {
    std::vector<FrameDetections> gt(1), pred(1);
    gt[0].detections.push_back(scored(person_box(2.5, 0), 1.0));
    gt[0].detections.push_back(scored(person_box(0.5, 0), 1.0));
    pred[0].detections.push_back(scored(person_box(0.5, 0), 0.9));
    const std::vector<DetectionMetricsRow> rows =
        detection_metrics_sliced(pred, gt, cfg);
    CHECK(rows[0].fn == 0);  // r = 1
    CHECK(rows[1].fn == 0);  // r = 2
    CHECK(rows[2].fn == 1);  // r = 3
    CHECK(rows[3].fn == 1);
    CHECK(rows[4].fn == 1);
    // Cumulative slicing: gt count never decreases with radius.
    long prev = -1;
    for (const DetectionMetricsRow& row : rows) {
      CHECK(row.tp + row.fn >= prev);
      prev = row.tp + row.fn;
    }
  }

  SECTION("a single radius beyond max range equals unsliced metrics") {
    std::vector<FrameDetections> gt(2), pred(2);
    for (int f = 0; f < 2; ++f) {
      gt[f].frame_index = pred[f].frame_index = f;
      gt[f].detections.push_back(scored(person_box(1.0 + f, 0.5), 1.0));
      pred[f].detections.push_back(scored(person_box(1.02 + f, 0.5), 0.8));
      pred[f].detections.push_back(scored(person_box(-3.0, 1.0), 0.6));  // FP
    }
    EvalConfig wide = cfg;
    wide.radii = {100.0};
    const DetectionMetricsRow row = detection_metrics_sliced(pred, gt, wide)[0];
    CHECK(row.tp == 2);
    CHECK(row.fp == 2);
    CHECK(row.fn == 0);
    CHECK(row.precision == Approx(0.5));
    CHECK(row.recall == 1.0);
    CHECK(row.miou > 0.8);
  }

  SECTION("frame mismatch is an error") {
    std::vector<FrameDetections> gt(2), pred(1);
    CHECK_THROWS_AS(detection_metrics_sliced(pred, gt, cfg), std::runtime_error);
    pred.resize(2);
    pred[1].frame_index = 7;
    gt[1].frame_index = 1;
    CHECK_THROWS_AS(detection_metrics_sliced(pred, gt, cfg), std::runtime_error);
  }
}

TEST_CASE("clear_mot") {
  SECTION("identical sequences are perfect") {
    std::vector<TrackOutput> gt;
    append(gt, track_line(1, 0, 3, 1, 1));
    append(gt, track_line(2, 0, 3, -2, 0.5));
    const MotMetrics m = clear_mot(gt, gt, 0.3);
    CHECK(m.mota == 1.0);
    CHECK(m.motp == 1.0);
    CHECK(m.idsw == 0);
    CHECK(m.fp == 0);
    CHECK(m.fn == 0);
    CHECK(m.gt_count == 8);
  }
  SECTION("one miss out of six GT boxes") {
    std::vector<TrackOutput> gt;
    append(gt, track_line(1, 0, 2, 1, 1));
    append(gt, track_line(2, 0, 2, -2, 0.5));
    std::vector<TrackOutput> pred;
    append(pred, track_line(11, 0, 2, 1, 1));
    append(pred, track_line(12, 0, 1, -2, 0.5));  // misses frame 2
    const MotMetrics m = clear_mot(pred, gt, 0.3);
    CHECK(m.fn == 1);
    CHECK(m.fp == 0);
    CHECK(m.idsw == 0);
    CHECK(m.mota == Approx(1.0 - 1.0 / 6.0));
  }
  SECTION("one id switch over four frames") {
    const std::vector<TrackOutput> gt = track_line(1, 0, 3, 1, 1);
    std::vector<TrackOutput> pred;
    append(pred, track_line(5, 0, 1, 1, 1));
    append(pred, track_line(6, 2, 3, 1, 1));  // id changes at frame 2
    const MotMetrics m = clear_mot(pred, gt, 0.3);
    CHECK(m.fn == 0);
    CHECK(m.fp == 0);
    CHECK(m.idsw == 1);
    CHECK(m.mota == Approx(0.75));
  }
  SECTION("id switch counted across a gap via most-recent match") {
    std::vector<TrackOutput> gt = track_line(1, 0, 4, 1, 1);
    std::vector<TrackOutput> pred;
    append(pred, track_line(5, 0, 1, 1, 1));
    // frame 2: nothing; frames 3-4: new id
    append(pred, track_line(6, 3, 4, 1, 1));
    const MotMetrics m = clear_mot(pred, gt, 0.3);
    CHECK(m.fn == 1);
    CHECK(m.idsw == 1);
  }
  SECTION("invariant under relabeling of prediction ids") {
    const support::WalkScenario s = support::make_walk_scenario(5, 3, 25, 0.03, 0.1, 0.1);
    const std::vector<TrackOutput> pred =
        run_clip(default_config(TrackerVariant::kAb3dmotStyle), s.detections);
    std::vector<TrackOutput> renamed = pred;
    for (TrackOutput& out : renamed) out.track_id = 1000 - out.track_id * 7;
    const MotMetrics a = clear_mot(pred, s.gt, 0.1);
    const MotMetrics b = clear_mot(renamed, s.gt, 0.1);
    CHECK(a.mota == Approx(b.mota));
    CHECK(a.idsw == b.idsw);
    CHECK(a.motp == Approx(b.motp));
    CHECK(idf1(pred, s.gt, 0.1) == Approx(idf1(renamed, s.gt, 0.1)));
    // MOTP stays within [threshold, 1] when matches exist.
    if (a.fp + a.fn < a.gt_count) {
      CHECK(a.motp >= 0.1);
      CHECK(a.motp <= 1.0);
    }
    // MOTA identity.
    CHECK(a.mota ==
          Approx(1.0 - double(a.fn + a.fp + a.idsw) / double(a.gt_count)));
  }
}

TEST_CASE("idf1") {
  SECTION("perfect tracking") {
    const std::vector<TrackOutput> gt = track_line(1, 0, 5, 1, 1);
    CHECK(idf1(gt, gt, 0.3) == 1.0);
  }
  SECTION("track split in half gives 0.5") {
    const std::vector<TrackOutput> gt = track_line(1, 0, 3, 1, 1);
    std::vector<TrackOutput> pred;
    append(pred, track_line(7, 0, 1, 1, 1));
    append(pred, track_line(8, 2, 3, 1, 1));
    CHECK(idf1(pred, gt, 0.3) == Approx(0.5));
  }
  SECTION("no predictions") {
    const std::vector<TrackOutput> gt = track_line(1, 0, 3, 1, 1);
    CHECK(idf1({}, gt, 0.3) == 0.0);
  }
}

TEST_CASE("removing a prediction from a perfect set never helps") {
  const support::WalkScenario s = support::make_walk_scenario(13, 3, 20, 0.0, 0.0, 0.0);
  std::vector<FrameDetections> gt_frames, pred_frames;
  for (const FrameDetections& frame : s.labels.frames) {
    gt_frames.push_back(frame);
    pred_frames.push_back(frame);
  }
  EvalConfig cfg;
  const std::vector<DetectionMetricsRow> full =
      detection_metrics_sliced(pred_frames, gt_frames, cfg);
  pred_frames[4].detections.erase(pred_frames[4].detections.begin());
  const std::vector<DetectionMetricsRow> reduced =
      detection_metrics_sliced(pred_frames, gt_frames, cfg);
  for (std::size_t k = 0; k < full.size(); ++k) {
    CHECK(reduced[k].recall <= full[k].recall + 1e-12);
    CHECK(reduced[k].ap <= full[k].ap + 1e-12);
  }
  const MotMetrics full_mot = clear_mot(s.gt, s.gt, 0.3);
  std::vector<TrackOutput> reduced_pred = s.gt;
  reduced_pred.erase(reduced_pred.begin() + 10);
  const MotMetrics reduced_mot = clear_mot(reduced_pred, s.gt, 0.3);
  CHECK(reduced_mot.mota <= full_mot.mota);
}

TEST_CASE("bench_tracker pools step timings across repeats") {
  const support::WalkScenario s = support::make_walk_scenario(61, 2, 12, 0.02, 0.0, 0.0);
  const TrackerConfig cfg = default_config(TrackerVariant::kSimpleTrackStyle);
  const LatencyReport once = bench_tracker(cfg, s.detections, 1);
  CHECK(once.sample_count == 12);
  CHECK(once.p50_ms <= once.p90_ms);
  const LatencyReport twice = bench_tracker(cfg, s.detections, 2);
  CHECK(twice.sample_count == 24);
  CHECK_THROWS_AS(bench_tracker(cfg, s.detections, 0), std::invalid_argument);
}

TEST_CASE("latency_percentiles uses nearest-rank indexing") {
  CHECK(latency_percentiles({5.0}).p50_ms == 5.0);
  CHECK(latency_percentiles({5.0}).p90_ms == 5.0);
  const LatencyReport ten =
      latency_percentiles({10, 9, 8, 7, 6, 5, 4, 3, 2, 1});
  CHECK(ten.p50_ms == 5.0);
  CHECK(ten.p90_ms == 9.0);
  CHECK(ten.sample_count == 10);
  const LatencyReport flat = latency_percentiles(std::vector<double>(7, 2.5));
  CHECK(flat.p50_ms == 2.5);
  CHECK(flat.p90_ms == 2.5);
  CHECK_THROWS_AS(latency_percentiles({}), std::invalid_argument);
}
