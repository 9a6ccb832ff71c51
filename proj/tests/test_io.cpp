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
#include <filesystem>
#include <random>

#include "bevmot/io.hpp"
#include "test_support.hpp"

using namespace bevmot;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bevmot_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("parse_frame") {
  SECTION("canonical detection line") {
    const FrameDetections frame =
        parse_frame("person 1.0 2.0 0.9 0.8 0.6 1.73 0.0 0.95\n", true);
    REQUIRE(frame.detections.size() == 1);
    const Detection& det = frame.detections[0];
    CHECK(det.box.cx == 1.0);
    CHECK(det.box.cy == 2.0);
    CHECK(det.box.cz == 0.9);
    CHECK(det.score == 0.95);
  }
  SECTION("empty file gives an empty frame") {
    CHECK(parse_frame("", true).detections.empty());
    CHECK(parse_frame("\n\n# comment only\n", false).detections.empty());
  }
  SECTION("wrong field count names the line") {
    CHECK_THROWS_WITH(parse_frame("person 1 2 3 4 5 6\n", false),
                      Catch::Contains("line 1"));
    CHECK_THROWS_WITH(
        parse_frame("person 1 2 3 0.8 0.6 1.7 0.0 0.9\n"
                    "person 1 2 3 0.8 0.6 1.7\n",
                    true),
        Catch::Contains("line 2"));
  }
  SECTION("labels default to score 1.0") {
    const FrameDetections frame =
        parse_frame("person -1.0 0.5 0.87 0.8 0.6 1.73 1.2\n", false);
    REQUIRE(frame.detections.size() == 1);
    CHECK(frame.detections[0].score == 1.0);
  }
  SECTION("non-numeric and non-positive fields are rejected with line numbers") {
    CHECK_THROWS_WITH(parse_frame("person a 2 3 0.8 0.6 1.7 0 0.9\n", true),
                      Catch::Contains("line 1"));
    CHECK_THROWS_WITH(parse_frame("person 1 2 3 -0.8 0.6 1.7 0 0.9\n", true),
                      Catch::Contains("extents"));
    CHECK_THROWS_WITH(parse_frame("car 1 2 3 0.8 0.6 1.7 0 0.9\n", true),
                      Catch::Contains("unknown class"));
  }
  SECTION("out-of-range scores are clamped, not rejected") {
    const FrameDetections frame =
        parse_frame("person 1 2 3 0.8 0.6 1.7 0 1.7\n", true);
    CHECK(frame.detections[0].score == 1.0);
  }
  SECTION("yaw is normalized on load") {
    const FrameDetections frame =
        parse_frame("person 0 0 0 0.8 0.6 1.7 4.8 0.5\n", true);
    CHECK(frame.detections[0].box.yaw == Approx(4.8 - 2 * kPi));
  }
}

TEST_CASE("load_clip") {
  TempDir dir;
  SECTION("three contiguous frames with meta") {
    write_file(dir.path / "000000.txt", "person 1 0 0.9 0.8 0.6 1.73 0 0.9\n");
    write_file(dir.path / "000001.txt", "");
    write_file(dir.path / "000002.txt", "person 1 0.2 0.9 0.8 0.6 1.73 0 0.8\n");
    write_file(dir.path / "clip.meta", "rate_hz = 3.0\nclip_id = lab_a\n");
    const SequenceClip clip = load_clip(dir.path, true);
    REQUIRE(clip.frames.size() == 3);
    CHECK(clip.clip_id == "lab_a");
    CHECK(clip.rate_hz == 3.0);
    CHECK(clip.frames[0].timestamp == 0.0);
    CHECK(clip.frames[1].timestamp == Approx(1.0 / 3.0));
    CHECK(clip.frames[2].timestamp == Approx(2.0 / 3.0));
    CHECK(clip.frames[1].detections.empty());
  }
  SECTION("a gap in indices reports the missing file") {
    write_file(dir.path / "000000.txt", "");
    write_file(dir.path / "000002.txt", "");
    CHECK_THROWS_WITH(load_clip(dir.path, true), Catch::Contains("000001"));
  }
  SECTION("empty directory is an error") {
    CHECK_THROWS_WITH(load_clip(dir.path, true), Catch::Contains("no frame files"));
  }
  SECTION("missing directory is an error") {
    CHECK_THROWS_AS(load_clip(dir.path / "absent", true), std::runtime_error);
  }
  SECTION("parse errors carry the file name") {
    write_file(dir.path / "000000.txt", "person 1 2\n");
    CHECK_THROWS_WITH(load_clip(dir.path, true), Catch::Contains("000000.txt"));
  }
}

TEST_CASE("write_tracks round-trips at 6 decimals") {
  CHECK(write_tracks({}).empty());

  std::mt19937 rng(55);
  std::uniform_real_distribution<double> coord(-4.0, 4.0);
  std::uniform_real_distribution<double> extent(0.3, 2.0);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TrackOutput> outputs;
  for (int k = 0; k < 40; ++k) {
    outputs.push_back({k / 3, k % 7 + 1,
                       OrientedBox3D(coord(rng), coord(rng), coord(rng),
                                     extent(rng), extent(rng), extent(rng),
                                     angle(rng)),
                       unit(rng)});
  }
  const std::string text = write_tracks(outputs);
  const std::vector<TrackOutput> parsed = parse_tracks(text);
  REQUIRE(parsed.size() == outputs.size());
  // Serialization is stable: a second round-trip is byte-identical.
  CHECK(write_tracks(parsed) == text);
  for (const TrackOutput& out : parsed) {
    CHECK(out.box.dx > 0);
  }
  // Lines are ordered by frame, then id.
  const std::vector<TrackOutput> reparsed = parse_tracks(text);
  for (std::size_t k = 1; k < reparsed.size(); ++k) {
    const bool ordered =
        reparsed[k - 1].frame_index < reparsed[k].frame_index ||
        (reparsed[k - 1].frame_index == reparsed[k].frame_index &&
         reparsed[k - 1].track_id <= reparsed[k].track_id);
    CHECK(ordered);
  }
}

TEST_CASE("parse_tracks rejects malformed lines") {
  CHECK_THROWS_WITH(parse_tracks("0 1 person 1 2 3 0.8 0.6 1.7\n"),
                    Catch::Contains("11 fields"));
  CHECK_THROWS_WITH(parse_tracks("0 x person 1 2 3 0.8 0.6 1.7 0 0.9\n"),
                    Catch::Contains("track id"));
}

TEST_CASE("config round-trips identically") {
  FileConfig cfg;
  cfg.tracker = default_config(TrackerVariant::kSimpleTrackStyle);
  const FileConfig defaults_back = parse_config(serialize_config(cfg));
  CHECK(defaults_back.tracker.association_iou_min == 0.10);

  std::mt19937 rng(29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    FileConfig original;
    TrackerConfig& t = original.tracker;
    t.variant = unit(rng) < 0.5 ? TrackerVariant::kAb3dmotStyle
                                : TrackerVariant::kSimpleTrackStyle;
    t.score_threshold = unit(rng);
    t.nms_iou_threshold = unit(rng);
    t.roi_radius = 10.0 * unit(rng);
    t.min_hits = 1 + static_cast<int>(4 * unit(rng));
    t.max_age = static_cast<int>(9 * unit(rng));
    t.ema_alpha = 0.01 + 0.99 * unit(rng);
    t.mahalanobis_gate = 20.0 * unit(rng);
    t.association_iou_min = unit(rng);
    t.emit_coasted = unit(rng) < 0.5;
    t.q_position = unit(rng) * 0.1;
    t.q_velocity = unit(rng) * 0.1;
    t.q_size = unit(rng) * 0.01;
    t.q_yaw = unit(rng) * 0.01;
    t.r_position = unit(rng) * 0.1;
    t.r_size = unit(rng) * 0.1;
    t.r_yaw = unit(rng) * 0.1;
    t.p0_measured = unit(rng) * 5.0;
    t.p0_velocity = unit(rng) * 20.0;
    original.eval.tp_iou_min = unit(rng);
    original.eval.radii = {unit(rng), 1 + unit(rng), 2 + unit(rng)};
    original.eval.mot_iou_thresholds = {unit(rng), unit(rng)};

    const FileConfig restored = parse_config(serialize_config(original));
    CHECK(restored.tracker.variant == t.variant);
    CHECK(restored.tracker.score_threshold == t.score_threshold);
    CHECK(restored.tracker.nms_iou_threshold == t.nms_iou_threshold);
    CHECK(restored.tracker.roi_radius == t.roi_radius);
    CHECK(restored.tracker.min_hits == t.min_hits);
    CHECK(restored.tracker.max_age == t.max_age);
    CHECK(restored.tracker.ema_alpha == t.ema_alpha);
    CHECK(restored.tracker.mahalanobis_gate == t.mahalanobis_gate);
    CHECK(restored.tracker.association_iou_min == t.association_iou_min);
    CHECK(restored.tracker.emit_coasted == t.emit_coasted);
    CHECK(restored.tracker.q_position == t.q_position);
    CHECK(restored.tracker.q_velocity == t.q_velocity);
    CHECK(restored.tracker.q_size == t.q_size);
    CHECK(restored.tracker.q_yaw == t.q_yaw);
    CHECK(restored.tracker.r_position == t.r_position);
    CHECK(restored.tracker.r_size == t.r_size);
    CHECK(restored.tracker.r_yaw == t.r_yaw);
    CHECK(restored.tracker.p0_measured == t.p0_measured);
    CHECK(restored.tracker.p0_velocity == t.p0_velocity);
    CHECK(restored.eval.tp_iou_min == original.eval.tp_iou_min);
    CHECK(restored.eval.radii == original.eval.radii);
    CHECK(restored.eval.mot_iou_thresholds == original.eval.mot_iou_thresholds);
  }
}

TEST_CASE("config parser diagnoses bad input") {
  CHECK_THROWS_WITH(parse_config("nonsense\n"), Catch::Contains("key = value"));
  CHECK_THROWS_WITH(parse_config("unknown_key = 3\n"), Catch::Contains("unknown key"));
  CHECK_THROWS_WITH(parse_config("variant = tensor\n"), Catch::Contains("variant"));
  CHECK_THROWS_WITH(parse_config("emit_coasted = maybe\n"),
                    Catch::Contains("true or false"));
  // Comments and blank lines are fine.
  const FileConfig cfg = parse_config("# a comment\n\nmin_hits = 4 # trailing\n");
  CHECK(cfg.tracker.min_hits == 4);
}

TEST_CASE("track files flow back into the evaluator") {
  const support::WalkScenario s = support::make_walk_scenario(3, 2, 15, 0.0, 0.0, 0.0);
  const std::vector<TrackOutput> pgt =
      generate_pseudo_gt(s.labels, TrackerVariant::kAb3dmotStyle);
  const std::vector<TrackOutput> parsed = parse_tracks(write_tracks(pgt));
  const MotMetrics m = clear_mot(parsed, pgt, 0.3);
  CHECK(m.fn == 0);
  CHECK(m.fp == 0);
  CHECK(m.idsw == 0);
  CHECK(m.mota == 1.0);
}
