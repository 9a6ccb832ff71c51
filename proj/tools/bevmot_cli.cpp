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

// Command-line front end: track, pseudo-gt, eval-det, eval-mot, bench.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "bevmot/bench.hpp"
#include "bevmot/core.hpp"
#include "bevmot/eval.hpp"
#include "bevmot/io.hpp"
#include "bevmot/tracker.hpp"

namespace {

using namespace bevmot;

std::vector<double> parse_cli_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string token = text.substr(pos, comma - pos);
    if (!token.empty()) {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) {
        throw std::runtime_error(std::string("invalid ") + what + " value '" +
                                 token + "'");
      }
    }
    pos = comma + 1;
  }
  if (values.empty()) {
    throw std::runtime_error(std::string("empty ") + what + " list");
  }
  return values;
}

int run_track(const std::string& variant_name, const std::string& detections_dir,
              const std::string& out_file, const std::string& config_file) {
  TrackerConfig cfg;
  if (!config_file.empty()) cfg = parse_config(read_file(config_file)).tracker;
  const TrackerVariant variant = parse_variant(variant_name);
  const TrackerConfig defaults = default_config(variant);
  if (config_file.empty()) {
    cfg = defaults;
  } else {
    cfg.variant = variant;
  }
  const SequenceClip clip = load_clip(detections_dir, /*expect_scores=*/true);
  const std::vector<TrackOutput> outputs = run_clip(cfg, clip);
  write_file(out_file, write_tracks(outputs));
  std::cout << "clip " << clip.clip_id << ": " << clip.frames.size()
            << " frames, " << outputs.size() << " track boxes -> " << out_file
            << "\n";
  return 0;
}

int run_pseudo_gt(const std::string& variant_name, const std::string& labels_dir,
                  const std::string& out_file) {
  const SequenceClip labels = load_clip(labels_dir, /*expect_scores=*/false);
  const std::vector<TrackOutput> outputs =
      generate_pseudo_gt(labels, parse_variant(variant_name));
  write_file(out_file, write_tracks(outputs));
  std::cout << "clip " << labels.clip_id << ": " << outputs.size()
            << " pseudo-GT boxes -> " << out_file << "\n";
  return 0;
}

int run_eval_det(const std::string& detections_dir, const std::string& labels_dir,
                 const std::string& radii_text, double tp_iou,
                 const std::string& format, const std::string& curves_file) {
  EvalConfig cfg;
  cfg.tp_iou_min = tp_iou;
  if (!radii_text.empty()) cfg.radii = parse_cli_list(radii_text, "radii");
  const SequenceClip detections = load_clip(detections_dir, true);
  const SequenceClip labels = load_clip(labels_dir, false);
  const std::vector<DetectionMetricsRow> rows =
      detection_metrics_sliced(detections.frames, labels.frames, cfg);

  if (format == "records") {
    for (const DetectionMetricsRow& row : rows) {
      std::printf(
          "radius=%.6f precision=%.6f recall=%.6f f1=%.6f ap=%.6f miou=%.6f "
          "tp=%ld fp=%ld fn=%ld\n",
          row.radius, row.precision, row.recall, row.f1, row.ap, row.miou,
          row.tp, row.fp, row.fn);
    }
  } else {
    std::printf("%6s %10s %8s %8s %8s %8s %6s %6s %6s\n", "r(m)", "precision",
                "recall", "f1", "ap", "miou", "tp", "fp", "fn");
    for (const DetectionMetricsRow& row : rows) {
      std::printf("%6.1f %10.3f %8.3f %8.3f %8.3f %8.3f %6ld %6ld %6ld\n",
                  row.radius, row.precision, row.recall, row.f1, row.ap,
                  row.miou, row.tp, row.fp, row.fn);
    }
  }

  if (!curves_file.empty()) {
    const std::vector<std::vector<PrPoint>> curves =
        pr_curves(detections.frames, labels.frames, cfg);
    std::string text;
    for (std::size_t k = 0; k < curves.size(); ++k) {
      for (const PrPoint& point : curves[k]) {
        char line[128];
        std::snprintf(line, sizeof(line),
                      "radius=%.6f score=%.6f precision=%.6f recall=%.6f\n",
                      cfg.radii[k], point.score, point.precision, point.recall);
        text += line;
      }
    }
    write_file(curves_file, text);
  }
  return 0;
}

int run_eval_mot(const std::string& tracks_file, const std::string& gt_file,
                 const std::string& iou_text, const std::string& format) {
  EvalConfig cfg;
  if (!iou_text.empty()) {
    cfg.mot_iou_thresholds = parse_cli_list(iou_text, "iou");
  }
  const std::vector<TrackOutput> pred = parse_tracks(read_file(tracks_file));
  const std::vector<TrackOutput> gt = parse_tracks(read_file(gt_file));
  bool first = true;
  for (double threshold : cfg.mot_iou_thresholds) {
    const MotMetrics m = evaluate_mot(pred, gt, threshold);
    if (format == "records") {
      std::printf(
          "iou=%.6f mota=%.6f idf1=%.6f motp=%.6f fp=%ld fn=%ld idsw=%ld "
          "gt_count=%ld\n",
          m.iou_threshold, m.mota, m.idf1, m.motp, m.fp, m.fn, m.idsw,
          m.gt_count);
    } else {
      if (!first) std::printf("\n");
      std::printf("IoU threshold %.2f\n", m.iou_threshold);
      std::printf("  MOTA %7.3f   IDF1 %7.3f   MOTP %7.3f\n", m.mota, m.idf1,
                  m.motp);
      std::printf("  FP %6ld   FN %6ld   IDSW %5ld   GT %6ld\n", m.fp, m.fn,
                  m.idsw, m.gt_count);
    }
    first = false;
  }
  return 0;
}

int run_bench(const std::string& variant_name, const std::string& detections_dir,
              int repeats, const std::string& format) {
  const SequenceClip clip = load_clip(detections_dir, true);
  std::vector<TrackerVariant> variants;
  if (variant_name == "both") {
    variants = {TrackerVariant::kAb3dmotStyle, TrackerVariant::kSimpleTrackStyle};
  } else {
    variants = {parse_variant(variant_name)};
  }
  if (format != "records") {
    std::printf("%12s %10s %10s %9s\n", "variant", "p50(ms)", "p90(ms)",
                "samples");
  }
  for (TrackerVariant variant : variants) {
    const LatencyReport report =
        bench_tracker(default_config(variant), clip, repeats);
    if (format == "records") {
      std::printf("variant=%s p50_ms=%.6f p90_ms=%.6f samples=%ld\n",
                  bevmot::variant_name(variant).c_str(), report.p50_ms,
                  report.p90_ms, report.sample_count);
    } else {
      std::printf("%12s %10.3f %10.3f %9ld\n",
                  bevmot::variant_name(variant).c_str(), report.p50_ms,
                  report.p90_ms, report.sample_count);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overhead-LiDAR person tracking and evaluation toolkit"};
  app.require_subcommand(1);

  std::string variant = "ab3dmot";
  std::string detections_dir, labels_dir, out_file, config_file;
  std::string tracks_file, gt_file;
  std::string radii_text, iou_text;
  std::string format = "table";
  std::string curves_file;
  double tp_iou = 0.10;
  int repeats = 5;

  CLI::App* track = app.add_subcommand("track", "Track a clip of detections");
  track->add_option("--variant", variant, "ab3dmot or simpletrack")->required();
  track->add_option("--detections", detections_dir, "clip directory")->required();
  track->add_option("--out", out_file, "output track file")->required();
  track->add_option("--config", config_file, "key = value config file");

  CLI::App* pseudo = app.add_subcommand("pseudo-gt", "Assign ids to labeled boxes");
  pseudo->add_option("--labels", labels_dir, "label clip directory")->required();
  pseudo->add_option("--out", out_file, "output track file")->required();
  pseudo->add_option("--variant", variant, "ab3dmot or simpletrack");

  CLI::App* eval_det = app.add_subcommand("eval-det", "Distance-sliced detection metrics");
  eval_det->add_option("--detections", detections_dir, "detection clip directory")
      ->required();
  eval_det->add_option("--labels", labels_dir, "label clip directory")->required();
  eval_det->add_option("--radii", radii_text, "comma-separated radii in meters");
  eval_det->add_option("--iou", tp_iou, "true-positive IoU threshold");
  eval_det->add_option("--format", format, "table or records")
      ->check(CLI::IsMember({"table", "records"}));
  eval_det->add_option("--dump-curves", curves_file, "write PR curve records");

  CLI::App* eval_mot = app.add_subcommand("eval-mot", "MOT metrics for track files");
  eval_mot->add_option("--tracks", tracks_file, "tracker output file")->required();
  eval_mot->add_option("--gt", gt_file, "ground-truth track file")->required();
  eval_mot->add_option("--iou", iou_text, "comma-separated IoU thresholds");
  eval_mot->add_option("--format", format, "table or records")
      ->check(CLI::IsMember({"table", "records"}));

  CLI::App* bench = app.add_subcommand("bench", "Per-frame tracker latency");
  bench->add_option("--variant", variant, "ab3dmot, simpletrack or both")->required();
  bench->add_option("--detections", detections_dir, "clip directory")->required();
  bench->add_option("--repeats", repeats, "timed passes over the clip")
      ->check(CLI::PositiveNumber);
  bench->add_option("--format", format, "table or records")
      ->check(CLI::IsMember({"table", "records"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (track->parsed()) {
      return run_track(variant, detections_dir, out_file, config_file);
    }
    if (pseudo->parsed()) {
      return run_pseudo_gt(variant, labels_dir, out_file);
    }
    if (eval_det->parsed()) {
      return run_eval_det(detections_dir, labels_dir, radii_text, tp_iou, format,
                          curves_file);
    }
    if (eval_mot->parsed()) {
      return run_eval_mot(tracks_file, gt_file, iou_text, format);
    }
    if (bench->parsed()) {
      return run_bench(variant, detections_dir, repeats, format);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
