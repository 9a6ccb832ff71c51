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

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bevmot/core.hpp"
#include "bevmot/eval.hpp"
#include "bevmot/tracker.hpp"

namespace bevmot {

// Frame files carry one box per line:
//   class cx cy cz dx dy dz yaw [score]
// Labels omit the score, detections include it. A clip is a directory of
// zero-padded frame files (000000.txt, 000001.txt, ...) plus an optional
// clip.meta with `rate_hz` / `clip_id`. Track files add the frame index
// and track id up front:
//   frame_index track_id class cx cy cz dx dy dz yaw score

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (end > pos) fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

inline double parse_double(std::string_view token, int line_number,
                           const char* what) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() ||
      !std::isfinite(value)) {
    throw std::runtime_error("line " + std::to_string(line_number) +
                             ": invalid " + what + " '" + std::string(token) + "'");
  }
  return value;
}

inline long parse_long(std::string_view token, int line_number,
                       const char* what) {
  long value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw std::runtime_error("line " + std::to_string(line_number) +
                             ": invalid " + what + " '" + std::string(token) + "'");
  }
  return value;
}

inline OrientedBox3D parse_box(const std::vector<std::string_view>& fields,
                               std::size_t offset, int line_number) {
  const double cx = parse_double(fields[offset + 0], line_number, "cx");
  const double cy = parse_double(fields[offset + 1], line_number, "cy");
  const double cz = parse_double(fields[offset + 2], line_number, "cz");
  const double dx = parse_double(fields[offset + 3], line_number, "dx");
  const double dy = parse_double(fields[offset + 4], line_number, "dy");
  const double dz = parse_double(fields[offset + 5], line_number, "dz");
  const double yaw = parse_double(fields[offset + 6], line_number, "yaw");
  if (dx <= 0.0 || dy <= 0.0 || dz <= 0.0) {
    throw std::runtime_error("line " + std::to_string(line_number) +
                             ": extents must be positive");
  }
  return OrientedBox3D(cx, cy, cz, dx, dy, dz, yaw);
}

inline void require_person(std::string_view token, int line_number) {
  if (token != "person") {
    throw std::runtime_error("line " + std::to_string(line_number) +
                             ": unknown class '" + std::string(token) + "'");
  }
}

inline double clamp_score(double score, int line_number) {
  if (score < 0.0 || score > 1.0) {
    std::cerr << "warning: line " << line_number << ": score " << score
              << " outside [0,1], clamped\n";
    return std::clamp(score, 0.0, 1.0);
  }
  return score;
}

inline std::string format_box(const OrientedBox3D& box) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "%.6f %.6f %.6f %.6f %.6f %.6f %.6f",
                box.cx, box.cy, box.cz, box.dx, box.dy, box.dz, box.yaw);
  return buffer;
}

}  // namespace detail

/// Parses one frame file. Lines starting with '#' and blank lines are
/// skipped. With expect_scores, every line must carry a score; without it
/// the score is optional and defaults to 1.0 (label files).
inline FrameDetections parse_frame(std::string_view content, bool expect_scores,
                                   int frame_index = 0, double timestamp = 0.0) {
  FrameDetections frame;
  frame.frame_index = frame_index;
  frame.timestamp = timestamp;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const std::size_t eol = content.find('\n', pos);
    std::string_view line = content.substr(
        pos, eol == std::string_view::npos ? content.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::vector<std::string_view> fields = detail::split_fields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (expect_scores ? fields.size() != 9
                      : (fields.size() != 8 && fields.size() != 9)) {
      throw std::runtime_error("line " + std::to_string(line_number) +
                               ": expected " + (expect_scores ? "9" : "8 or 9") +
                               " fields, got " + std::to_string(fields.size()));
    }
    detail::require_person(fields[0], line_number);
    const OrientedBox3D box = detail::parse_box(fields, 1, line_number);
    double score = 1.0;
    if (fields.size() == 9) {
      score = detail::clamp_score(
          detail::parse_double(fields[8], line_number, "score"), line_number);
    }
    frame.detections.emplace_back(box, ClassId::kPerson, score);
  }
  return frame;
}

/// Loads a clip directory: contiguous zero-padded frame files from 000000
/// plus an optional clip.meta.
inline SequenceClip load_clip(const std::filesystem::path& dir,
                              bool expect_scores) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("clip directory not found: " + dir.string());
  }
  SequenceClip clip;
  clip.clip_id = dir.filename().string();

  std::vector<int> indices;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() != 10 || name.substr(6) != ".txt") continue;
    if (name.find_first_not_of("0123456789") != 6) continue;
    indices.push_back(std::stoi(name.substr(0, 6)));
  }
  if (indices.empty()) {
    throw std::runtime_error("no frame files in " + dir.string());
  }
  std::sort(indices.begin(), indices.end());

  const fs::path meta_path = dir / "clip.meta";
  if (fs::exists(meta_path)) {
    std::ifstream meta(meta_path);
    std::string line;
    int line_number = 0;
    while (std::getline(meta, line)) {
      ++line_number;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "rate_hz") {
        clip.rate_hz = detail::parse_double(value, line_number, "rate_hz");
      } else if (key == "clip_id") {
        clip.clip_id = value;
      } else if (!key.empty()) {
        throw std::runtime_error("clip.meta: unknown key '" + key + "'");
      }
    }
  }

  int expected = 0;
  for (int index : indices) {
    if (index != expected) {
      char missing[16];
      std::snprintf(missing, sizeof(missing), "%06d.txt", expected);
      throw std::runtime_error("missing frame file " + std::string(missing) +
                               " in " + dir.string());
    }
    char name[16];
    std::snprintf(name, sizeof(name), "%06d.txt", index);
    std::ifstream file(dir / name);
    std::stringstream buffer;
    buffer << file.rdbuf();
    try {
      clip.frames.push_back(parse_frame(buffer.str(), expect_scores, index,
                                        static_cast<double>(index) / clip.rate_hz));
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(name) + ": " + e.what());
    }
    ++expected;
  }
  return clip;
}

/// Serializes track outputs, one line per box, ordered by frame then id.
/// Values round-trip at 6 decimal places.
inline std::string write_tracks(std::vector<TrackOutput> outputs) {
  std::stable_sort(outputs.begin(), outputs.end(),
                   [](const TrackOutput& a, const TrackOutput& b) {
                     return a.frame_index != b.frame_index
                                ? a.frame_index < b.frame_index
                                : a.track_id < b.track_id;
                   });
  std::string text;
  for (const TrackOutput& out : outputs) {
    char buffer[224];
    std::snprintf(buffer, sizeof(buffer), "%d %d person %s %.6f\n",
                  out.frame_index, out.track_id,
                  detail::format_box(out.box).c_str(), out.score);
    text += buffer;
  }
  return text;
}

/// Parses a track file written by write_tracks (or anything matching its
/// 11-field layout).
inline std::vector<TrackOutput> parse_tracks(std::string_view content) {
  std::vector<TrackOutput> outputs;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const std::size_t eol = content.find('\n', pos);
    std::string_view line = content.substr(
        pos, eol == std::string_view::npos ? content.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::vector<std::string_view> fields = detail::split_fields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() != 11) {
      throw std::runtime_error("line " + std::to_string(line_number) +
                               ": expected 11 fields, got " +
                               std::to_string(fields.size()));
    }
    TrackOutput out;
    out.frame_index =
        static_cast<int>(detail::parse_long(fields[0], line_number, "frame index"));
    out.track_id =
        static_cast<int>(detail::parse_long(fields[1], line_number, "track id"));
    detail::require_person(fields[2], line_number);
    out.box = detail::parse_box(fields, 3, line_number);
    out.score = detail::clamp_score(
        detail::parse_double(fields[10], line_number, "score"), line_number);
    outputs.push_back(out);
  }
  return outputs;
}

// ---------------------------------------------------------------------------
// Configuration files: flat `key = value` lines with '#' comments.

struct FileConfig {
  TrackerConfig tracker;
  EvalConfig eval;
};

namespace detail {

inline std::string format_g17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

inline std::string join_list(const std::vector<double>& values) {
  std::string text;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) text += ",";
    text += format_g17(values[k]);
  }
  return text;
}

inline std::vector<double> parse_list(std::string_view text, int line_number,
                                      const char* what) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view token = text.substr(pos, comma - pos);
    if (!token.empty()) values.push_back(parse_double(token, line_number, what));
    pos = comma + 1;
  }
  if (values.empty()) {
    throw std::runtime_error("line " + std::to_string(line_number) +
                             ": empty list for " + what);
  }
  return values;
}

}  // namespace detail

inline std::string serialize_config(const FileConfig& cfg) {
  const TrackerConfig& t = cfg.tracker;
  std::string text;
  text += "# tracker\n";
  text += "variant = " + variant_name(t.variant) + "\n";
  auto put = [&text](const char* key, double value) {
    text += std::string(key) + " = " + detail::format_g17(value) + "\n";
  };
  put("score_threshold", t.score_threshold);
  put("nms_iou_threshold", t.nms_iou_threshold);
  put("roi_radius", t.roi_radius);
  text += "min_hits = " + std::to_string(t.min_hits) + "\n";
  text += "max_age = " + std::to_string(t.max_age) + "\n";
  put("ema_alpha", t.ema_alpha);
  put("mahalanobis_gate", t.mahalanobis_gate);
  put("association_iou_min", t.association_iou_min);
  text += std::string("emit_coasted = ") + (t.emit_coasted ? "true" : "false") + "\n";
  put("q_position", t.q_position);
  put("q_velocity", t.q_velocity);
  put("q_size", t.q_size);
  put("q_yaw", t.q_yaw);
  put("r_position", t.r_position);
  put("r_size", t.r_size);
  put("r_yaw", t.r_yaw);
  put("p0_measured", t.p0_measured);
  put("p0_velocity", t.p0_velocity);
  text += "# evaluation\n";
  put("tp_iou_min", cfg.eval.tp_iou_min);
  text += "radii = " + detail::join_list(cfg.eval.radii) + "\n";
  text += "mot_iou_thresholds = " + detail::join_list(cfg.eval.mot_iou_thresholds) + "\n";
  return text;
}

inline FileConfig parse_config(std::string_view content) {
  FileConfig cfg;
  TrackerConfig& t = cfg.tracker;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const std::size_t eol = content.find('\n', pos);
    std::string_view line = content.substr(
        pos, eol == std::string_view::npos ? content.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      if (!detail::split_fields(line).empty()) {
        throw std::runtime_error("line " + std::to_string(line_number) +
                                 ": expected key = value");
      }
      continue;
    }
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
      return s;
    };
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    auto as_double = [&] { return detail::parse_double(value, line_number, "value"); };
    auto as_int = [&] {
      return static_cast<int>(detail::parse_long(value, line_number, "value"));
    };
    if (key == "variant") t.variant = parse_variant(value);
    else if (key == "score_threshold") t.score_threshold = as_double();
    else if (key == "nms_iou_threshold") t.nms_iou_threshold = as_double();
    else if (key == "roi_radius") t.roi_radius = as_double();
    else if (key == "min_hits") t.min_hits = as_int();
    else if (key == "max_age") t.max_age = as_int();
    else if (key == "ema_alpha") t.ema_alpha = as_double();
    else if (key == "mahalanobis_gate") t.mahalanobis_gate = as_double();
    else if (key == "association_iou_min") t.association_iou_min = as_double();
    else if (key == "emit_coasted") {
      if (value == "true") t.emit_coasted = true;
      else if (value == "false") t.emit_coasted = false;
      else throw std::runtime_error("line " + std::to_string(line_number) +
                                    ": emit_coasted must be true or false");
    }
    else if (key == "q_position") t.q_position = as_double();
    else if (key == "q_velocity") t.q_velocity = as_double();
    else if (key == "q_size") t.q_size = as_double();
    else if (key == "q_yaw") t.q_yaw = as_double();
    else if (key == "r_position") t.r_position = as_double();
    else if (key == "r_size") t.r_size = as_double();
    else if (key == "r_yaw") t.r_yaw = as_double();
    else if (key == "p0_measured") t.p0_measured = as_double();
    else if (key == "p0_velocity") t.p0_velocity = as_double();
    else if (key == "tp_iou_min") cfg.eval.tp_iou_min = as_double();
    else if (key == "radii")
      cfg.eval.radii = detail::parse_list(value, line_number, "radii");
    else if (key == "mot_iou_thresholds")
      cfg.eval.mot_iou_thresholds =
          detail::parse_list(value, line_number, "mot_iou_thresholds");
    else
      throw std::runtime_error("line " + std::to_string(line_number) +
                               ": unknown key '" + std::string(key) + "'");
  }
  return cfg;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << text;
}

}  // namespace bevmot
