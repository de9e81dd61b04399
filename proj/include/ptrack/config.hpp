#pragma once

#include <map>
#include <optional>
#include <string>

#include "ptrack/optimizer.hpp"

namespace ptrack {

// Flat key-value configuration with [section] headers and '#' comments.
struct ConfigDoc {
  std::map<std::string, std::string> entries;  // "section.key" -> value

  static ConfigDoc load(const std::string& path);
  static ConfigDoc parse(const std::string& text);

  bool has(const std::string& key) const { return entries.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

enum class RunMode { Volume2D, Surface3D };

struct RunConfig {
  std::string mesh_path;
  RunMode mode = RunMode::Volume2D;
  std::string output_dir = "out";
  bool uniform_gm = false;  // constant initial density instead of the mesh estimate
  int shape_tag = 1;        // facet tag of the embedded surface (Surface3D)
  TargetSpec target;
  MetricConfig metric;
  OptimizerConfig optimizer;
  bool log_wall_time = false;  // keep log.csv byte-reproducible by default
  // optional distortion applied to interior vertices before optimizing
  Expression distort_x, distort_y, distort_z;

  bool has_distortion() const {
    return !distort_x.empty() || !distort_y.empty() || !distort_z.empty();
  }

  static RunConfig from_doc(const ConfigDoc& doc, const std::string& base_dir);
  static RunConfig load(const std::string& path);
};

// Builds the problem for a run configuration: loads the mesh, applies the
// interior distortion, extracts the marked surface in Surface3D mode.
Problem build_problem(const RunConfig& cfg);

}  // namespace ptrack
