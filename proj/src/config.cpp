#include "ptrack/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ptrack/mesh_io.hpp"

namespace ptrack {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigDoc ConfigDoc::parse(const std::string& text) {
  ConfigDoc doc;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    doc.entries[section.empty() ? key : section + "." + key] = value;
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ConfigDoc::get(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) throw std::runtime_error("config: missing key '" + key + "'");
  return it->second;
}

std::string ConfigDoc::get(const std::string& key, const std::string& fallback) const {
  auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second;
}

double ConfigDoc::get_double(const std::string& key, double fallback) const {
  auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not a number");
  }
}

int ConfigDoc::get_int(const std::string& key, int fallback) const {
  auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  }
}

bool ConfigDoc::get_bool(const std::string& key, bool fallback) const {
  auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean");
}

RunConfig RunConfig::from_doc(const ConfigDoc& doc, const std::string& base_dir) {
  RunConfig cfg;
  std::string mesh = doc.get("run.mesh");
  cfg.mesh_path = (!mesh.empty() && mesh.front() == '/') || base_dir.empty()
                      ? mesh
                      : base_dir + "/" + mesh;

  std::string mode = doc.get("run.mode", "volume2d");
  if (mode == "volume2d")
    cfg.mode = RunMode::Volume2D;
  else if (mode == "surface3d")
    cfg.mode = RunMode::Surface3D;
  else
    throw std::runtime_error("config: run.mode must be volume2d or surface3d");

  cfg.output_dir = doc.get("run.output_dir", "out");
  cfg.shape_tag = doc.get_int("run.shape_tag", 1);
  cfg.log_wall_time = doc.get_bool("run.log_wall_time", false);

  std::string gm = doc.get("gm.source", "estimate");
  if (gm == "estimate")
    cfg.uniform_gm = false;
  else if (gm == "uniform")
    cfg.uniform_gm = true;
  else
    throw std::runtime_error("config: gm.source must be estimate or uniform");

  std::string kind = doc.get("target.kind", "uniform");
  if (kind == "uniform") {
    cfg.target = TargetSpec::uniform();
  } else if (kind == "analytic") {
    cfg.target = TargetSpec::analytic(doc.get("target.q"));
  } else {
    throw std::runtime_error("config: target.kind must be uniform or analytic");
  }

  cfg.metric.alpha_le = doc.get_double("metric.alpha_le", 1.0);
  cfg.metric.alpha_l2 = doc.get_double("metric.alpha_l2", 0.0);
  cfg.metric.mu_max = doc.get_double("metric.mu_max", 1.0);
  cfg.metric.mu_min = doc.get_double("metric.mu_min", 1.0);
  cfg.metric.validate();

  OptimizerConfig& opt = cfg.optimizer;
  opt.initial_scale = doc.get_double("optimizer.initial_scale", opt.initial_scale);
  opt.backtrack_factor = doc.get_double("optimizer.backtrack_factor", opt.backtrack_factor);
  opt.max_backtracks = doc.get_int("optimizer.max_backtracks", opt.max_backtracks);
  opt.max_iters = doc.get_int("optimizer.max_iters", opt.max_iters);
  opt.grad_tol = doc.get_double("optimizer.grad_tol", opt.grad_tol);
  opt.grad_tol_rel = doc.get_double("optimizer.grad_tol_rel", opt.grad_tol_rel);
  opt.residual_tol = doc.get_double("optimizer.residual_tol", opt.residual_tol);
  opt.residual_tol_frac = doc.get_double("optimizer.residual_tol_frac", opt.residual_tol_frac);
  opt.armijo = doc.get_double("optimizer.armijo", opt.armijo);
  opt.snapshot_every = doc.get_int("optimizer.snapshot_every", opt.snapshot_every);
  std::string comp = doc.get("optimizer.component", "tangential");
  if (comp == "tangential")
    opt.component = Component::Tangential;
  else if (comp == "full")
    opt.component = Component::Full;
  else if (comp == "normal")
    opt.component = Component::Normal;
  else
    throw std::runtime_error("config: optimizer.component must be tangential, full, or normal");
  opt.validate();

  if (doc.has("run.distort_x")) cfg.distort_x = Expression::parse(doc.get("run.distort_x"));
  if (doc.has("run.distort_y")) cfg.distort_y = Expression::parse(doc.get("run.distort_y"));
  if (doc.has("run.distort_z")) cfg.distort_z = Expression::parse(doc.get("run.distort_z"));
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::string base_dir;
  size_t slash = path.find_last_of('/');
  if (slash != std::string::npos) base_dir = path.substr(0, slash);
  return from_doc(ConfigDoc::load(path), base_dir);
}

Problem build_problem(const RunConfig& cfg) {
  auto mesh = std::make_shared<SimplicialMesh>(load_gmsh(cfg.mesh_path));

  if (cfg.has_distortion()) {
    // distortion displaces interior vertices only; the boundary stays put.
    // Orientation must survive as-is, so inverted cells are an error rather
    // than something to repair.
    auto distorted = std::make_shared<SimplicialMesh>(*mesh);
    for (int i = 0; i < distorted->n_vertices(); ++i) {
      if (distorted->vertex_on_boundary[i]) continue;
      const Vec3 p = distorted->vertices[i];
      Vec3 shift(cfg.distort_x.eval(p), cfg.distort_y.eval(p), cfg.distort_z.eval(p));
      if (distorted->dim_ambient == 2) shift.z() = 0.0;
      distorted->vertices[i] = p + shift;
    }
    const int m = distorted->verts_per_cell();
    for (int ci = 0; ci < distorted->n_cells(); ++ci) {
      Vec3 p[4];
      for (int k = 0; k < m; ++k) p[k] = distorted->vertices[distorted->cells[ci][k]];
      double vol = simplex_volume(distorted->dim_cell, distorted->dim_ambient, p);
      if (!distorted->is_surface() && vol <= 0.0)
        throw std::runtime_error("config: distortion inverts cell " + std::to_string(ci));
      if (std::abs(vol) <= 0.0)
        throw std::runtime_error("config: distortion degenerates cell " + std::to_string(ci));
    }
    mesh = distorted;
  }

  if (cfg.mode == RunMode::Volume2D) {
    if (mesh->is_surface() || mesh->dim_cell != 2)
      throw std::runtime_error("config: volume2d mode needs a planar triangle mesh");
    return make_volume_problem(mesh, cfg.uniform_gm ? uniform_gm(*mesh) : estimate_gm(*mesh));
  }
  if (mesh->dim_cell != 3)
    throw std::runtime_error("config: surface3d mode needs a tetrahedral hold-all mesh");
  return make_surface_problem(mesh, cfg.shape_tag, cfg.uniform_gm);
}

}  // namespace ptrack
