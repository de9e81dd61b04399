#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "ptrack/mesh_io.hpp"
#include "ptrack/meshgen.hpp"

namespace fs = std::filesystem;
using namespace ptrack;

int main(int argc, char** argv) {
  CLI::App app{"generate the standard mesh set"};
  std::string out_dir = "meshes";
  bool paper_scale = false;
  uint64_t seed = 42;
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_flag("--paper-scale", paper_scale, "also emit the full-resolution 3D meshes");
  app.add_option("--seed", seed, "jitter seed for the unstructured square");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out_dir);
    auto emit = [&](const SimplicialMesh& m, const std::string& name) {
      std::string path = (fs::path(out_dir) / name).string();
      write_gmsh(m, path);
      std::printf("%s: %d vertices, %d cells\n", path.c_str(), m.n_vertices(), m.n_cells());
    };

    // 40 points per side and a 54 x 38 interior grid give 2212 vertices and
    // 4262 triangles
    emit(meshgen::square_delaunay(40, 54, 38, seed), "square_unstructured.msh");
    emit(meshgen::square_structured(16, 16), "square_structured.msh");
    emit(meshgen::sphere_in_box(40, 20, Vec3(0.5, 0.5, 0.5), 0.3), "sphere_box_desk.msh");
    emit(meshgen::sphere_uv(40, 20, Vec3(0.5, 0.5, 0.5), 0.3), "sphere_surface_desk.msh");
    if (paper_scale) {
      emit(meshgen::sphere_in_box(80, 40, Vec3(0.5, 0.5, 0.5), 0.3), "sphere_box.msh");
      emit(meshgen::sphere_uv(80, 40, Vec3(0.5, 0.5, 0.5), 0.3), "sphere_surface.msh");
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
