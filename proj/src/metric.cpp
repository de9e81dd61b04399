#include "ptrack/metric.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

namespace ptrack {

namespace {

constexpr int kDirectSolveLimit = 200000;  // unknowns; larger systems go to CG

using Triplets = std::vector<Eigen::Triplet<double>>;

void check_volume_mesh(const SimplicialMesh& mesh) {
  if (mesh.is_surface())
    throw std::runtime_error("metric: the gradient representation lives on a volume mesh");
}

Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                          const char* what) {
  Eigen::VectorXd x;
  if (A.rows() <= kDirectSolveLimit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error(std::string(what) + ": sparse factorization failed");
    x = solver.solve(b);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(A);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20000);
    x = cg.solve(b);
  }
  double bn = b.norm();
  if (bn > 0.0) {
    double rel = (A * x - b).norm() / bn;
    if (rel > 1e-10) {
      // polish with CG from the current iterate before giving up
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(A);
      cg.setTolerance(1e-12);
      cg.setMaxIterations(20000);
      x = cg.solveWithGuess(b, x);
      rel = (A * x - b).norm() / bn;
      if (rel > 1e-10)
        throw std::runtime_error(std::string(what) + ": solver breakdown, relative residual " +
                                 std::to_string(rel));
    }
  }
  return x;
}

}  // namespace

void MetricConfig::validate() const {
  if (!(mu_max > 0.0) || !(mu_min > 0.0))
    throw std::runtime_error("metric config: Lame parameters must be positive");
  if (!(alpha_le >= 0.0) || !(alpha_l2 >= 0.0) || !(alpha_le + alpha_l2 > 0.0))
    throw std::runtime_error("metric config: need alpha_le + alpha_l2 > 0");
}

NodalField solve_mu_sets(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                         const std::vector<int>& set_max, const std::vector<int>& set_min,
                         const MetricConfig& cfg) {
  check_volume_mesh(mesh);
  const int nv = mesh.n_vertices();
  const int m = mesh.verts_per_cell();

  std::vector<double> dirichlet(nv, std::nan(""));
  for (int i : set_min) dirichlet[i] = cfg.mu_min;
  for (int i : set_max) dirichlet[i] = cfg.mu_max;  // shape values win
  bool any = false;
  for (int i = 0; i < nv; ++i)
    if (!std::isnan(dirichlet[i])) any = true;
  if (!any) throw std::runtime_error("solve_mu: no Dirichlet nodes, system singular");

  Triplets trips;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nv);
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    const auto& c = mesh.cells[ci];
    Vec3 p[4], G[4];
    for (int k = 0; k < m; ++k) p[k] = positions[c[k]];
    double vol = std::abs(simplex_volume(mesh.dim_cell, mesh.dim_ambient, p));
    hat_gradients(mesh.dim_cell, p, G);
    for (int k = 0; k < m; ++k) {
      for (int l = 0; l < m; ++l) {
        double a = vol * G[k].dot(G[l]);
        int gi = c[k], gj = c[l];
        bool di = !std::isnan(dirichlet[gi]), dj = !std::isnan(dirichlet[gj]);
        if (di) continue;
        if (dj)
          b[gi] -= a * dirichlet[gj];
        else
          trips.emplace_back(gi, gj, a);
      }
    }
  }
  for (int i = 0; i < nv; ++i)
    if (!std::isnan(dirichlet[i])) {
      trips.emplace_back(i, i, 1.0);
      b[i] = dirichlet[i];
    }
  Eigen::SparseMatrix<double> A(nv, nv);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd x = solve_spd(A, b, "solve_mu");

  NodalField mu;
  mu.values.assign(x.data(), x.data() + nv);
  return mu;
}

NodalField solve_mu(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                    const std::vector<int>& shape_vertices, const MetricConfig& cfg) {
  return solve_mu_sets(mesh, positions, shape_vertices, mesh.boundary_vertices, cfg);
}

GradientField represent_gradient(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                                 const NodalField& mu, const MetricConfig& cfg,
                                 const std::vector<Vec3>& rhs) {
  check_volume_mesh(mesh);
  cfg.validate();
  if (mu.values.size() != static_cast<size_t>(mesh.n_vertices()))
    throw std::runtime_error("represent_gradient: mu length mismatch");
  if (rhs.size() != static_cast<size_t>(mesh.n_vertices()))
    throw std::runtime_error("represent_gradient: rhs length mismatch");
  if (cfg.alpha_l2 <= 0.0 && mesh.boundary_vertices.empty())
    throw std::runtime_error(
        "represent_gradient: pure shear form with empty boundary has rigid motions in its "
        "kernel");

  const int nv = mesh.n_vertices();
  const int m = mesh.verts_per_cell();
  const int dim = mesh.dim_ambient;
  const int n = nv * dim;
  auto dof = [dim](int vertex, int comp) { return vertex * dim + comp; };

  Triplets trips;
  trips.reserve(static_cast<size_t>(mesh.n_cells()) * m * m * dim * dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < nv; ++i)
    if (!mesh.vertex_on_boundary[i])
      for (int a = 0; a < dim; ++a) b[dof(i, a)] = rhs[i][a];

  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    const auto& c = mesh.cells[ci];
    Vec3 p[4], G[4];
    double mu_bar = 0.0;
    for (int k = 0; k < m; ++k) {
      p[k] = positions[c[k]];
      mu_bar += mu.values[c[k]];
    }
    mu_bar /= m;
    double vol = std::abs(simplex_volume(mesh.dim_cell, mesh.dim_ambient, p));
    hat_gradients(mesh.dim_cell, p, G);
    // consistent P1 mass: vol * (1 + delta_kl) / ((m)(m+1))
    const double mass_off = vol / (m * (m + 1.0));
    for (int k = 0; k < m; ++k) {
      for (int l = 0; l < m; ++l) {
        double gg = G[k].dot(G[l]);
        double mass = cfg.alpha_l2 * mass_off * (k == l ? 2.0 : 1.0);
        for (int a = 0; a < dim; ++a) {
          for (int bcomp = 0; bcomp < dim; ++bcomp) {
            // eps(N_k e_a) : eps(N_l e_b) = (delta_ab <Gk,Gl> + Gk[b] Gl[a]) / 2
            double eps = 0.5 * ((a == bcomp ? gg : 0.0) + G[k][bcomp] * G[l][a]);
            double val = cfg.alpha_le * mu_bar * vol * eps + (a == bcomp ? mass : 0.0);
            if (val == 0.0) continue;
            int gi = c[k], gj = c[l];
            bool di = mesh.vertex_on_boundary[gi], dj = mesh.vertex_on_boundary[gj];
            if (di || dj) continue;  // homogeneous Dirichlet rows/columns
            trips.emplace_back(dof(gi, a), dof(gj, bcomp), val);
          }
        }
      }
    }
  }
  for (int i = 0; i < nv; ++i)
    if (mesh.vertex_on_boundary[i])
      for (int a = 0; a < dim; ++a) {
        trips.emplace_back(dof(i, a), dof(i, a), 1.0);
        b[dof(i, a)] = 0.0;
      }

  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd x = solve_spd(A, b, "represent_gradient");

  GradientField out;
  out.u.assign(nv, Vec3::Zero());
  for (int i = 0; i < nv; ++i)
    for (int a = 0; a < dim; ++a) out.u[i][a] = x[dof(i, a)];
  return out;
}

double l2_norm_nodal(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
                     const std::vector<Vec3>& field) {
  if (field.size() != static_cast<size_t>(mesh.n_vertices()))
    throw std::runtime_error("l2_norm: field length mismatch");
  const int m = mesh.verts_per_cell();
  double acc = 0.0;
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    const auto& c = mesh.cells[ci];
    Vec3 p[4];
    for (int k = 0; k < m; ++k) p[k] = positions[c[k]];
    double vol = std::abs(simplex_volume(mesh.dim_cell, mesh.dim_ambient, p));
    const double w = vol / (m * (m + 1.0));
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l)
        acc += w * (k == l ? 2.0 : 1.0) * field[c[k]].dot(field[c[l]]);
  }
  return std::sqrt(std::max(acc, 0.0));
}

double l2_norm(const SimplicialMesh& mesh, const std::vector<Vec3>& positions,
               const GradientField& field) {
  return l2_norm_nodal(mesh, positions, field.u);
}

}  // namespace ptrack
