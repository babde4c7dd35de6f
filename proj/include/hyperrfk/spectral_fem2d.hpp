#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "hyperrfk/mesh.hpp"

namespace hyperrfk {

struct FemEigResult {
  double tau1 = 0.0;
  std::vector<double> u;  // per vertex, zero on the Dirichlet loop, max |u| = 1
  double residual = 0.0;  // |K u - tau M u| / |M u| (p = 2); last relative decrease otherwise
  int iterations = 0;
  bool constant_sign = false;
  bool converged = false;
  int dofs = 0;
  double h_mesh = 0.0;
  /// p != 2: quotient reached from each start (p = 2 eigenvector, constant).
  std::vector<double> start_values;
};

struct FemOptions {
  double residual_tol = 1e-10;
  int max_iter = 500;
};

/// Smallest eigenvalue of K u = tau M u: flat P1 stiffness, lambda^2-weighted
/// mass, Dirichlet rows removed, natural condition on the outer loop.
/// Shifted inverse iteration on a sparse LDL^T factorization.
FemEigResult eigen_p2(const Mesh& mesh, const FemOptions& opts = {});

struct PGeneralOptions {
  double stall_tol = 1e-10;  // relative quotient decrease over the window
  int stall_window = 50;
  int max_iter = 3000;
  double armijo = 1e-4;
};

/// Minimizes the discrete quotient int lambda^{2-p} |grad u|^p / int lambda^2 |u|^p
/// by descent preconditioned with the lagged p-stiffness, from the p = 2
/// eigenvector and from a constant; returns the better run. The value is an
/// upper bound for the discrete first eigenvalue, not a global certificate.
FemEigResult eigen_p_general(const Mesh& mesh, double p, const PGeneralOptions& opts = {});

/// Single run of the descent from a given vertex field.
FemEigResult eigen_p_general_from(const Mesh& mesh, double p, std::span<const double> start, const PGeneralOptions& opts = {});

/// Hyperbolic area of the meshed region, sum of the lambda^2 mass matrix.
double mesh_hyperbolic_area(const Mesh& mesh);
/// int lambda^2 |u|^p dx.
double weighted_lp_integral(const Mesh& mesh, std::span<const double> u, double p);
/// int lambda^{2-p} |grad u|^p dx, the hyperbolic p-Dirichlet energy.
double p_dirichlet_energy(const Mesh& mesh, std::span<const double> u, double p);

/// CSV with header x,y,u over vertices.
void write_vertex_csv(std::ostream& os, const Mesh& mesh, std::span<const double> u);

}  // namespace hyperrfk
