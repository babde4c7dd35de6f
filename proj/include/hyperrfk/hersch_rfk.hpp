#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "hyperrfk/mesh.hpp"
#include "hyperrfk/spectral_radial.hpp"

namespace hyperrfk {

/// Signed hyperbolic distance to the hole boundary (negative inside the hole),
/// by a coarse scan of boundary samples refined with Brent's method. The hole
/// is taken in the canonical frame of the domain.
class HoleDistance {
 public:
  explicit HoleDistance(const Body2D& hole, int samples = 256);
  double operator()(Complex z) const;
  bool inside(Complex z) const;

 private:
  Body2D hole_;
  std::vector<double> theta_;
  std::vector<Complex> pts_;
  std::vector<double> inv_;  // 1 / (1 - |pt|^2)
};

/// Distance to Gamma_D sampled on a uniform square grid covering Omega_N.
struct DistanceField {
  int res = 0;
  double x0 = 0.0, y0 = 0.0, cell = 0.0;
  std::vector<double> d;            // d[j * res + i] at (x0 + i cell, y0 + j cell)
  std::vector<char> in_outer;       // node inside Omega_N
  double delta0 = 0.0;              // sup of the distance over Omega
  double lambda_max = 0.0;          // conformal factor bound on Omega_N

  double at(int i, int j) const { return d[static_cast<std::size_t>(j) * res + i]; }
  Complex node(int i, int j) const { return {x0 + i * cell, y0 + j * cell}; }
};

/// Throws PreconditionError when the hole is not convex.
DistanceField distance_field(const AnnularDomain2D& dom, int grid_res = 1024);

/// L(delta): hyperbolic length of {d = delta} inside Omega_N, by marching squares.
double parallel_length(const AnnularDomain2D& dom, const DistanceField& field, double delta);
std::vector<double> parallel_lengths(const AnnularDomain2D& dom, const DistanceField& field, std::span<const double> deltas);

struct ParallelTable {
  std::vector<double> deltas;  // uniform on [0, delta_end], delta_end < delta0
  std::vector<double> L;
  std::vector<double> Ltilde;  // P(B_{r + delta})
  double delta0 = 0.0;
  double r = 0.0;              // matched inner radius used for Ltilde
  int grid_res = 0;
  double cell = 0.0;

  /// L on [0, delta0]: table interpolation, then a tail model up to delta0.
  double length(double delta) const;
};

/// The last sample stops a few grid cells short of delta0, where the level
/// set runs into Gamma_N and marching squares cannot resolve it.
ParallelTable parallel_table(const AnnularDomain2D& dom, const DistanceField& field, double r_match, int samples = 513);

struct InteriorCoords {
  double p = 2.0;
  double r = 0.0, R = 0.0;
  std::vector<double> deltas;   // as in the table
  std::vector<double> M;        // M at the table deltas
  double M_star = 0.0;          // M(delta0)
  double Mtilde_star = 0.0;     // Mtilde(R - r)

  ParallelTable table;

  double m(double delta) const;           // M, with the table's tail model
  double m_inverse(double beta) const;
  double mtilde(double s) const;          // composite Gauss
  double mtilde_inverse(double beta) const;
  double ltilde(double s) const;          // P(B_{r + s})
};

/// M(d) = int_0^d L^{1-p'}, Mtilde(d) = int_0^d Ltilde^{1-p'}. Throws
/// DataError if L vanishes inside the table.
InteriorCoords interior_coords(const ParallelTable& table, double p, double R);

/// Radii of the concentric annulus with the same area and W_1 of the hole.
std::pair<double, double> annulus_match(const AnnularDomain2D& dom);

struct HerschBound {
  double bound = 0.0;
  double numerator = 0.0;           // annulus p-energy of v
  double numerator_beta = 0.0;      // same, as int |f'(beta)|^p d beta
  double denominator = 0.0;         // int_Omega |u|^p via the coarea formula
  double annulus_denominator = 0.0; // int_A |v|^p
  double delta_bar = 0.0;           // M^{-1}(Mtilde_*)
  // Lemma: G(beta) <= Gtilde(beta) on [0, Mtilde_*].
  double max_g_excess = 0.0;        // max (G - Gtilde) / Gtilde
  double terminal_gap = 0.0;        // (Gtilde - G) / Gtilde at Mtilde_*
};

/// Rayleigh quotient of the transplanted annulus eigenfunction
/// u = f(M(d)), f = v o Mtilde^{-1}, capped at f(Mtilde_*), assembled from
/// one-dimensional tables.
HerschBound hersch_bound(const InteriorCoords& coords, const EigResult& shell);

struct RFKOptions {
  double h_mesh = 0.01;
  int grid_res = 1024;
  int delta_samples = 513;
  double tol_chain = 2e-3;  // relative
  double tol_eq = 1e-3;     // relative
};

struct RFKReport {
  double p = 2.0;
  double tau_omega = 0.0;
  double hersch_bound = 0.0;
  double tau_annulus = 0.0;
  double r = 0.0, R = 0.0;
  double delta0 = 0.0;
  double area = 0.0;
  HerschBound detail;
  bool lemma_i_ok = false;   // R - r <= delta0 + 2 cells
  bool lemma_ii_ok = false;  // G <= Gtilde within tolerance
  bool chain_ok = false;
  bool equality_detected = false;
  int fem_dofs = 0;
  double h_mesh = 0.0;
  int grid_res = 0;
};

RFKReport rfk_verdict(const AnnularDomain2D& dom, double p, const RFKOptions& opts = {});

void write_parallel_table_csv(std::ostream& os, const ParallelTable& table, const InteriorCoords* coords = nullptr);

}  // namespace hyperrfk
