#pragma once

#include <span>
#include <vector>

#include "hyperrfk/bodies.hpp"

namespace hyperrfk {

struct NagyOptions {
  double tol_num = 1e-8;  // relative to P(K*_delta)
  double tol_eq = 1e-6;   // relative; equality detection
  /// Run on bodies that do not meet the hypotheses (n >= 3 convex but not
  /// h-convex). The report is then marked as outside the hypotheses.
  bool force = false;
};

struct NagyRow {
  double delta = 0.0;
  double p_body = 0.0;
  double p_ball = 0.0;
  double margin = 0.0;
};

struct NagyReport {
  int n = 2;
  double r_star = 0.0;
  std::vector<NagyRow> rows;
  bool verdict = false;
  bool equality_detected = false;
  bool hypotheses_met = true;
};

/// 16 log-spaced distances in [1e-3, 2].
std::vector<double> default_delta_grid();

/// Throws PreconditionError naming the failed flag unless `force`; returns
/// whether the hypotheses hold.
bool check_nagy_hypotheses(const Body& body, bool force = false);

/// Radius of the ball K* with W_{n-1}(K*) = W_{n-1}(K).
double equivalent_ball(const Body& body, bool force = false);

NagyReport nagy_table(const Body& body, std::span<const double> deltas, const NagyOptions& opts = {});

/// Exploratory comparison against the perimeter-matched ball K#; no sign is asserted.
NagyReport perimeter_matched_table(const Body& body, std::span<const double> deltas);

/// W_j(K) - f_j(f_i^{-1}(W_i(K))) with f_m(r) = W_m(B_r).
double af_check(const Body& body, int i, int j, bool force = false);

/// P(K)^2 - 4 pi |K| - |K|^2. Convexity is not required.
double isoperimetric_check_2d(const Body2D& body);

}  // namespace hyperrfk
