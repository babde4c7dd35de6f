#include "hyperrfk/nagy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hyperrfk {

std::vector<double> default_delta_grid() {
  std::vector<double> g(16);
  const double lo = std::log(1e-3), hi = std::log(2.0);
  for (int i = 0; i < 16; ++i) g[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / 15.0);
  g.back() = 2.0;
  return g;
}

bool check_nagy_hypotheses(const Body& body, bool force) {
  const int n = body_dimension(body);
  const auto rep = convexity_report(body);
  if (n == 2) {
    if (!rep.is_convex) throw PreconditionError("hypothesis failed: is_convex (n = 2 requires a convex body)");
    return true;
  }
  if (!rep.is_convex) throw PreconditionError("hypothesis failed: is_convex");
  if (!rep.is_h_convex) {
    if (!force) throw PreconditionError("hypothesis failed: is_h_convex (n >= 3 requires an h-convex body)");
    return false;
  }
  return true;
}

double equivalent_ball(const Body& body, bool force) {
  check_nagy_hypotheses(body, force);
  const int n = body_dimension(body);
  const auto q = quermassintegrals(body);
  return quermass_inverse_radius(Dimension(n), n - 1, q[n - 1]);
}

namespace {

NagyReport compare_with_ball(const Body& body, double r_ball, std::span<const double> deltas, const NagyOptions& opts) {
  const int n = body_dimension(body);
  const auto profile = curvature_profile(body);
  NagyReport rep;
  rep.n = n;
  rep.r_star = r_ball;
  rep.verdict = true;
  double worst_gap = 0.0;
  for (double d : deltas) {
    NagyRow row;
    row.delta = d;
    row.p_body = parallel_perimeter_direct(profile, d);
    row.p_ball = ball_perimeter(Dimension(n), r_ball + d);
    row.margin = row.p_ball - row.p_body;
    if (row.margin < -opts.tol_num * row.p_ball) rep.verdict = false;
    worst_gap = std::max(worst_gap, std::abs(row.margin) / row.p_ball);
    rep.rows.push_back(row);
  }
  rep.equality_detected = worst_gap <= opts.tol_eq;
  return rep;
}

}  // namespace

NagyReport nagy_table(const Body& body, std::span<const double> deltas, const NagyOptions& opts) {
  const bool ok = check_nagy_hypotheses(body, opts.force);
  auto rep = compare_with_ball(body, equivalent_ball(body, opts.force), deltas, opts);
  rep.hypotheses_met = ok;
  return rep;
}

NagyReport perimeter_matched_table(const Body& body, std::span<const double> deltas) {
  const int n = body_dimension(body);
  const double p = boundary_measures(body).perimeter;
  const double r_sharp = quermass_inverse_radius(Dimension(n), 1, p / n);
  auto rep = compare_with_ball(body, r_sharp, deltas, NagyOptions{});
  rep.hypotheses_met = false;  // the comparison is not guaranteed for n >= 3
  return rep;
}

double af_check(const Body& body, int i, int j, bool force) {
  const int n = body_dimension(body);
  if (i < 0 || j <= i || j > n - 1) throw DomainError("af_check requires 0 <= i < j <= n-1");
  if (n == 2 && !(i == 0 && j == 1)) throw DomainError("af_check in the plane covers only (i, j) = (0, 1)");
  if (n >= 3) check_nagy_hypotheses(body, force);
  const auto q = quermassintegrals(body);
  const double r = quermass_inverse_radius(Dimension(n), i, q[i]);
  return q[j] - ball_quermass_entry(Dimension(n), j, r);
}

double isoperimetric_check_2d(const Body2D& body) {
  const auto m = boundary_measures(Body(body));
  return m.perimeter * m.perimeter - 4.0 * std::numbers::pi * m.volume - m.volume * m.volume;
}

}  // namespace hyperrfk
