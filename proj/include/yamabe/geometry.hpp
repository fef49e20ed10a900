#pragma once

#include <ostream>
#include <vector>

#include "yamabe/ancient.hpp"
#include "yamabe/pde.hpp"

namespace yamabe {

/**
 * Curvature of g = u_raw^{4/(n-2)} (dx_raw^2 + g_sphere) for a normalized
 * state u. Coordinates and factor are mapped back with NormalizationMap:
 * x_raw = x / sqrt(beta), u_raw = u / k. Entries are NaN at the two end
 * points and wherever u (or a stencil neighbour) lies below the mask.
 */
struct CurvatureProfile {
  UniformGrid grid;            ///< normalized grid of the state
  std::vector<double> x_raw;
  std::vector<double> R_normalized;
  std::vector<double> R_geometric;
  std::vector<double> ric_radial;
  std::vector<double> ric_spherical;
  std::vector<double> sec_cond1;
  std::vector<double> sec_cond2;
  std::vector<double> rm_norm;
};

/// 1 - ((p-1)/p) u^{-p} (u_xx + u^p - u) at a single point.
double normalized_curvature_at(double u, double u_xx, double p);

/// normalized_curvature_at with centered second differences.
std::vector<double> scalar_curvature_normalized(const FlowState& state, double p, double mask = 1e-8);

/// u_raw^{-p} (-cbar u_raw'' + R_cyl u_raw), cbar = 4(n-1)/(n-2), R_cyl = (n-1)(n-2).
std::vector<double> scalar_curvature_geometric(const FlowState& state, int n, double mask = 1e-8);

struct RicciEigenvalues {
  std::vector<double> radial;
  std::vector<double> spherical;
};
RicciEigenvalues ricci_eigenvalues(const FlowState& state, int n, double mask = 1e-8);

struct SectionalCheck {
  double min_cond1 = 0.0;
  double min_cond2 = 0.0;
  std::vector<double> cond1;  ///< w_x^2 - w w_xx, w = u_raw^{4/(n-2)}
  std::vector<double> cond2;  ///< 4 w^2 - w_x^2
};
SectionalCheck sectional_sign_check(const FlowState& state, int n, double mask = 1e-8);

/**
 * |Rm| proxy from the two sectional curvatures of a rotationally symmetric
 * conformally flat metric: K_rad (planes containing the axis, multiplicity
 * n-1) and K_sph (planes tangent to the sphere, multiplicity (n-1)(n-2)/2):
 *   |Rm| = sqrt((n-1) K_rad^2 + (n-1)(n-2)/2 K_sph^2).
 */
double rm_norm_from_sectional(int n, double k_rad, double k_sph);

CurvatureProfile curvature_profile(const FlowState& state, int n, double mask = 1e-8);

/// R_geometric = A * R_normalized + B.
struct AffineCalibration {
  double A = 0.0;
  double B = 0.0;
  double max_residual = 0.0;
};

/// Least-squares fit over constant states u = c and the sampled steady state.
AffineCalibration calibrate_affine(int n, double dx = 0.01);

/// The same constants in closed form: A = R_cyl alpha^2/beta, B = -R_cyl alpha/(beta (p-1)).
AffineCalibration affine_closed_form(int n);

/// Wave-frame polar picture of one tip: z = x - lambda tau + h (left) or
/// -x - lambda tau + h (right), r = e^{(p-1)z/2}, u_hat = U e^{-z}.
struct PolarState {
  double tau = 0.0;
  Orientation orientation = Orientation::left;
  double lambda = 0.0;
  double h = 0.0;
  double p = 0.0;
  std::vector<double> x;      ///< cylindrical abscissae kept
  std::vector<double> z;
  std::vector<double> radii;
  std::vector<double> u_hat;
};

/// Keeps the half of the grid on the side of `orientation` up to x_cut
/// (left: x <= x_cut, right: x >= x_cut).
PolarState to_polar(const FlowState& state, double p, Orientation orientation, double lambda, double h,
                    double x_cut);

/// U = u_hat e^{z} at the stored abscissae.
std::vector<double> from_polar(const PolarState& polar);

/**
 * Smooth radial evaluator of u_hat built from the cylindrical samples: ln U is
 * interpolated with cubic Lagrange polynomials and continued by its e^{x}
 * tail beyond the grid, so u_hat(r) = U(x(r)) e^{-z(r)} is defined down to r -> 0.
 */
class PolarField {
public:
  PolarField(const FlowState& state, double p, Orientation orientation, double lambda, double h);
  double u_hat(double r) const;
  double p() const { return p_; }
  /// Radius of the grid end on the tip side; below it u_hat is continued as a constant.
  double edge_radius() const;

private:
  double log_u(double x) const;
  const FlowState* state_;
  Orientation orientation_;
  double lambda_, h_, p_;
};

struct PolarCurvature {
  double R_geometric = 0.0;
  double k_rad = 0.0;
  double k_sph = 0.0;
  double ric_radial = 0.0;     ///< (n-1) k_rad
  double ric_spherical = 0.0;  ///< k_rad + (n-2) k_sph
  double rm_norm = 0.0;
};

/// Curvature of (u_hat/k)^{4/(n-2)} delta at radius r, stencil spacing dr.
PolarCurvature polar_curvature(const PolarField& field, int n, double r, double dr);

struct MeanValueCheck {
  double value = 0.0;         ///< u_hat at the centre y0
  double ball_average = 0.0;  ///< average of u_hat over B(y0, 1)
};

/// Mean-value inequality for the superharmonic u_hat at |y0| = rho, with the
/// ball average reduced to a radial integral weighted by the spherical-cap measure.
MeanValueCheck mean_value_check(const PolarField& field, int n, double rho, int nodes = 400);

/// Wave frame of one tip of a state.
struct TipFrame {
  Orientation orientation = Orientation::left;
  double lambda = 0.0;
  double h = 0.0;
};

struct CurvatureSample {
  double x = 0.0;  ///< normalized abscissa
  double R_geometric = 0.0;
  double ric_radial = 0.0;
  double ric_spherical = 0.0;
  double rm_norm = 0.0;
  bool polar = false;
};

/**
 * Curvature over a whole state: cylindrical differences where u >= u_split,
 * polar stencils (polar_points radii up to the split radius) around each tip
 * frame below it, where the cylindrical formulas lose accuracy like u^{1-p}.
 */
std::vector<CurvatureSample> two_region_profile(const FlowState& state, int n, const std::vector<TipFrame>& tips,
                                                double u_split = 0.3, int polar_points = 200);

/// Tip scale: polar evaluation covers |y| <= 2M, cylindrical evaluation |y| >= M/2.
inline constexpr double kTipRadius = 2.0;

struct RmSample {
  double tau = 0.0;
  double sup_rm = 0.0;
  double sup_rm_cylinder = 0.0;
  double sup_rm_polar = 0.0;
  double min_R_normalized = 0.0;   ///< over both regions (polar via the affine map)
  double min_sec_cond1 = 0.0;      ///< cylindrical region
  double min_sec_cond2 = 0.0;
  double overlap_gap = 0.0;        ///< max relative |R_cyl - R_polar| on M/2 <= |y| <= 2M
  double u_hat_min = 0.0;          ///< over |y| <= 2M, both tips
  double u_hat_max = 0.0;
  double mean_value_margin = 0.0;  ///< min over tips of (value - ball average) / value
};

struct RmMonitor {
  std::vector<RmSample> series;
  double sup = 0.0;
  LineFit trend;  ///< sup_rm against tau
};

/// Two-region curvature monitor along a run (tips in polar, cylinder between).
RmSample curvature_sample(const FlowState& state, const SupersolutionSpec& spec, double polar_dr = 0.05);
RmMonitor riemann_norm_monitor(const AncientRun& run, const SupersolutionSpec& spec, double tau_lo, double tau_hi,
                               double polar_dr = 0.05);

void write_curvature_csv(std::ostream& os, const CurvatureProfile& profile);

}  // namespace yamabe
