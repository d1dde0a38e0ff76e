#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cofreq/field.hpp"
#include "cofreq/homogeneous.hpp"
#include "cofreq/quadrature.hpp"

namespace cofreq {

/// Bounded coefficient matrix 𝒜; the operator matrix is A = |t|^{-(m-1)} 𝒜.
using MatrixField = std::function<Mat(const Vec &)>;

enum class EnergyRoute { Auto, Bulk, Flux };

struct FrequencyOptions {
  QuadratureOptions quad = default_quad();
  EnergyRoute route = EnergyRoute::Auto;
  int panel_nodes = 10;    // Gauss-Legendre nodes per radial panel
  int inner_panels = 10;   // dyadic panels below the smallest radius
  double h_floor = 1e-300;

  static QuadratureOptions default_quad();
};

/// Variable coefficients: 𝒜 and the frozen matrix 𝒜0 at the center (defaults to 𝒜(center)).
struct Coefficients {
  MatrixField calA;
  std::optional<Mat> A0;
};

struct FrequencyProfile {
  Vec center;
  std::vector<double> radii, H, D, N;
  Mat matrix_root;  // 𝒜0^{1/2}
  EnergyRoute route = EnergyRoute::Bulk;
};

/// H, D and N = rD/H on ellipsoids 𝒜0^{1/2} B_r + center, identity coefficients by default.
FrequencyProfile frequency_profile(const Field &u, const Vec &center, const std::vector<double> &radii,
                                   const AmbientConfig &cfg, const FrequencyOptions &opts = {},
                                   const Coefficients *coef = nullptr);

/// H(r) alone, identity coefficients, on round spheres around `center`.
std::vector<double> height_profile(const Field &u, const Vec &center, const std::vector<double> &radii,
                                   const AmbientConfig &cfg,
                                   const QuadratureOptions &quad = FrequencyOptions::default_quad());

/// Geometric radii r_max q^{-k} down to r_min (ascending, r_min always included), q = 2^{1/4} by default.
std::vector<double> geometric_radii(double r_min, double r_max, double ratio = std::pow(2.0, 0.25));

/// int_{B_8r} u^2 dm / int_{B_r} u^2 dm.
double doubling_index(const Field &u, const Vec &X0, double r, const AmbientConfig &cfg,
                      const FrequencyOptions &opts = {});

/// sum Lambda W r^{2 Lambda} / sum W r^{2 Lambda} with W the spectral weight per homogeneity.
double closed_form_frequency(const std::map<double, double> &weights, double r);

/// One orthonormal block of L^2(dB_1, sigma_w): the traces of H_Lambda.
struct SpectralBlock {
  double Lambda = 1.0;
  std::vector<Mode> modes;
  Mat combo;  // modes x basis; basis_i = sum_l combo(l, i) mode_l
  std::vector<TermField> basis;
  int size() const { return static_cast<int>(basis.size()); }
};

/// Orthonormal bases of the traces of H_Lambda for every Lambda in F up to Lambda_max.
std::vector<SpectralBlock> spectral_basis(const AmbientConfig &cfg, double Lambda_max,
                                          const QuadratureOptions &quad = FrequencyOptions::default_quad());

struct SpectralDecomposition {
  double r0 = 1.0;
  std::vector<double> Lambdas;             // per block
  std::vector<std::vector<double>> coeffs;  // per block, a_j^k at r0
  double parseval_lhs = 0.0;                // sum of squares
  double parseval_rhs = 0.0;                // r0^{-d} H(r0)
  std::vector<std::string> warnings;

  /// Sum_j (a_j^k)^2 rescaled to unit radius, keyed by Lambda.
  std::map<double, double> unit_weights() const;
};

/// Projection of u(r0 .) around the origin onto the spectral blocks.
SpectralDecomposition spectral_decompose(const Field &u, double r0, const std::vector<SpectralBlock> &blocks,
                                         const AmbientConfig &cfg,
                                         const QuadratureOptions &quad = FrequencyOptions::default_quad());
SpectralDecomposition spectral_decompose(const Field &u, double r0, double Lambda_max, const AmbientConfig &cfg);

/// (a, b) with a R^L + b R^{-L-d+1} = cR and a rho^L + b rho^{-L-d+1} = c_rho.
std::pair<double, double> annulus_coefficients(double Lambda, int d, double rho, double R, double c_rho,
                                               double c_R);

struct AnnulusSolution {
  double rho = 0.5, R = 1.0;
  int d = 1;
  std::vector<SpectralBlock> blocks;
  std::vector<std::vector<std::pair<double, double>>> ab;  // per block, per basis element
  std::vector<std::string> warnings;

  double value(const Vec &X) const;
};

/// Solve the annulus problem from boundary data on dB_rho and dB_R (centered at 0).
AnnulusSolution solve_annulus(const ScalarField &f_rho, const ScalarField &f_R, double rho, double R,
                              const AmbientConfig &cfg, double Lambda_max = 4.0,
                              const QuadratureOptions &quad = FrequencyOptions::default_quad());

struct PinchReport {
  double Lambda = 1.0;
  double eps = 0.05;
  double r1 = 0.0, r2 = 0.0;
  bool pinched = false;
  double max_deviation = 0.0;
  int samples = 0;
};

PinchReport pinch_detect(const FrequencyProfile &profile, double Lambda, double eps, double r1, double r2);

/// Radius where the sampled N first crosses `level`, log-linear interpolation; nullopt if it never does.
std::optional<double> crossing_radius(const FrequencyProfile &profile, double level);

/// Smallest C with N(r) e^{C r} non-decreasing on the sampled radii.
double empirical_monotonicity_constant(const FrequencyProfile &profile);

struct HopReport {
  double delta = 0.0, gamma = 10.0;
  double N_off = 0.0, N_low = 0.0, N_high = 0.0;
  double C = 0.0;  // smallest C making both hop inequalities hold
};

/// Frequency at X0 (off R^d) with r = gamma delta(X0) against its projection at (gamma -+ 2) delta.
HopReport boundary_hop(const Field &u, const Vec &X0, double gamma, const AmbientConfig &cfg,
                       const FrequencyOptions &opts = {});

struct DistanceOptions {
  int grid_points = 10000;
  double delta_exclude = 1e-3;
  int lawson_iterations = 40;
  int scales = 6;  // samples of [r1, r2] for the interval version
};

/// Normalized L^infinity distance of u(X0 + r .) to H_Lambda (identity class) on B_1.
double dist_to_H_Lambda(const Field &u, const Vec &X0, double r, double Lambda, const AmbientConfig &cfg,
                        const DistanceOptions &opts = {});
/// Interval version: inf over v of sup over sampled s in [r1, r2].
double dist_to_H_Lambda(const Field &u, const Vec &X0, double r1, double r2, double Lambda,
                        const AmbientConfig &cfg, const DistanceOptions &opts = {});

}  // namespace cofreq
