#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cofreq/ambient.hpp"
#include "cofreq/field.hpp"

namespace cofreq::cli {

/// Invalid configuration; the message carries "line L: ..." when a position is known.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One summand of the solution: kind is gallery, distance, mode or random.
struct TermSpec {
  std::string kind = "distance";
  std::string name;       // gallery entry
  int j = 1;              // mode index
  int harmonic = 0;
  double Lambda_max = 5.0;  // random
  unsigned long seed = 0;   // random, offset by --seed
  double coeff = 1.0;
};

struct ExperimentConfig {
  AmbientConfig ambient{4, 2};
  std::vector<TermSpec> solution{TermSpec{}};
  std::vector<double> center;  // empty means the origin

  struct {
    double r_min = 0.05, r_max = 1.0, ratio = 1.189207115002721;
    std::string route = "auto";
    int theta_nodes = 32, s1_nodes = 32;
    double monotonicity_tol = 1e-6;
    double rigidity_tol = 1e-6;  // |N - Lambda| when the solution is homogeneous
  } frequency;

  struct {
    double Lambda = -1;  // negative: use N at r_max
    double epsilon_pinch = 0.05;
    double r1 = 0.1, r2 = 1.0;
  } pinch;

  struct {
    double r0 = 1.0, pitch = 0.0625;
    double tau_u = 3.0, tau_g = 3.0, Lambda_hat = 2.0;
    bool boundary = true;
  } singular;

  struct {
    std::vector<double> s{0.125, 0.0625, 0.03125};
    int mc_points = 20000;
    double slope = 2.0, slope_tol = 0.2;
  } minkowski;

  struct {
    double delta = 0.3, trace_r_min = 0.25, outlier_fraction = 0.0;
  } cone;

  struct {
    std::string family = "paraboloid";
    double kappa = 0.05, a = 0.01, k = 1.0;
    std::vector<std::vector<double>> L;  // linear family, m x d
    double r0 = 0.4;
    double beta = 2.0, epsilon = 0.05, M = 100;
    double delta_lo = 1e-3, delta_hi = 1e-1;
    int shells = 7, points_per_shell = 16;
    double slope_threshold = 0.8;
    int bilipschitz_points = 142;  // about 10^4 pairs
    double bilipschitz_C = 10;
  } flatten;

  struct {
    double rho = 0.5, R = 1.0, Lambda_max = 3.0;
    double tol = 1e-8;
  } annulus;

  struct {
    std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  } validate;
};

ExperimentConfig load_config(const std::string &path);
ExperimentConfig parse_config(const std::string &text);
/// Fully resolved config, defaults included.
nlohmann::json to_json(const ExperimentConfig &c);

/// Solution built from the term list; holds HomogeneousSolution or SolutionMix.
std::shared_ptr<const Field> build_solution(const ExperimentConfig &cfg, unsigned long seed, AmbientConfig &ambient,
                                            double &Lambda);

}  // namespace cofreq::cli
