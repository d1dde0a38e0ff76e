#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cofreq/field.hpp"
#include "cofreq/harmonics.hpp"

namespace cofreq {

/// gamma_j = (1 + sqrt(1 + 4 lambda_j)) / 2, the positive root of g (g - 1) = lambda_j.
double gamma_j(int j, int m);

/// Smallest integer N with lambda_N > Lambda^2.
int mode_cutoff(double Lambda, int m);

/// (Lambda - k)(Lambda - k - 1) = lambda_j, or an integer Lambda.
struct Witness {
  bool integer = false;
  int k = 0;
  int j = 0;
};

struct FrequencyEntry {
  double Lambda = 1.0;
  std::vector<Witness> witnesses;
  bool is_integer() const;
};

struct FrequencySet {
  AmbientConfig cfg;
  double Lambda_max = 8.0;
  std::vector<FrequencyEntry> entries;

  const FrequencyEntry *find(double Lambda, double tol = 1e-9) const;
  bool contains(double Lambda, double tol = 1e-9) const { return find(Lambda, tol) != nullptr; }
};

FrequencySet frequency_set(const AmbientConfig &cfg, double Lambda_max = 8.0);

/// a_j(x, r) phi_j(omega) with a_j = sum_k b_k(x) r^{Lambda - k}.
struct Mode {
  double Lambda = 1.0;
  int j = 0;
  SphericalHarmonic phi;
  int k_top = 0;
  std::vector<std::pair<int, Polynomial>> coeffs;  // (k, b_k), k descending in steps of 2

  double lowest_r_power() const { return Lambda - k_top; }
  /// Terms b_k(x) P(t) |t|^{Lambda - k - j} for evaluation.
  TermField field(int d) const;
};

/// Build a mode from the seed b_{k_j}. For j = 0 the seed is the r^1 coefficient of an
/// odd-in-r harmonic polynomial and the constant harmonic is scaled out, so the mode
/// equals the harmonic polynomial itself.
Mode build_mode(double Lambda, int j, const Polynomial &seed, const SphericalHarmonic &phi,
                const AmbientConfig &cfg);
Mode build_mode(double Lambda, int j, const Polynomial &seed, const AmbientConfig &cfg, int harmonic_index = 0);

/// Sum of Lambda-homogeneous modes with exact evaluation.
class HomogeneousSolution : public Field {
 public:
  HomogeneousSolution(const AmbientConfig &cfg, double Lambda);

  void add_mode(const Mode &mode, double scale = 1.0);

  double Lambda() const { return Lambda_; }
  const AmbientConfig &config() const { return cfg_; }
  const std::vector<Mode> &modes() const { return modes_; }
  const std::vector<double> &scales() const { return scales_; }
  const TermField &terms() const { return field_; }

  int dim() const override { return cfg_.n; }
  double value(const Vec &X) const override { return field_.value(X); }
  Vec gradient(const Vec &X) const override { return field_.gradient(X); }
  Mat hessian(const Vec &X) const override { return field_.hessian(X); }
  void value_gradient(const Vec &X, double &v, Vec &g) const override { field_.value_gradient(X, v, g); }

 private:
  AmbientConfig cfg_;
  double Lambda_;
  std::vector<Mode> modes_;
  std::vector<double> scales_;
  TermField field_;
};

/// Linear combination of homogeneous solutions, possibly of different homogeneities.
class SolutionMix : public Field {
 public:
  explicit SolutionMix(const AmbientConfig &cfg) : cfg_(cfg), field_(cfg.d, cfg.m()) {}
  void add(const HomogeneousSolution &u, double c);

  const AmbientConfig &config() const { return cfg_; }
  const std::vector<std::pair<double, HomogeneousSolution>> &parts() const { return parts_; }

  int dim() const override { return cfg_.n; }
  double value(const Vec &X) const override { return field_.value(X); }
  Vec gradient(const Vec &X) const override { return field_.gradient(X); }
  Mat hessian(const Vec &X) const override { return field_.hessian(X); }
  void value_gradient(const Vec &X, double &v, Vec &g) const override { field_.value_gradient(X, v, g); }

 private:
  AmbientConfig cfg_;
  std::vector<std::pair<double, HomogeneousSolution>> parts_;
  TermField field_;
};

/// Gallery entries: codim1-lift, nonintegral, mixed-parity, large-singular.
/// mixed-parity lives in its own ambient space (n = 11, d = 1, m = 10) whatever cfg is.
HomogeneousSolution gallery(const std::string &name, const AmbientConfig &cfg);
std::vector<std::string> gallery_names();

/// The basic profile u = |t| (Lambda = 1).
HomogeneousSolution distance_solution(const AmbientConfig &cfg);

/// Single mode with seed 1 and harmonic index 0 at Lambda = gamma_j.
HomogeneousSolution pure_mode(const AmbientConfig &cfg, int j, int harmonic_index = 0);

/// All Lambda-homogeneous modes with monomial seeds (the spanning set of H_Lambda).
std::vector<Mode> homogeneous_space_modes(const AmbientConfig &cfg, const FrequencyEntry &entry);

/// Random Lambda-homogeneous solution with Lambda <= Lambda_max (deterministic in seed).
HomogeneousSolution random_solution(const AmbientConfig &cfg, double Lambda_max, unsigned long seed);
/// Random element of H_Lambda for the given entry: Gaussian seeds and harmonics per witness.
HomogeneousSolution random_solution(const AmbientConfig &cfg, const FrequencyEntry &entry, std::mt19937_64 &rng);

/// Sum of `terms` random solutions with distinct homogeneities <= Lambda_max and Gaussian weights.
SolutionMix random_mix(const AmbientConfig &cfg, double Lambda_max, int terms, unsigned long seed);

nlohmann::json to_json(const Polynomial &p);
Polynomial polynomial_from_json(const nlohmann::json &j);
nlohmann::json to_json(const HomogeneousSolution &u);
HomogeneousSolution solution_from_json(const nlohmann::json &j);
nlohmann::json to_json(const FrequencySet &F);

}  // namespace cofreq
