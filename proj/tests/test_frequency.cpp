#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Sparse>

#include "cofreq/frequency.hpp"

using namespace cofreq;
constexpr double kPi = std::numbers::pi;
const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

namespace {

const AmbientConfig kCfg(4, 2);

Vec origin(int n = 4) { return Vec::Zero(n); }

// Exact weighted-sphere norms for n = 4, d = 2 on dB_1:
// int |t|^{2a} phi^2 d sigma_w = int_0^{pi/2} sin^{2a} cos dtheta * |S^1| * int phi^2.
double norm2_t_power(double a, double phi_sq_integral) { return phi_sq_integral * 2 * kPi / (2 * a + 1); }

// Second-order finite differences for c'' + (d/r) c' - L(L+d-1)/r^2 c = 0 on [rho, R].
std::vector<double> radial_fd(double L, int d, double rho, double R, double c_rho, double c_R, int N) {
  const double h = (R - rho) / N;
  const double k = L * (L + d - 1);
  Eigen::SparseMatrix<double> A(N - 1, N - 1);
  Vec b = Vec::Zero(N - 1);
  std::vector<Eigen::Triplet<double>> T;
  for (int i = 1; i < N; ++i) {
    const double r = rho + i * h;
    const double lo = 1 / (h * h) - d / (2 * h * r), mid = -2 / (h * h) - k / (r * r), hi = 1 / (h * h) + d / (2 * h * r);
    T.emplace_back(i - 1, i - 1, mid);
    if (i > 1) T.emplace_back(i - 1, i - 2, lo); else b(0) -= lo * c_rho;
    if (i < N - 1) T.emplace_back(i - 1, i, hi); else b(N - 2) -= hi * c_R;
  }
  A.setFromTriplets(T.begin(), T.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  const Vec c = lu.solve(b);
  std::vector<double> out(N + 1);
  out[0] = c_rho;
  out[N] = c_R;
  for (int i = 1; i < N; ++i) out[i] = c(i - 1);
  return out;
}

}  // namespace

TEST(Profile, DistanceFunctionHasFrequencyOne) {
  const auto u = distance_solution(kCfg);
  const auto P = frequency_profile(u, origin(), geometric_radii(0.1, 1.0), kCfg);
  for (double N : P.N) EXPECT_NEAR(N, 1.0, 1e-6);
  Vec c(4);
  c << 0.3, -0.2, 0, 0;
  const auto Q = frequency_profile(u, c, {0.2, 0.7}, kCfg);
  for (double N : Q.N) EXPECT_NEAR(N, 1.0, 1e-6);
  EXPECT_EQ(P.route, EnergyRoute::Bulk);
}

TEST(Profile, ClosedFormPieces) {
  // H(r) = r^{d+2} 4 pi^2/3 and D(r) = m(B_r) = r^{d+1} 4 pi^2/3 for u = |t|
  const auto u = distance_solution(kCfg);
  const auto P = frequency_profile(u, origin(), {0.5, 1.0}, kCfg);
  EXPECT_NEAR(P.H[1], 4 * kPi * kPi / 3, 1e-8);
  EXPECT_NEAR(P.D[0], std::pow(0.5, 3) * 4 * kPi * kPi / 3, 1e-8);
}

TEST(Profile, PureModeFrequency) {
  const auto u = pure_mode(kCfg, 1);
  const auto P = frequency_profile(u, origin(), geometric_radii(0.1, 1.0), kCfg);
  for (double N : P.N) EXPECT_NEAR(N, kGolden, 1e-6);
}

TEST(Profile, TwoModeCrossOracle) {
  // unit-normalized |t| and gamma_1 mode on dB_1
  const double g = kGolden;
  const double n1 = std::sqrt(norm2_t_power(1, 2 * kPi)), n2 = std::sqrt(norm2_t_power(g, 1.0));
  SolutionMix u(kCfg);
  u.add(distance_solution(kCfg), 1 / n1);
  u.add(pure_mode(kCfg, 1), 1 / n2);
  const auto P = frequency_profile(u, origin(), {1.0}, kCfg);
  EXPECT_NEAR(P.N[0], closed_form_frequency({{1.0, 1.0}, {g, 1.0}}, 1.0), 1e-3);
  EXPECT_NEAR(P.N[0], (1 + g) / 2, 1e-6);
  EXPECT_NEAR(P.H[0], 2.0, 1e-8);
}

TEST(Profile, FluxAndBulkRoutesAgree) {
  const SolutionMix u = random_mix(kCfg, 4.0, 3, 17);
  FrequencyOptions bulk, flux;
  bulk.route = EnergyRoute::Bulk;
  flux.route = EnergyRoute::Flux;
  const auto a = frequency_profile(u, origin(), {0.3, 0.8}, kCfg, bulk);
  const auto b = frequency_profile(u, origin(), {0.3, 0.8}, kCfg, flux);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(a.D[i], b.D[i], 1e-7 * std::abs(a.D[i]));
}

TEST(Profile, DegenerateSolutionThrows) {
  FunctionField zero(4, [](const Vec &) { return 0.0; });
  EXPECT_THROW(frequency_profile(zero, origin(), {0.5}, kCfg), std::runtime_error);
  EXPECT_THROW(frequency_profile(distance_solution(kCfg), origin(), {0.5, 0.4}, kCfg), std::invalid_argument);
}

TEST(Profile, ConstantBlockCoefficientsOnEllipsoids) {
  // v = u o S^{-1}, S = diag(P, q I), solves div(w calA grad v) = 0 with calA = c S S^T
  const int d = 2, m = 2;
  Mat P(2, 2);
  P << 1.3, 0.2, 0.2, 0.8;
  const double q = 0.7;
  Mat S = Mat::Zero(4, 4);
  S.topLeftCorner(2, 2) = P;
  S.bottomRightCorner(2, 2) = q * Mat::Identity(2, 2);
  const double c = std::pow(q, m - 1) / std::abs(S.determinant());
  const Mat calA = c * S * S.transpose();
  const Mat Sinv = S.inverse();
  for (const auto &name : {"nonintegral", "codim1-lift", "large-singular"}) {
    const auto u = gallery(name, kCfg);
    FunctionField v(4, [&](const Vec &Y) { return u.value(Sinv * Y); });
    Coefficients coef{[&](const Vec &) { return calA; }, std::nullopt};
    const auto prof = frequency_profile(v, origin(), {0.2, 0.5, 1.0}, kCfg, {}, &coef);
    for (double N : prof.N) EXPECT_NEAR(N, u.Lambda(), 1e-4) << name;
    EXPECT_LT(empirical_monotonicity_constant(prof), 1e-2);
  }
  (void)d;
}

TEST(Doubling, HomogeneousValues) {
  const auto u = distance_solution(kCfg);
  EXPECT_NEAR(doubling_index(u, origin(), 0.1, kCfg) / 32768.0, 1.0, 1e-2);
  Vec c(4);
  c << 0.5, -1.0, 0, 0;
  EXPECT_NEAR(doubling_index(u, c, 0.1, kCfg), doubling_index(u, origin(), 0.1, kCfg), 1e-6 * 32768);
  const auto v = pure_mode(kCfg, 1);
  EXPECT_NEAR(doubling_index(v, origin(), 0.05, kCfg) / std::pow(8.0, 2 * kGolden + 3), 1.0, 1e-6);
}

TEST(ClosedForm, Examples) {
  EXPECT_DOUBLE_EQ(closed_form_frequency({{2.5, 3.0}}, 0.3), 2.5);
  EXPECT_NEAR(closed_form_frequency({{1.0, 1.0}, {kGolden, 1.0}}, 1.0), 1.3090169943749475, 1e-15);
  EXPECT_NEAR(closed_form_frequency({{1.0, 1.0}, {kGolden, 1.0}}, 1e-8), 1.0, 1e-9);
  EXPECT_NEAR(closed_form_frequency({{1.0, 1.0}, {kGolden, 1.0}}, 1e8), kGolden, 1e-9);
  EXPECT_THROW(closed_form_frequency({{1.0, 0.0}}, 1.0), std::invalid_argument);
  EXPECT_THROW(closed_form_frequency({{1.0, -1.0}}, 1.0), std::invalid_argument);
}

TEST(Spectral, CrossLambdaOrthogonality) {
  const auto blocks = spectral_basis(kCfg, 4.0);
  // independent denser rule
  QuadratureOptions q;
  q.theta_nodes = 80;
  q.s1_nodes = 48;
  const QuadratureRule rule = SplitSphereRule(kCfg, q).scaled(origin(), 1.0);
  std::vector<Vec> vals;
  std::vector<int> owner;
  for (size_t k = 0; k < blocks.size(); ++k)
    for (const auto &f : blocks[k].basis) {
      Vec v(rule.size());
      for (int i = 0; i < rule.size(); ++i) v(i) = f.value(rule.nodes.col(i));
      vals.push_back(v);
      owner.push_back(static_cast<int>(k));
    }
  double worst_cross = 0, worst_diag = 0;
  for (size_t a = 0; a < vals.size(); ++a)
    for (size_t b = a; b < vals.size(); ++b) {
      const double g = vals[a].cwiseProduct(rule.weights).dot(vals[b]);
      if (owner[a] != owner[b]) worst_cross = std::max(worst_cross, std::abs(g));
      else worst_diag = std::max(worst_diag, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  EXPECT_LT(worst_cross, 1e-8);
  EXPECT_LT(worst_diag, 1e-8);
}

TEST(Spectral, NonIntegralHasOneCoefficient) {
  const auto u = gallery("nonintegral", kCfg);
  const auto S = spectral_decompose(u, 0.7, 4.0, kCfg);
  int nonzero = 0;
  for (const auto &a : S.coeffs)
    for (double c : a) nonzero += std::abs(c) > 1e-8 * std::sqrt(S.parseval_rhs);
  EXPECT_EQ(nonzero, 1);
  EXPECT_NEAR(S.parseval_lhs / S.parseval_rhs, 1.0, 1e-10);
}

TEST(Spectral, LinearCombinationCoefficients) {
  SolutionMix u(kCfg);
  u.add(distance_solution(kCfg), 2.0);
  u.add(pure_mode(kCfg, 1), 3.0);
  const auto S = spectral_decompose(u, 1.0, 3.0, kCfg);
  const double n1 = std::sqrt(norm2_t_power(1, 2 * kPi)), n2 = std::sqrt(norm2_t_power(kGolden, 1.0));
  double a1 = 0, a2 = 0, rest = 0;
  for (size_t k = 0; k < S.Lambdas.size(); ++k)
    for (size_t i = 0; i < S.coeffs[k].size(); ++i) {
      const double c = S.coeffs[k][i];
      if (S.Lambdas[k] == 1.0) a1 = c;
      else if (std::abs(S.Lambdas[k] - kGolden) < 1e-12 && i == 0) a2 = c;
      else rest += c * c;
    }
  EXPECT_NEAR(std::abs(a1) / (2 * n1), 1.0, 1e-6);
  EXPECT_NEAR(std::abs(a2) / (3 * n2), 1.0, 1e-6);
  EXPECT_LT(std::sqrt(rest), 1e-8);
  const auto W = S.unit_weights();
  EXPECT_NEAR(W.at(1.0), 4 * n1 * n1, 1e-6);
}

TEST(Spectral, ParsevalOnGallery) {
  for (const auto &name : {"codim1-lift", "nonintegral", "large-singular"}) {
    const auto u = gallery(name, kCfg);
    const auto S = spectral_decompose(u, 0.8, 5.0, kCfg);
    EXPECT_LT(std::abs(1 - S.parseval_lhs / S.parseval_rhs), 1e-6) << name;
    EXPECT_TRUE(S.warnings.empty());
  }
  // truncation below the homogeneity is reported
  const auto S = spectral_decompose(gallery("large-singular", kCfg), 0.8, 3.0, kCfg);
  EXPECT_FALSE(S.warnings.empty());
}

TEST(Spectral, QuadratureMatchesClosedFormOnMixes) {
  const auto blocks = spectral_basis(kCfg, 5.0);
  for (unsigned s = 0; s < 4; ++s) {
    const SolutionMix u = random_mix(kCfg, 5.0, 3, 100 + s);
    const auto S = spectral_decompose(u, 1.0, blocks, kCfg);
    const auto W = S.unit_weights();
    const auto P = frequency_profile(u, origin(), {0.2, 0.5, 1.0}, kCfg);
    for (size_t i = 0; i < P.radii.size(); ++i) {
      const double cf = closed_form_frequency(W, P.radii[i]);
      EXPECT_LT(std::abs(P.N[i] - cf) / cf, 1e-3) << s;
    }
  }
}

TEST(Annulus, ClosedFormExamples) {
  auto [a, b] = annulus_coefficients(1.0, 2, 0.5, 1.0, 0.0, 1.0);
  EXPECT_NEAR(a, 8.0 / 7.0, 1e-15);
  EXPECT_NEAR(b, -1.0 / 7.0, 1e-15);
  EXPECT_NEAR(a + b, 1.0, 1e-15);
  EXPECT_NEAR(a / 2 + 4 * b, 0.0, 1e-15);
  const double L = 2.5616, rho = 0.3, R = 1.7;
  std::tie(a, b) = annulus_coefficients(L, 2, rho, R, std::pow(rho, L), std::pow(R, L));
  EXPECT_NEAR(a, 1.0, 1e-13);
  EXPECT_NEAR(b, 0.0, 1e-13);
  EXPECT_THROW(annulus_coefficients(1.0, 2, 1.0, 0.5, 0, 1), std::invalid_argument);
}

TEST(Annulus, RandomCasesSolveTheLinearSystem) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 20; ++i) {
    const double L = 1 + 5 * U(rng), rho = 0.1 + 0.5 * U(rng), R = rho + 0.2 + U(rng);
    const int d = 1 + static_cast<int>(3 * U(rng));
    const double cr = 2 * U(rng) - 1, cR = 2 * U(rng) - 1;
    const auto [a, b] = annulus_coefficients(L, d, rho, R, cr, cR);
    Eigen::Matrix2d A;
    A << std::pow(R, L), std::pow(R, -L - d + 1), std::pow(rho, L), std::pow(rho, -L - d + 1);
    const Eigen::Vector2d x = A.fullPivLu().solve(Eigen::Vector2d(cR, cr));
    EXPECT_NEAR(a, x(0), 1e-10 * (1 + std::abs(x(0))));
    EXPECT_NEAR(b, x(1), 1e-10 * (1 + std::abs(x(1))));
  }
}

TEST(Annulus, SolverMatchesRadialFiniteDifferences) {
  const double rho = 0.5, R = 1.0;
  const auto u1 = distance_solution(kCfg);
  const auto u2 = pure_mode(kCfg, 1);
  // f_rho = 0, f_R = |t| + 0.5 gamma_1 mode
  auto fR = [&](const Vec &X) { return u1.value(X) + 0.5 * u2.value(X); };
  auto frho = [](const Vec &) { return 0.0; };
  const AnnulusSolution S = solve_annulus(frho, fR, rho, R, kCfg, 3.0);
  EXPECT_TRUE(S.warnings.empty());
  const int N = 4000;
  const auto c1 = radial_fd(1.0, 2, rho, R, 0.0, 1.0, N);
  const auto c2 = radial_fd(kGolden, 2, rho, R, 0.0, 0.5, N);
  Vec th(4);
  th << 0.3, -0.1, 0.6, 0.5;
  th.normalize();
  const double rmid = 0.75;
  const double expect = c1[N / 2] * u1.value(th) + c2[N / 2] * u2.value(th);
  EXPECT_LT(std::abs(S.value(rmid * th) - expect) / std::abs(expect), 1e-4);
  // boundary data reproduced
  EXPECT_NEAR(S.value(R * th), fR(R * th), 1e-8);
  EXPECT_NEAR(S.value(rho * th), 0.0, 1e-8);
}

TEST(Annulus, NearSingularWarning) {
  const auto u = distance_solution(kCfg);
  auto f = [&](const Vec &X) { return u.value(X); };
  const AnnulusSolution S = solve_annulus(f, f, 1.0 - 1e-10, 1.0, kCfg, 2.0);
  EXPECT_FALSE(S.warnings.empty());
}

TEST(Pinch, HomogeneousIsAlwaysPinched) {
  const auto P = frequency_profile(pure_mode(kCfg, 1), origin(), geometric_radii(0.01, 1.0), kCfg);
  for (double eps : {1e-3, 0.05})
    for (auto [a, b] : {std::pair{0.01, 0.1}, std::pair{0.5, 1.0}}) EXPECT_TRUE(pinch_detect(P, kGolden, eps, a, b).pinched);
  EXPECT_THROW(pinch_detect(P, kGolden, 0.05, 0.001, 0.1), std::invalid_argument);
}

TEST(Pinch, TwoModeDichotomyDependsOnTau) {
  const double n1 = std::sqrt(norm2_t_power(1, 2 * kPi)), n2 = std::sqrt(norm2_t_power(kGolden, 1.0));
  auto mix = [&](double tau) {
    SolutionMix u(kCfg);
    u.add(distance_solution(kCfg), 1 / n1);
    u.add(pure_mode(kCfg, 1), tau / n2);
    return u;
  };
  const auto radii = geometric_radii(0.01, 1.0);
  // tau = 1e-3: the second mode never shows at r <= 1, so both intervals are pinched
  const auto Psmall = frequency_profile(mix(1e-3), origin(), radii, kCfg);
  EXPECT_TRUE(pinch_detect(Psmall, 1.0, 0.05, 0.01, 0.1).pinched);
  EXPECT_TRUE(pinch_detect(Psmall, 1.0, 0.05, 0.5, 1.0).pinched);
  EXPECT_NEAR(Psmall.N.back(), closed_form_frequency({{1.0, 1.0}, {kGolden, 1e-6}}, 1.0), 1e-6);
  // tau = 1: pinched at small scales only
  const auto Pone = frequency_profile(mix(1.0), origin(), radii, kCfg);
  EXPECT_TRUE(pinch_detect(Pone, 1.0, 0.05, 0.01, 0.1).pinched);
  EXPECT_FALSE(pinch_detect(Pone, 1.0, 0.05, 0.5, 1.0).pinched);
}

TEST(Pinch, TransitionRadiusMatchesRoot) {
  const double n1 = std::sqrt(norm2_t_power(1, 2 * kPi)), n2 = std::sqrt(norm2_t_power(kGolden, 1.0));
  const double w1 = 1.0, w2 = 25.0;
  SolutionMix u(kCfg);
  u.add(distance_solution(kCfg), std::sqrt(w1) / n1);
  u.add(pure_mode(kCfg, 1), std::sqrt(w2) / n2);
  const auto P = frequency_profile(u, origin(), geometric_radii(0.01, 1.0, std::pow(2.0, 1.0 / 16)), kCfg);
  const auto r = crossing_radius(P, (1 + kGolden) / 2);
  ASSERT_TRUE(r.has_value());
  const double root = std::pow(w1 / w2, 1 / (2 * (kGolden - 1)));
  EXPECT_NEAR(*r / root, 1.0, 1e-3);
}

TEST(Properties, MonotonicityGrowthSandwich) {
  FrequencyOptions flux;
  flux.route = EnergyRoute::Flux;
  for (unsigned s = 0; s < 3; ++s) {
    const SolutionMix u = random_mix(kCfg, 5.0, 3, 200 + s);
    const auto radii = geometric_radii(0.05, 1.0);
    const auto P = frequency_profile(u, origin(), radii, kCfg);
    for (size_t i = 0; i + 1 < radii.size(); ++i) {
      EXPECT_GE(P.N[i + 1], P.N[i] - 1e-6) << s;
      const double lo = std::pow(radii[i + 1] / radii[i], 2 * P.N[i]);
      const double hi = std::pow(radii[i + 1] / radii[i], 2 * P.N[i + 1]);
      const double ratio = P.H[i + 1] * std::pow(radii[i + 1], -2) / (P.H[i] * std::pow(radii[i], -2));
      EXPECT_GE(ratio, lo * (1 - 1e-8));
      EXPECT_LE(ratio, hi * (1 + 1e-8));
    }
    for (double r : {0.1, 0.4, 0.9}) {
      const double h = 1e-3;
      const auto Q = frequency_profile(u, origin(), {r * (1 - h), r, r * (1 + h)}, kCfg, flux);
      const double dlog = (std::log(Q.H[2] * std::pow(Q.radii[2], -2)) - std::log(Q.H[0] * std::pow(Q.radii[0], -2))) /
                          (Q.radii[2] - Q.radii[0]);
      EXPECT_NEAR(dlog / (2 * Q.N[1] / r), 1.0, 1e-2);
    }
  }
}

TEST(Properties, BoundaryHopIsRecorded) {
  const SolutionMix u = random_mix(kCfg, 4.0, 2, 5);
  Vec X0(4);
  X0 << 0.01, 0.0, 0.004, 0.003;
  const HopReport h = boundary_hop(u, X0, 10.0, kCfg);
  EXPECT_NEAR(h.delta, 0.005, 1e-15);
  EXPECT_GT(h.N_off, 0);
  EXPECT_TRUE(std::isfinite(h.C));
  EXPECT_THROW(boundary_hop(u, X0, 2.0, kCfg), std::invalid_argument);
}

TEST(Distance, MembersAreAtDistanceZero) {
  const auto u = gallery("codim1-lift", kCfg);
  DistanceOptions o;
  o.grid_points = 2000;
  EXPECT_LT(dist_to_H_Lambda(u, origin(), 0.5, 3.0, kCfg, o), 1e-8);
  EXPECT_LT(dist_to_H_Lambda(u, origin(), 0.1, 1.0, 3.0, kCfg, o), 1e-8);
  EXPECT_THROW(dist_to_H_Lambda(u, origin(), 0.5, 2.2, kCfg, o), std::invalid_argument);
}

TEST(Distance, OtherHomogeneityIsFar) {
  DistanceOptions o;
  o.grid_points = 3000;
  const auto u = distance_solution(kCfg);
  EXPECT_GT(dist_to_H_Lambda(u, origin(), 1.0, kGolden, kCfg, o), 0.1);
  const auto v = pure_mode(kCfg, 1);
  EXPECT_GT(dist_to_H_Lambda(v, origin(), 1.0, 1.0, kCfg, o), 0.1);
}

TEST(Distance, SmallPerturbation) {
  DistanceOptions o;
  o.grid_points = 3000;
  SolutionMix u(kCfg);
  u.add(gallery("codim1-lift", kCfg), 1.0);
  u.add(pure_mode(kCfg, 1), 0.01);
  const double dist = dist_to_H_Lambda(u, origin(), 1.0, 3.0, kCfg, o);
  EXPECT_GT(dist, 0.0);
  EXPECT_LT(dist, 0.05);
}
