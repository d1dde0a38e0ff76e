#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cofreq/homogeneous.hpp"

using namespace cofreq;
constexpr double kPi = std::numbers::pi;
const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

namespace {

// Uniform point in B_1 with delta > dmin.
Vec sample_ball(int n, int d, double dmin, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (;;) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(rng);
    v *= std::pow(ud(rng), 1.0 / n) / v.norm();
    if (v.tail(n - d).norm() > dmin) return v;
  }
}

double max_residual(const HomogeneousSolution &u, int npts, unsigned seed) {
  const AmbientConfig &cfg = u.config();
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int i = 0; i < npts; ++i) {
    const Vec X = sample_ball(cfg.n, cfg.d, 0.05, rng);
    worst = std::max(worst, std::abs(pde_residual(u, X, cfg)));
  }
  return worst;
}

}  // namespace

TEST(FrequencySet, CodimTwoExample) {
  const FrequencySet F = frequency_set(AmbientConfig(4, 2), 2.7);
  const std::vector<double> expect = {1.0, kGolden, 2.0, (1.0 + std::sqrt(17.0)) / 2.0, 1.0 + kGolden};
  ASSERT_EQ(F.entries.size(), expect.size());
  for (size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(F.entries[i].Lambda, expect[i], 1e-12);
}

TEST(FrequencySet, FirstTwoEntries) {
  for (int n = 3; n <= 6; ++n)
    for (int d = 1; d <= n - 2; ++d) {
      const FrequencySet F = frequency_set(AmbientConfig(n, d));
      ASSERT_GE(F.entries.size(), 2u);
      EXPECT_EQ(F.entries[0].Lambda, 1.0);
      EXPECT_GT(F.entries[1].Lambda, 1.5);
      for (size_t i = 1; i < F.entries.size(); ++i) EXPECT_GT(F.entries[i].Lambda, F.entries[i - 1].Lambda);
      EXPECT_LE(F.entries.back().Lambda, 8.0 + 1e-12);
    }
}

TEST(FrequencySet, CodimTenIntegerCoincidences) {
  const AmbientConfig cfg(11, 1);
  const FrequencySet F = frequency_set(cfg, 17.0);
  EXPECT_DOUBLE_EQ(gamma_j(2, 10), 5.0);
  EXPECT_DOUBLE_EQ(gamma_j(12, 10), 16.0);
  for (double L : {5.0, 16.0, 17.0}) {
    const FrequencyEntry *e = F.find(L);
    ASSERT_NE(e, nullptr) << L;
    EXPECT_TRUE(e->is_integer());
  }
  const FrequencyEntry *e17 = F.find(17.0);
  bool has2 = false, has12 = false;
  for (const auto &w : e17->witnesses) {
    has2 |= !w.integer && w.j == 2 && w.k == 12;
    has12 |= !w.integer && w.j == 12 && w.k == 1;
  }
  EXPECT_TRUE(has2);
  EXPECT_TRUE(has12);
}

TEST(FrequencySet, WitnessesHoldToMachinePrecision) {
  for (int n = 3; n <= 6; ++n)
    for (int d = 1; d <= n - 2; ++d) {
      const AmbientConfig cfg(n, d);
      for (const auto &e : frequency_set(cfg).entries)
        for (const auto &w : e.witnesses) {
          if (w.integer) {
            EXPECT_EQ(e.Lambda, std::round(e.Lambda));
            continue;
          }
          const double lam = static_cast<double>(eigenvalue(w.j, cfg.m()));
          EXPECT_NEAR((e.Lambda - w.k) * (e.Lambda - w.k - 1), lam, 1e-12 * (1 + lam));
        }
    }
  EXPECT_THROW(frequency_set(AmbientConfig(4, 2), 0.5), std::invalid_argument);
}

TEST(FrequencySet, ModeCutoff) {
  // lambda_N > Lambda^2 with m = 2: N^2 > 4 at Lambda = 2 gives N = 3
  EXPECT_EQ(mode_cutoff(2.0, 2), 3);
  EXPECT_EQ(mode_cutoff(1.0, 3), 1);
}

TEST(BuildMode, SingleTermGammaOne) {
  const AmbientConfig cfg(4, 2);
  const Mode md = build_mode(kGolden, 1, Polynomial::constant(2, 1.0), cfg, 0);
  ASSERT_EQ(md.coeffs.size(), 1u);
  EXPECT_EQ(md.k_top, 0);
  HomogeneousSolution u(cfg, kGolden);
  u.add_mode(md);
  Vec X(4);
  X << 0.3, -0.2, 0.6, 0.8;  // |t| = 1, cos = 0.6
  EXPECT_NEAR(u.value(X), 0.6 / std::sqrt(kPi), 1e-14);
  X.tail(2) *= 0.5;
  EXPECT_NEAR(u.value(X), std::pow(0.5, kGolden) * 0.6 / std::sqrt(kPi), 1e-14);
}

TEST(BuildMode, DistanceProfile) {
  const AmbientConfig cfg(4, 2);
  const HomogeneousSolution u = distance_solution(cfg);
  Vec X(4);
  X << 0.7, -1.1, 0.3, 0.4;
  EXPECT_NEAR(u.value(X), 0.5, 1e-15);
  Vec g = u.gradient(X), ge(4);
  ge << 0, 0, 0.6, 0.8;
  EXPECT_LT((g - ge).norm(), 1e-14);
  EXPECT_LT(max_residual(u, 200, 1), 1e-12);
}

TEST(BuildMode, TwoTermChain) {
  const AmbientConfig cfg(4, 2);
  const double L = kGolden + 2.0;
  Exponent e = {2, 0};
  const Mode md = build_mode(L, 1, Polynomial::monomial(e), cfg, 0);
  ASSERT_EQ(md.coeffs.size(), 2u);
  EXPECT_EQ(md.coeffs[0].first, 2);
  EXPECT_EQ(md.coeffs[1].first, 0);
  // b_0 = -Delta(x1^2) / (L (L - 1) - lambda_1)
  const double div = L * (L - 1) - 1.0;
  EXPECT_NEAR(md.coeffs[1].second.coefficient({0, 0}), -2.0 / div, 1e-14);
  HomogeneousSolution u(cfg, L);
  u.add_mode(md);
  EXPECT_LT(max_residual(u, 100, 2), 1e-10);
}

TEST(BuildMode, OddGapAndDegrees) {
  const AmbientConfig cfg(5, 2);
  const FrequencySet F = frequency_set(cfg, 6.0);
  for (const auto &e : F.entries)
    for (const Mode &md : homogeneous_space_modes(cfg, e)) {
      for (size_t i = 0; i < md.coeffs.size(); ++i) {
        EXPECT_EQ(md.coeffs[i].first, md.k_top - 2 * static_cast<int>(i));
        EXPECT_TRUE(md.coeffs[i].second.is_homogeneous());
        EXPECT_EQ(md.coeffs[i].second.degree(), md.coeffs[i].first);
      }
      if (md.j > 0) EXPECT_GE(md.lowest_r_power(), kGolden - 1e-12);
      if (md.j > 0 && std::abs(e.Lambda - std::round(e.Lambda)) < 1e-12) EXPECT_GE(md.lowest_r_power(), 2.0 - 1e-12);
    }
}

TEST(BuildMode, Errors) {
  const AmbientConfig cfg(4, 2);
  try {
    build_mode(2.0, 1, Polynomial::constant(2, 1.0), cfg, 0);
    FAIL() << "expected witness failure";
  } catch (const std::invalid_argument &ex) {
    EXPECT_NE(std::string(ex.what()).find("k=0, j=1"), std::string::npos) << ex.what();
  }
  EXPECT_THROW(build_mode(2.0, 0, Polynomial::constant(2, 1.0), cfg), std::invalid_argument);
  EXPECT_THROW(build_mode(kGolden, 1, Polynomial::constant(3, 1.0), cfg, 0), std::invalid_argument);
  EXPECT_THROW(build_mode(kGolden, 1, Polynomial::constant(2, 1.0), cfg, 7), std::invalid_argument);
  // negative root: (L - k)(L - k - 1) = lambda_1 with L - k = 1 - gamma_1 < 0.5
  EXPECT_THROW(build_mode(3.0 - kGolden, 1, Polynomial::variable(2, 0) * Polynomial::variable(2, 1), cfg, 0),
               std::invalid_argument);
}

TEST(BuildMode, ParityAssertion) {
  // m = 4 has m - 2 even; force an odd-j mode into an integer-homogeneity solution
  const AmbientConfig cfg(6, 2);
  const double g = gamma_j(1, 4);
  const Mode md = build_mode(g, 1, Polynomial::constant(2, 1.0), cfg, 0);
  HomogeneousSolution u(cfg, g);
  EXPECT_NO_THROW(u.add_mode(md));
  Mode bad = md;
  bad.Lambda = 3.0;
  HomogeneousSolution v(cfg, 3.0);
  EXPECT_THROW(v.add_mode(bad), std::logic_error);
}

TEST(Gallery, LargeSingular) {
  const AmbientConfig cfg(4, 2);
  const HomogeneousSolution u = gallery("large-singular", cfg);
  EXPECT_EQ(u.Lambda(), 4.0);
  Vec X(4);
  X << 0.5, -0.7, 0.3, 0.4;
  const double x = 0.5, y = -0.7;
  EXPECT_NEAR(u.value(X), 0.5 * (x * x * x - 3 * x * y * y), 1e-14);
  // the cubic z(xy^2 - yx^2) is not harmonic, so its lift is not a solution
  FunctionField lit(4, [](const Vec &Z) { return Z.tail(2).norm() * (Z(0) * Z(1) * Z(1) - Z(1) * Z(0) * Z(0)); });
  EXPECT_GT(std::abs(pde_residual(lit, X, cfg)), 1e-2);
  EXPECT_LT(std::abs(pde_residual(u, X, cfg)), 1e-12);
  EXPECT_THROW(gallery("large-singular", AmbientConfig(5, 3)), std::invalid_argument);
}

TEST(Gallery, NonIntegral) {
  const AmbientConfig cfg(4, 2);
  const HomogeneousSolution u = gallery("nonintegral", cfg);
  EXPECT_NEAR(u.Lambda(), 1.0 + kGolden, 1e-14);
  Vec X(4);
  X << 1.0, 0.0, 1.0, 0.0;
  EXPECT_NEAR(u.value(X), 1.0 / std::sqrt(kPi), 1e-14);
  X << 0.4, 0.9, 0.0, 0.5;
  EXPECT_NEAR(u.value(X), 0.0, 1e-15);  // cos = 0
}

TEST(Gallery, CodimOneLift) {
  const AmbientConfig cfg(5, 2);
  const HomogeneousSolution u = gallery("codim1-lift", cfg);
  EXPECT_EQ(u.Lambda(), 3.0);
  Vec X(5);
  X << 0.4, 0.1, 0.2, -0.2, 0.1;
  const double r = X.tail(3).norm();
  EXPECT_NEAR(u.value(X), 3 * 0.16 * r - r * r * r, 1e-14);
}

TEST(Gallery, MixedParity) {
  const HomogeneousSolution u = gallery("mixed-parity", AmbientConfig(4, 2));
  EXPECT_EQ(u.config().n, 11);
  EXPECT_EQ(u.config().d, 1);
  EXPECT_EQ(u.Lambda(), 17.0);
  ASSERT_EQ(u.modes().size(), 2u);
  std::mt19937_64 rng(3);
  // both harmonics are even in t, the seeds have opposite parity in x
  int neither = 0;
  for (int i = 0; i < 20; ++i) {
    const Vec X = sample_ball(11, 1, 0.2, rng);
    Vec Xt = X;
    Xt.tail(10) *= -1;
    const double a = u.value(X), b = u.value(-X);
    EXPECT_NEAR(u.value(Xt), a, 1e-12 * (1 + std::abs(a)));
    if (std::abs(a - b) > 1e-8 * std::abs(a) && std::abs(a + b) > 1e-8 * std::abs(a)) ++neither;
  }
  EXPECT_EQ(neither, 20);
  EXPECT_THROW(gallery("nope", AmbientConfig(4, 2)), std::invalid_argument);
}

TEST(Gallery, ResidualVanishes) {
  const AmbientConfig cfg(4, 2);
  for (const auto &name : gallery_names()) {
    const HomogeneousSolution u = gallery(name, cfg);
    EXPECT_LT(max_residual(u, 1000, 7), 1e-8) << name;
  }
  for (int n = 3; n <= 6; ++n)
    for (int d = 1; d <= n - 2; ++d) {
      const AmbientConfig c(n, d);
      EXPECT_LT(max_residual(gallery("codim1-lift", c), 200, 8), 1e-8);
      EXPECT_LT(max_residual(gallery("nonintegral", c), 200, 9), 1e-8);
    }
}

TEST(Evaluate, GradientMatchesFiniteDifferences) {
  const AmbientConfig cfg(4, 2);
  std::mt19937_64 rng(4);
  for (const auto &name : gallery_names()) {
    const HomogeneousSolution u = gallery(name, cfg);
    const int n = u.config().n;
    for (int i = 0; i < 50; ++i) {
      const Vec X = sample_ball(n, u.config().d, 0.05, rng);
      const Vec g = u.gradient(X);
      Vec fd(n);
      for (int k = 0; k < n; ++k) {
        Vec p = X, q = X;
        p(k) += 1e-5;
        q(k) -= 1e-5;
        fd(k) = (u.value(p) - u.value(q)) / 2e-5;
      }
      EXPECT_LT((g - fd).norm(), 1e-6 * std::max(g.norm(), 1e-3)) << name;
    }
  }
}

TEST(Evaluate, GradientAtBoundaryWithFractionalPower) {
  const AmbientConfig cfg(4, 2);
  const HomogeneousSolution u = gallery("nonintegral", cfg);
  Vec X(4);
  X << 0.3, 0.2, 0.0, 0.0;
  EXPECT_EQ(u.value(X), 0.0);
  EXPECT_THROW(u.gradient(X), SingularPointError);
  const HomogeneousSolution v = gallery("codim1-lift", AmbientConfig(4, 2));
  EXPECT_THROW(v.gradient(X), SingularPointError);  // |t| itself is not differentiable there
}

TEST(Properties, Homogeneity) {
  std::mt19937_64 rng(5);
  for (int n = 3; n <= 6; ++n)
    for (int d = 1; d <= n - 2; ++d) {
      const AmbientConfig cfg(n, d);
      for (unsigned s = 0; s < 4; ++s) {
        const HomogeneousSolution u = random_solution(cfg, 6.0, 100 * n + 10 * d + s);
        for (int i = 0; i < 25; ++i) {
          const Vec X = sample_ball(n, d, 0.05, rng);
          const double v = u.value(X);
          for (double lam : {0.5, 2.0})
            EXPECT_NEAR(u.value(lam * X), std::pow(lam, u.Lambda()) * v, 1e-12 * std::pow(lam, u.Lambda()) * (std::abs(v) + 1e-3));
        }
      }
    }
}

TEST(Properties, BoundaryDecay) {
  // |u| <= C delta near R^d: fit C from shrinking delta at fixed x
  const AmbientConfig cfg(4, 2);
  std::mt19937_64 rng(6);
  for (const auto &name : {"codim1-lift", "nonintegral", "large-singular"}) {
    const HomogeneousSolution u = gallery(name, cfg);
    double C = 0;
    for (int i = 0; i < 200; ++i) {
      Vec X = sample_ball(4, 2, 0.0, rng);
      const double dl = 0.1 * std::uniform_real_distribution<double>(1e-4, 1.0)(rng);
      X.tail(2) *= dl / X.tail(2).norm();
      C = std::max(C, std::abs(u.value(X)) / dl);
    }
    EXPECT_LT(C, 10.0) << name;
  }
}

TEST(Properties, RandomSolutionsSolve) {
  for (int n = 3; n <= 6; ++n)
    for (int d = 1; d <= n - 2; ++d)
      for (unsigned s = 0; s < 3; ++s) {
        const HomogeneousSolution u = random_solution(AmbientConfig(n, d), 6.0, 7 + s);
        // residual relative to the Hessian scale
        EXPECT_LT(max_residual(u, 100, s), 1e-8 * (1 + u.terms().terms().size())) << n << d << s;
      }
}

TEST(Properties, ParityWhenCodimMinusTwoEven) {
  for (int n = 5; n <= 6; ++n) {
    const AmbientConfig cfg(n, n - 4);  // m = 4
    for (const auto &e : frequency_set(cfg).entries) {
      if (!e.is_integer()) continue;
      for (const Mode &md : homogeneous_space_modes(cfg, e)) EXPECT_EQ(md.j % 2, 0);
    }
  }
}

TEST(Serialization, JsonRoundTrip) {
  const AmbientConfig cfg(4, 2);
  std::mt19937_64 rng(9);
  for (const auto &name : gallery_names()) {
    const HomogeneousSolution u = gallery(name, cfg);
    const HomogeneousSolution v = solution_from_json(nlohmann::json::parse(to_json(u).dump()));
    EXPECT_EQ(v.Lambda(), u.Lambda());
    for (int i = 0; i < 10; ++i) {
      const Vec X = sample_ball(u.config().n, u.config().d, 0.05, rng);
      EXPECT_NEAR(v.value(X), u.value(X), 1e-14 * (1 + std::abs(u.value(X))));
    }
  }
  nlohmann::json j = to_json(gallery("nonintegral", cfg));
  j["modes"][0]["Lambda"] = 2.5;
  EXPECT_THROW(solution_from_json(j), std::invalid_argument);
  const nlohmann::json F = to_json(frequency_set(cfg, 2.7));
  EXPECT_EQ(F["entries"].size(), 5u);
  EXPECT_EQ(F["entries"][0]["witnesses"][0], "integer");
}
