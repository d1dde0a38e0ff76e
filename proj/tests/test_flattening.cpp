#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cofreq/flattening.hpp"

using namespace cofreq;
constexpr double kPi = std::numbers::pi;

namespace {

const AmbientConfig kCfg(4, 2);

Vec v4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

Vec random_point(int n, double radius, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

// Gram-Schmidt basis as the Q of a QR factorization with positive diagonal
Mat gs_oracle(const Mat &M) {
  Eigen::HouseholderQR<Mat> qr(M);
  Mat Q = qr.householderQ() * Mat::Identity(M.rows(), M.cols());
  const Mat R = qr.matrixQR().topRows(M.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < M.cols(); ++j)
    if (R(j, j) < 0) Q.col(j) *= -1;
  return Q;
}

Mat small_L() {
  Mat L(2, 2);
  L << 0.02, -0.015, 0.01, 0.03;
  return L;
}

}  // namespace

TEST(CBeta, ClosedFormValues) {
  EXPECT_NEAR(c_beta(1, 2.0), 2.0, 1e-14);
  EXPECT_NEAR(c_beta(2, 2.0), kPi, 1e-14);
  EXPECT_THROW(c_beta(2, 0.0), std::invalid_argument);
}

TEST(CBeta, QuadratureMatchesClosedForm) {
  for (int d = 1; d <= 3; ++d)
    for (double beta : {1.5, 2.0, 3.0}) {
      const double c = c_beta(d, beta);
      EXPECT_LT(std::abs(c_beta_quadrature(d, beta) - c) / c, 1e-6) << d << " " << beta;
    }
  EXPECT_NEAR(c_beta_quadrature(1, 2.0), 2.0, 1e-10);
}

TEST(DBeta, FlatPlaneIsScaledDistance) {
  std::mt19937_64 rng(1);
  for (auto cfg : {AmbientConfig(4, 2), AmbientConfig(3, 1), AmbientConfig(5, 3)}) {
    const GraphDomain G = GraphDomain::flat(cfg);
    for (double beta : {1.5, 2.0, 3.0}) {
      for (int k = 0; k < 5; ++k) {
        Vec X = random_point(cfg.n, 1.0, rng);
        const double delta = X.tail(cfg.m()).norm();
        const double want = std::pow(c_beta(cfg.d, beta), -1.0 / beta) * delta;
        EXPECT_LT(std::abs(D_beta(X, G, beta) - want) / want, 1e-8) << cfg.n << cfg.d << " " << beta;
      }
    }
  }
}

TEST(DBeta, TiltedPlaneIsometry) {
  std::mt19937_64 rng(2);
  Mat L(2, 2);
  L << 0.4, -0.3, 0.2, 0.5;
  const GraphDomain G = GraphDomain::linear(kCfg, L);
  // orthonormal normal frame of the plane
  Mat Wh(4, 2);
  Wh.topRows(2) = -L.transpose();
  Wh.bottomRows(2).setIdentity();
  const Mat W = gs_oracle(Wh);
  for (double beta : {1.5, 2.0, 3.0})
    for (int k = 0; k < 5; ++k) {
      const Vec X = random_point(4, 1.0, rng);
      const double dist = (W.transpose() * X).norm();
      const double want = std::pow(c_beta(2, beta), -1.0 / beta) * dist;
      EXPECT_LT(std::abs(D_beta(X, G, beta) - want) / want, 1e-6);
    }
}

TEST(DBeta, ErrorsAndComparability) {
  const GraphDomain G = GraphDomain::paraboloid(kCfg, 0.5);
  EXPECT_THROW(D_beta(G.point(Vec::Constant(2, 0.1)), G, 2.0), std::domain_error);
  EXPECT_THROW(D_beta(v4(0, 0, 1, 0), G, 1.0), std::invalid_argument);
  std::mt19937_64 rng(3);
  double lo = INFINITY, hi = 0;
  for (int k = 0; k < 30; ++k) {
    const Vec X = random_point(4, 0.5, rng);
    const double r = D_beta(X, G, 2.0) / G.distance(X);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const double flat = std::pow(kPi, -0.5);
  EXPECT_GT(lo, 0.8 * flat);
  EXPECT_LT(hi, 1.25 * flat);
}

TEST(DBeta, RatioToDistanceHasBoundedGradient) {
  const GraphDomain G = GraphDomain::paraboloid(kCfg, 1.0);
  std::mt19937_64 rng(4);
  for (double beta : {1.5, 2.0, 3.0}) {
    double worst = 0;
    for (double delta : {1e-3, 1e-2, 1e-1}) {
      for (int k = 0; k < 4; ++k) {
        Vec x = random_point(2, 0.2, rng);
        Vec t = random_point(2, 1.0, rng).normalized() * delta;
        Vec X(4);
        X << x, t;
        X.tail(2) += G.phi(x);
        auto q = [&](const Vec &Y) { return D_beta(Y, G, beta) / G.distance(Y); };
        const double step = delta / 20;
        double g2 = 0;
        for (int j = 0; j < 4; ++j) {
          Vec Xp = X, Xm = X;
          Xp(j) += step;
          Xm(j) -= step;
          g2 += std::pow((q(Xp) - q(Xm)) / (2 * step), 2);
        }
        worst = std::max(worst, std::sqrt(g2));
      }
    }
    EXPECT_LT(worst, 5.0) << beta;
  }
}

TEST(Graph, FamiliesAndLipschitzBounds) {
  const GraphDomain P = GraphDomain::paraboloid(kCfg, 0.3);
  EXPECT_NEAR(P.sampled_lipschitz(0.5), 0.3, 1e-9);
  const GraphDomain T = GraphDomain::trig_bump(kCfg, 0.02, 3.0);
  EXPECT_LE(T.sampled_lipschitz(1.0), T.C2);
  // derivative oracles against central differences
  const Vec x = Vec::Constant(2, 0.13);
  for (const GraphDomain *G : {&P, &T}) {
    const Mat D = G->dphi(x);
    const auto H = G->d2phi(x);
    for (int i = 0; i < 2; ++i) {
      const Vec e = 1e-5 * Vec::Unit(2, i);
      EXPECT_LT((D.col(i) - (G->phi(x + e) - G->phi(x - e)) / 2e-5).norm(), 1e-8);
      for (int j = 0; j < 2; ++j) {
        const Vec col = (G->dphi(x + e) - G->dphi(x - e)).row(j).transpose() / 2e-5;
        EXPECT_LT((H[j].col(i) - col).norm(), 1e-7);
      }
    }
  }
}

TEST(Flattening, FlatCaseClosedForm) {
  const FlatteningMap map = build_flattening(GraphDomain::flat(kCfg));
  const double h0 = std::sqrt(kPi);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vec X = random_point(4, 0.1, rng);
    Vec want = X;
    want.tail(2) *= h0;
    EXPECT_LT((map.rho(X) - want).norm(), 1e-12);
    const double r = X.tail(2).norm();
    EXPECT_NEAR(map.lambda(X.head(2), r), 1.0, 1e-13);
    EXPECT_NEAR(map.h(X.head(2), r), h0, 1e-13);
    EXPECT_LT((map.frame(X.head(2), r) - Mat::Identity(4, 4)).norm(), 1e-15);
  }
}

TEST(Flattening, FlatConjugatedMatrixIsConstantBlock) {
  for (double beta : {1.5, 2.0, 3.0}) {
    FlatteningOptions o;
    o.beta = beta;
    const FlatteningMap map = build_flattening(GraphDomain::flat(kCfg), o);
    const double c = c_beta(2, beta);
    Mat want = Mat::Zero(4, 4);
    want.diagonal() << 1, 1, std::pow(c, -2 / beta), std::pow(c, -2 / beta);
    want *= std::pow(c, 2 / beta);
    std::mt19937_64 rng(6);
    for (int k = 0; k < 5; ++k) {
      const Vec X = random_point(4, 0.1, rng);
      const Mat A = conjugated_matrix(map, X);
      EXPECT_LT((A - want).norm(), 1e-10);
      EXPECT_LT((A - A.transpose()).norm(), 1e-12);
    }
  }
}

TEST(Flattening, LinearCaseClosedForm) {
  const Mat L = small_L();
  const FlatteningMap map = build_flattening(GraphDomain::linear(kCfg, L));
  const double h0 = std::sqrt(kPi);
  Mat Vh(4, 2), Wh(4, 2);
  Vh.topRows(2).setIdentity();
  Vh.bottomRows(2) = L;
  Wh.topRows(2) = -L.transpose();
  Wh.bottomRows(2).setIdentity();
  const Mat W = gs_oracle(Wh);
  Mat Jac(4, 4);
  Jac << Vh, h0 * W;
  const Mat Jinv = Jac.inverse();
  const Mat want = std::abs(Jac.determinant()) * Jinv * Jinv.transpose();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10; ++k) {
    const Vec X = random_point(4, 0.1, rng);
    const Vec x = X.head(2), t = X.tail(2);
    Vec rho(4);
    rho << x, L * x;
    rho += h0 * W * t;
    EXPECT_LT((map.rho(X) - rho).norm(), 1e-12);
    EXPECT_LT((map.frame(x, t.norm()).rightCols(2) - W).norm(), 1e-13);
    EXPECT_LT((conjugated_matrix(map, X) - want).norm(), 1e-10);
  }
}

TEST(Flattening, FiniteDifferenceJacobianMatchesAnalytic) {
  FlatteningOptions o;
  const GraphDomain G = GraphDomain::linear(kCfg, small_L());
  const FlatteningMap exact = build_flattening(G, o);
  o.jacobian = JacobianMode::FiniteDifference;
  const FlatteningMap fd = build_flattening(G, o);
  const Vec X = v4(0.03, -0.02, 0.05, 0.04);
  EXPECT_LT((exact.jacobian(X) - fd.jacobian(X)).norm(), 1e-8);
  o.jacobian = JacobianMode::Analytic;
  EXPECT_THROW(build_flattening(GraphDomain::paraboloid(kCfg, 0.05, 0.4), o).jacobian(X), std::invalid_argument);
}

TEST(Flattening, ConjugationOrientation) {
  // v = u o rho with u(Y) = Y^T Q Y harmonic: the conjugated operator must annihilate v
  const FlatteningMap map = build_flattening(GraphDomain::linear(kCfg, small_L()));
  const Vec X = v4(0.01, 0.02, 0.03, -0.04);
  const Mat J = map.jacobian(X), A = conjugated_matrix(map, X);
  Mat Q(4, 4);
  Q << 1, 0.3, 0, 0.2, 0.3, -2, 0.1, 0, 0, 0.1, 0.5, 0.4, 0.2, 0, 0.4, 0.5;
  const Mat hess_v = 2 * J.transpose() * Q * J;
  EXPECT_LT(std::abs((A * hess_v).trace()), 1e-12);
  const Mat Jinv = J.inverse();
  EXPECT_GT(std::abs((Jinv.transpose() * Jinv * hess_v).trace()), 1e-4);
}

TEST(Flattening, BoundaryIsGraphExactly) {
  std::mt19937_64 rng(8);
  for (const GraphDomain &G : {GraphDomain::flat(kCfg), GraphDomain::linear(kCfg, small_L()),
                               GraphDomain::paraboloid(kCfg, 0.05, 0.4), GraphDomain::trig_bump(kCfg, 0.01, 2.0, 0.4)}) {
    const FlatteningMap map = build_flattening(G);
    for (int k = 0; k < 100; ++k) {
      Vec X = Vec::Zero(4);
      X.head(2) = random_point(2, 0.3, rng);
      EXPECT_EQ(map.rho(X), G.point(X.head(2))) << G.family;
    }
  }
}

TEST(Flattening, EpsilonViolationThrows) {
  EXPECT_THROW(build_flattening(GraphDomain::paraboloid(kCfg, 1.0, 0.4)), std::invalid_argument);
  Mat L = Mat::Constant(2, 2, 0.2);
  EXPECT_THROW(build_flattening(GraphDomain::linear(kCfg, L)), std::invalid_argument);
  const FlatteningMap map = build_flattening(GraphDomain::paraboloid(kCfg, 0.05, 0.4));
  EXPECT_NEAR(map.achieved_epsilon(), 0.04, 2e-3);
  EXPECT_NEAR(map.suggested_window(), 0.01, 1e-12);
}

TEST(Flattening, LinearBiLipschitz) {
  const Mat L = small_L();
  const FlatteningMap map = build_flattening(GraphDomain::linear(kCfg, L));
  const BiLipschitzReport b = bilipschitz_ratio(map, 60, 0.1);
  const double s = Eigen::JacobiSVD<Mat>(L).singularValues()(0);
  EXPECT_GE(b.lower, 1.0 - 1e-12);
  EXPECT_LE(b.upper, std::sqrt(1 + s * s) + 1e-12);
  EXPECT_GT(b.upper, 1.0);
  EXPECT_LE(b.raw_upper, std::sqrt(kPi) * (1 + s * s));
}

TEST(Flattening, ParaboloidProperties) {
  const FlatteningMap map = build_flattening(GraphDomain::paraboloid(kCfg, 0.05, 0.4));
  const double eps = map.achieved_epsilon();
  const BiLipschitzReport b = bilipschitz_ratio(map, 120, 0.1);
  EXPECT_GT(b.lower, 1 - 10 * eps);
  EXPECT_LT(b.upper, 1 + 10 * eps);
  EXPECT_LT(std::max(b.raw_upper, 1 / b.raw_lower), 2.0);

  std::mt19937_64 rng(9);
  double lo = INFINITY, hi = 0;
  for (int k = 0; k < 30; ++k) {
    const Vec X = random_point(4, 0.1, rng);
    const Vec x = X.head(2);
    const double r = X.tail(2).norm();
    const Mat R = map.frame(x, r);
    EXPECT_LT((R.transpose() * R - Mat::Identity(4, 4)).norm(), 1e-10);
    const double ratio = r / D_beta(map.rho(X), map.domain(), 2.0);
    EXPECT_GT(ratio, 0.5);
    EXPECT_LT(ratio, 2.0);
    const Mat A = conjugated_matrix(map, X);
    const Eigen::SelfAdjointEigenSolver<Mat> es(A);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  const double lam = std::min(lo, 1 / hi);
  EXPECT_GT(lam, 0.25);  // flat value 1 / pi
}

TEST(C01, ConstantFieldIsExact) {
  Mat A0 = Mat::Zero(4, 4);
  A0.diagonal() << 1, 1.5, 2, 2;
  const C01Report rep = check_C01([&](const Vec &) { return A0; }, kCfg);
  EXPECT_TRUE(rep.exact);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.C, 0.0);
  EXPECT_EQ(rep.grad_sup, 0.0);
  EXPECT_NEAR(rep.ellipticity, 0.5, 1e-15);
  // a constant field without the scalar normal block violates the condition at every scale
  A0(2, 2) = 3;
  const C01Report split = check_C01([&](const Vec &) { return A0; }, kCfg);
  EXPECT_FALSE(split.pass);
  EXPECT_NEAR(split.slope, 0.0, 1e-9);
}

TEST(C01, LipschitzBlockFieldPassesAndRootDefectFails) {
  // x-dependent blocks plus a linear-in-|t| perturbation, then the same with |t|^{1/2}
  auto base = [](const Vec &X) {
    Mat A = Mat::Identity(4, 4);
    A(0, 0) += 0.3 * X(0);
    A(1, 1) += 0.2 * X(1);
    const double r = X.tail(2).norm();
    A(0, 2) = A(2, 0) = 0.5 * r;
    A(3, 3) += 0.4 * r;
    return A;
  };
  Mat E = Mat::Zero(4, 4);
  E(1, 3) = E(3, 1) = 1.0;
  const C01Report good = check_C01(base, kCfg);
  EXPECT_TRUE(good.pass);
  EXPECT_NEAR(good.slope, 1.0, 0.05);
  EXPECT_LT(good.C_variation, 2.0);
  const C01Report bad = check_C01([&](const Vec &X) { return Mat(base(X) + std::sqrt(X.tail(2).norm()) * E); }, kCfg);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.slope, 0.5, 0.1);
}

TEST(C01, ParaboloidFlatteningPasses) {
  const FlatteningMap map = build_flattening(GraphDomain::paraboloid(kCfg, 0.05, 0.4));
  C01Options o;
  o.points_per_shell = 8;
  const MatrixField A = [&](const Vec &X) { return conjugated_matrix(map, X); };
  const C01Report rep = check_C01(A, kCfg, o);
  EXPECT_TRUE(rep.pass) << rep.slope;
  EXPECT_LT(rep.C_variation, 2.0);
  EXPECT_TRUE(std::isfinite(rep.grad_sup));
  EXPECT_GT(rep.ellipticity, 0.25);
  for (size_t i = 0; i < rep.trace_J.size(); ++i) {
    EXPECT_EQ(rep.trace_J[i].rows(), 2);
    EXPECT_GT(rep.trace_h[i], 0);
  }
  Mat E = Mat::Identity(4, 4);
  const C01Report bad = check_C01([&](const Vec &X) { return Mat(A(X) + std::sqrt(X.tail(2).norm()) * E); }, kCfg, o);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.slope, 0.5, 0.1);
}
