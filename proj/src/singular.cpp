#include "cofreq/singular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <boost/iterator/function_output_iterator.hpp>
#include <tbb/parallel_for.h>

#include "cofreq/frequency.hpp"

namespace cofreq {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

bool lex_less(const Vec &a, const Vec &b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

using Key = std::vector<long>;

// All k in [lo, hi]^dim.
std::vector<Key> box_keys(int dim, long lo, long hi) {
  std::vector<Key> out;
  Key k(dim, lo);
  while (true) {
    out.push_back(k);
    int i = 0;
    while (i < dim && ++k[i] > hi) k[i++] = lo;
    if (i == dim) break;
  }
  return out;
}

Vec cell_center(const Vec &c, double h, const Key &k) {
  Vec Z = c;
  for (size_t i = 0; i < k.size(); ++i) Z(i) += h * (static_cast<double>(k[i]) + 0.5);
  return Z;
}

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;

struct Projection {
  Vec Z, Y;
  double last_step = 0.0;
  bool ok = true;

  double moved() const { return (Y - Z).norm(); }
  /// Distance to the limit assuming at least linear convergence with ratio 1/2.
  double predicted() const { return moved() + last_step; }
};

// Gauss-Newton on F(Y) = (u / h, grad u) with a truncated pseudo-inverse; steps capped at h.
// Stops early once the iterate has left the ball of radius `limit` around Z or the step is below tol.
void project(Projection &p, const Field &u, double h, int iters, double tol, double limit, double cutoff,
             const AmbientConfig &cfg) {
  const int n = cfg.n;
  SmallMat J(n + 1, n);
  Vec F(n + 1);
  try {
    for (int it = 0; it < iters && p.ok; ++it) {
      double v;
      Vec g;
      u.value_gradient(p.Y, v, g);
      F(0) = v / h;
      F.tail(n) = g;
      J.row(0) = g.transpose() / h;
      J.bottomRows(n) = u.hessian(p.Y);
      const SmallMat JtJ = J.transpose() * J;
      const Eigen::SelfAdjointEigenSolver<SmallMat> es(JtJ);
      const Vec ev = es.eigenvalues();
      const double top = ev(n - 1);
      Vec coef = es.eigenvectors().transpose() * (J.transpose() * F);
      for (int i = 0; i < n; ++i) coef(i) = top > 0 && ev(i) > cutoff * cutoff * top ? coef(i) / ev(i) : 0.0;
      Vec step = -(es.eigenvectors() * coef);
      if (!step.allFinite()) {
        p.ok = false;
        return;
      }
      const double sn = step.norm();
      if (sn > h) step *= h / sn;
      p.Y += step;
      p.last_step = std::min(sn, h);
      if (delta(p.Y, cfg) < 1e-3 * h || p.moved() > limit) p.ok = false;
      if (p.last_step < tol) break;
    }
  } catch (const SingularPointError &) {
    p.ok = false;
  }
}

}  // namespace

QuadratureOptions SingularOptions::boundary_quad_default() {
  QuadratureOptions q;
  q.theta_nodes = 8;
  q.s1_nodes = 10;
  q.s2_lat = 5;
  q.s3_lat = 4;
  return q;
}

std::vector<Vec> SingularSample::all_points() const {
  std::vector<Vec> out = points;
  out.insert(out.end(), boundary_points.begin(), boundary_points.end());
  return out;
}

double boundary_vanishing_order(const Field &u, const Vec &X0, double rho, const AmbientConfig &cfg,
                                const SingularOptions &opts) {
  if (delta(X0, cfg) != 0.0) throw std::invalid_argument("boundary_vanishing_order needs a point of R^d");
  const int k = std::max(2, opts.boundary_radii);
  std::vector<double> radii(k);
  for (int i = 0; i < k; ++i) radii[i] = rho * std::pow(10.0, -1.0 + static_cast<double>(i) / (k - 1));
  const std::vector<double> H = height_profile(u, X0, radii, cfg, opts.boundary_quad);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < k; ++i) {
    if (!(H[i] > 0)) return std::numeric_limits<double>::infinity();
    const double x = std::log(radii[i]), y = std::log(H[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return (slope - cfg.d) / 2;
}

SingularSample sample_singular_set(const Field &u, const Vec &center, double r0, double s, const AmbientConfig &cfg,
                                   const SingularOptions &opts) {
  const int n = cfg.n;
  if (!(r0 > 0)) throw std::invalid_argument("empty window");
  if (!(s > 0) || s > r0) throw std::invalid_argument("grid pitch must lie in (0, r0]");
  if (center.size() != n) throw std::invalid_argument("center has wrong dimension");

  SingularSample out;
  out.center = center;
  out.r0 = r0;
  out.pitch = s;
  out.tau_u = opts.tau_u;
  out.tau_g = opts.tau_g;
  out.Lambda_hat = opts.Lambda_hat;

  const int levels = std::max(0, static_cast<int>(std::floor(std::log2(r0 / s))) - 1);
  const double h0 = s * std::ldexp(1.0, levels);
  const double sqn = std::sqrt(static_cast<double>(n));
  const long K = static_cast<long>(std::ceil(r0 / h0)) + 1;

  std::vector<Key> cells;
  for (const Key &k : box_keys(n, -K, K - 1))
    if ((cell_center(center, h0, k) - center).norm() <= r0 + h0 * sqn / 2) cells.push_back(k);

  // threshold normalization from the coarse cell centers inside the window
  double U = 0.0;
  for (const Key &k : cells) {
    const Vec Z = cell_center(center, h0, k);
    if ((Z - center).norm() <= r0) U = std::max(U, std::abs(u.value(Z)));
  }
  if (!(U > 0)) throw std::runtime_error("u vanishes identically on the window; refusing to sample");
  out.u_scale = U;

  const double ratio = s / r0;
  const double u_thr = opts.tau_u * U * std::pow(ratio, opts.Lambda_hat);
  const double g_thr = opts.tau_g * (U / r0) * std::pow(ratio, opts.Lambda_hat - 1);

  double h = h0;
  for (int level = 0; level <= levels; ++level) {
    const bool last = level == levels;
    const double limit = 0.75 * h * sqn;
    std::vector<Projection> res(cells.size());
    tbb::parallel_for(size_t(0), cells.size(), [&](size_t i) {
      res[i].Z = res[i].Y = cell_center(center, h, cells[i]);
      project(res[i], u, h, opts.screen_iterations, 0.0, limit, opts.svd_cutoff, cfg);
    });
    if (!last) {
      std::vector<Key> next;
      for (size_t i = 0; i < cells.size(); ++i) {
        if (!res[i].ok || res[i].predicted() > limit) continue;
        for (const Key &j : box_keys(n, 0, 1)) {
          Key c(n);
          for (int a = 0; a < n; ++a) c[a] = 2 * cells[i][a] + j[a];
          if ((cell_center(center, h / 2, c) - center).norm() <= r0 + h * sqn / 4) next.push_back(c);
        }
      }
      cells = std::move(next);
      h /= 2;
      continue;
    }
    // one polish per voxel of the predicted limit
    auto voxel = [&](const Vec &Y) {
      Key key(n);
      for (int a = 0; a < n; ++a) key[a] = static_cast<long>(std::floor((Y(a) - center(a)) / (s / 2)));
      return key;
    };
    std::map<Key, size_t> claimed;
    for (size_t i = 0; i < cells.size(); ++i)
      if (res[i].ok && res[i].predicted() <= limit) claimed.emplace(voxel(res[i].Y), i);
    std::vector<size_t> todo;
    for (const auto &kv : claimed) todo.push_back(kv.second);
    std::sort(todo.begin(), todo.end());
    tbb::parallel_for(size_t(0), todo.size(), [&](size_t k) {
      project(res[todo[k]], u, h, opts.newton_iterations, 1e-3 * s, limit, opts.svd_cutoff, cfg);
    });
    std::map<Key, Vec> voxels;
    for (size_t i : todo) {
      const Projection &p = res[i];
      if (!p.ok) continue;
      if ((p.Y - center).norm() > r0 || delta(p.Y, cfg) <= 0) continue;
      double v;
      Vec g;
      u.value_gradient(p.Y, v, g);
      if (std::abs(v) > u_thr || g.norm() > g_thr) continue;
      voxels.emplace(voxel(p.Y), p.Y);
    }
    for (auto &kv : voxels) out.points.push_back(kv.second);
  }
  std::sort(out.points.begin(), out.points.end(), lex_less);

  if (!opts.boundary) return out;
  // boundary stratum on R^d cells; kept at coarse levels with a slack of 1/4 in the order
  const int d = cfg.d;
  const Vec cx = center.head(d);
  const double tc = center.tail(cfg.m()).norm();
  if (tc >= r0) return out;
  const double rb = std::sqrt(r0 * r0 - tc * tc);
  const double sqd = std::sqrt(static_cast<double>(d));
  auto embed = [&](const Vec &x) {
    Vec X = Vec::Zero(n);
    X.head(d) = x;
    return X;
  };
  const long Kb = static_cast<long>(std::ceil(rb / h0)) + 1;
  std::vector<Key> bcells;
  for (const Key &k : box_keys(d, -Kb, Kb - 1))
    if ((cell_center(cx, h0, k) - cx).norm() <= rb + h0 * sqd / 2) bcells.push_back(k);
  h = h0;
  for (int level = 0; level <= levels; ++level) {
    const bool last = level == levels;
    std::vector<double> order(bcells.size());
    tbb::parallel_for(size_t(0), bcells.size(), [&](size_t i) {
      order[i] = boundary_vanishing_order(u, embed(cell_center(cx, h, bcells[i])), opts.boundary_scale * h, cfg, opts);
    });
    if (!last) {
      std::vector<Key> next;
      for (size_t i = 0; i < bcells.size(); ++i) {
        if (!(order[i] > opts.boundary_order - 0.25)) continue;
        for (const Key &j : box_keys(d, 0, 1)) {
          Key c(d);
          for (int a = 0; a < d; ++a) c[a] = 2 * bcells[i][a] + j[a];
          if ((cell_center(cx, h / 2, c) - cx).norm() <= rb + h * sqd / 4) next.push_back(c);
        }
      }
      bcells = std::move(next);
      h /= 2;
      continue;
    }
    for (size_t i = 0; i < bcells.size(); ++i) {
      const Vec X = embed(cell_center(cx, h, bcells[i]));
      if ((X - center).norm() > r0 || !(order[i] > opts.boundary_order)) continue;
      out.boundary_points.push_back(X);
      out.boundary_orders.push_back(order[i]);
    }
  }
  std::vector<size_t> idx(out.boundary_points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return lex_less(out.boundary_points[a], out.boundary_points[b]); });
  std::vector<Vec> bp;
  std::vector<double> bo;
  for (size_t i : idx) {
    bp.push_back(out.boundary_points[i]);
    bo.push_back(out.boundary_orders[i]);
  }
  out.boundary_points = std::move(bp);
  out.boundary_orders = std::move(bo);
  return out;
}

namespace {

// Volume of (union of B_s(P_i)) within B_r0(c): X uniform in a uniformly chosen ball, weighted by
// 1 / #{i : X in B_s(P_i)}.
template <int N>
std::vector<double> union_volumes(const std::vector<Vec> &P, const std::vector<double> &s_list, const Vec &c,
                                  double r0, const MinkowskiOptions &opts) {
  using Point = bg::model::point<double, N, bg::cs::cartesian>;
  using Box = bg::model::box<Point>;
  auto to_point = [](const Vec &v) {
    Point p;
    [&]<size_t... I>(std::index_sequence<I...>) { ((bg::set<I>(p, v(I))), ...); }(std::make_index_sequence<N>{});
    return p;
  };
  std::vector<Point> pts;
  pts.reserve(P.size());
  for (const Vec &v : P) pts.push_back(to_point(v));
  const bgi::rtree<Point, bgi::rstar<16>> tree(pts.begin(), pts.end());

  const double ball = std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0 + 1);
  std::vector<double> out(s_list.size(), 0.0);
  for (size_t si = 0; si < s_list.size(); ++si) {
    const double s = s_list[si];
    std::vector<double> contrib(opts.mc_points, 0.0);
    tbb::parallel_for(0, opts.mc_points, [&](int k) {
      std::mt19937_64 rng(opts.seed * 1000003ULL + si * 7919ULL + static_cast<unsigned long>(k));
      std::uniform_int_distribution<size_t> pick(0, P.size() - 1);
      std::normal_distribution<double> nd;
      std::uniform_real_distribution<double> U(0.0, 1.0);
      Vec dir(N);
      for (int a = 0; a < N; ++a) dir(a) = nd(rng);
      const double rad = s * std::pow(U(rng), 1.0 / N);
      const Vec X = P[pick(rng)] + rad * dir / dir.norm();
      if ((X - c).norm() > r0) return;
      Point lo, hi;
      Vec a = X.array() - s, b = X.array() + s;
      lo = to_point(a);
      hi = to_point(b);
      const Point px = to_point(X);
      int count = 0;
      tree.query(bgi::intersects(Box(lo, hi)) && bgi::satisfies([&](const Point &q) { return bg::distance(q, px) <= s; }),
                 boost::make_function_output_iterator([&](const Point &) { ++count; }));
      contrib[k] = 1.0 / std::max(count, 1);
    });
    const double mean = std::accumulate(contrib.begin(), contrib.end(), 0.0) / opts.mc_points;
    out[si] = mean * static_cast<double>(P.size()) * ball * std::pow(s, N);
  }
  return out;
}

}  // namespace

MinkowskiEstimate minkowski_content(const std::vector<Vec> &points, double pitch, const std::vector<double> &s_list,
                                   const Vec &center, double r0, const AmbientConfig &cfg,
                                   const MinkowskiOptions &opts) {
  if (s_list.empty()) throw std::invalid_argument("no scales given");
  std::vector<double> s = s_list;
  std::sort(s.begin(), s.end(), std::greater<>());
  for (size_t i = 0; i + 1 < s.size(); ++i)
    if (std::abs(s[i] / s[i + 1] - 2.0) > 1e-9) throw std::invalid_argument("scales must be dyadic");
  if (s.back() < pitch * (1 - 1e-12))
    throw std::invalid_argument("scale below the sample pitch: resolution insufficient");
  MinkowskiEstimate est;
  est.s = s;
  if (points.empty()) {
    est.volume.assign(s.size(), 0.0);
    est.empty = true;
    return est;
  }
  switch (cfg.n) {
    case 2: est.volume = union_volumes<2>(points, s, center, r0, opts); break;
    case 3: est.volume = union_volumes<3>(points, s, center, r0, opts); break;
    case 4: est.volume = union_volumes<4>(points, s, center, r0, opts); break;
    case 5: est.volume = union_volumes<5>(points, s, center, r0, opts); break;
    case 6: est.volume = union_volumes<6>(points, s, center, r0, opts); break;
    default: throw std::invalid_argument("minkowski_content supports n <= 6");
  }
  // monotone envelope over the independent per-scale estimates
  for (size_t i = 1; i < est.volume.size(); ++i) est.volume[i] = std::min(est.volume[i], est.volume[i - 1]);
  if (s.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
      const double x = std::log(s[i]), y = std::log(est.volume[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    est.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    est.constant = std::exp((sy - est.slope * sx) / k);
  }
  return est;
}

MinkowskiEstimate minkowski_content(const SingularSample &sample, const std::vector<double> &s_list,
                                   const AmbientConfig &cfg, const MinkowskiOptions &opts) {
  return minkowski_content(sample.all_points(), sample.pitch, s_list, sample.center, sample.r0, cfg, opts);
}

double plane_margin(const std::vector<Vec> &F, const Mat &V) {
  double m = 1.0;
  for (const Vec &f : F) {
    const double nf = f.norm();
    const double p = (V.transpose() * f).squaredNorm() / (nf * nf);
    m = std::min(m, std::sqrt(std::max(0.0, 1.0 - p)));
  }
  return m;
}

namespace {

Vec random_unit(int n, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v / v.norm();
}

Mat orthonormalize(const Mat &A) {
  Eigen::HouseholderQR<Mat> qr(A);
  return qr.householderQ() * Mat::Identity(A.rows(), A.cols());
}

// Pattern search on G(n, 2): random perturbations of the basis, step halved after repeated failures.
template <class Score>
Mat refine_plane(Mat V, double &score, int steps, std::mt19937_64 &rng, Score f, bool maximize) {
  std::normal_distribution<double> nd;
  double eps = 0.1;
  int fails = 0;
  for (int it = 0; it < steps && eps > 1e-6; ++it) {
    Mat G(V.rows(), V.cols());
    for (int i = 0; i < G.size(); ++i) G(i) = nd(rng);
    const Mat C = orthonormalize(V + eps * G);
    const double sc = f(C);
    if (maximize ? sc > score : sc < score) {
      V = C;
      score = sc;
      fails = 0;
    } else if (++fails >= 12) {
      eps /= 2;
      fails = 0;
    }
  }
  return V;
}

}  // namespace

AvoidingPlane find_avoiding_2plane(const std::vector<Vec> &F, double delta_req, const PlaneSearchOptions &opts) {
  AvoidingPlane res;
  if (F.empty()) throw std::invalid_argument("find_avoiding_2plane needs the ambient dimension from a nonempty F");
  const int n = static_cast<int>(F[0].size());
  if (n < 3) throw std::invalid_argument("find_avoiding_2plane needs n >= 3");
  std::vector<Vec> Fs;
  Fs.reserve(2 * F.size());
  for (const Vec &f : F) {
    const Vec g = f / f.norm();
    Fs.push_back(g);
    Fs.push_back(-g);
  }
  std::mt19937_64 rng(opts.seed);
  const Vec Z0 = random_unit(n, rng);
  std::vector<std::pair<double, Vec>> caps;
  while (static_cast<int>(caps.size()) < opts.cap_candidates) {
    const Vec Y = random_unit(n, rng);
    if (Y.dot(Z0) <= 0.5) continue;
    double d0 = 2.0;
    for (const Vec &f : Fs) d0 = std::min(d0, (Y - f).norm());
    caps.emplace_back(d0, Y);
  }
  std::stable_sort(caps.begin(), caps.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
  caps.resize(std::min<size_t>(caps.size(), opts.keep_caps));

  res.margin = -1.0;
  for (const auto &[d0, Y] : caps) {
    for (int k = 0; k < opts.equator_candidates; ++k) {
      Vec W = random_unit(n, rng);
      W -= W.dot(Y) * Y;
      if (W.norm() < 1e-8) continue;
      W.normalize();
      Mat V(n, 2);
      V.col(0) = Y;
      V.col(1) = W;
      const double m = plane_margin(Fs, V);
      if (m > res.margin) {
        res.margin = m;
        res.basis = V;
        res.cap_point = Y;
      }
    }
  }
  res.basis = refine_plane(res.basis, res.margin, opts.refine_steps, rng,
                           [&](const Mat &V) { return plane_margin(Fs, V); }, true);
  res.success = res.margin >= delta_req;
  return res;
}

std::vector<Vec> sphere_trace(const std::vector<Vec> &points, const Vec &vertex, double r_min) {
  std::vector<Vec> out;
  for (const Vec &p : points) {
    const Vec z = p - vertex;
    const double r = z.norm();
    if (r > r_min && r > 0) out.push_back(z / r);
  }
  return out;
}

ConeFit cone_fit(const std::vector<Vec> &points, const Vec &vertex_in, const AmbientConfig &cfg,
                 const ConeOptions &opts) {
  const int n = cfg.n;
  Vec vertex = Vec::Zero(n);
  if (vertex_in.size() == cfg.d) vertex.head(cfg.d) = vertex_in;
  else if (vertex_in.size() == n) vertex = vertex_in;
  else throw std::invalid_argument("vertex has wrong dimension");
  const std::vector<Vec> dirs = sphere_trace(points, vertex, 1e-12);
  if (dirs.empty()) throw std::invalid_argument("cone_fit needs sample points away from the vertex");

  const size_t drop = static_cast<size_t>(std::floor(opts.outlier_fraction * static_cast<double>(dirs.size())));
  auto aperture = [&](const std::vector<Vec> &D, const Mat &W, size_t k) {
    std::vector<double> a(D.size());
    for (size_t i = 0; i < D.size(); ++i) a[i] = (W.transpose() * D[i]).norm();
    if (k == 0) return *std::max_element(a.begin(), a.end());
    std::nth_element(a.begin(), a.end() - 1 - static_cast<long>(k), a.end());
    return *(a.end() - 1 - static_cast<long>(k));
  };

  std::vector<Vec> sub;
  const size_t stride = std::max<size_t>(1, dirs.size() / std::max(1, opts.net_points));
  for (size_t i = 0; i < dirs.size(); i += stride) sub.push_back(dirs[i]);
  const size_t sub_drop = static_cast<size_t>(std::floor(opts.outlier_fraction * static_cast<double>(sub.size())));

  std::mt19937_64 rng(opts.seed);
  std::vector<std::pair<double, Mat>> cands;
  PlaneSearchOptions po;
  po.seed = opts.seed;
  po.refine_steps = 100;
  const AvoidingPlane av = find_avoiding_2plane(sub, 0.0, po);
  cands.emplace_back(aperture(sub, av.basis, sub_drop), av.basis);
  for (int k = 0; k < opts.net_size; ++k) {
    std::normal_distribution<double> nd;
    Mat G(n, 2);
    for (int i = 0; i < G.size(); ++i) G(i) = nd(rng);
    const Mat W = orthonormalize(G);
    cands.emplace_back(aperture(sub, W, sub_drop), W);
  }
  std::stable_sort(cands.begin(), cands.end(), [](const auto &a, const auto &b) { return a.first < b.first; });

  ConeFit fit;
  fit.vertex = vertex;
  double best = 2.0;
  for (size_t c = 0; c < std::min<size_t>(5, cands.size()); ++c) {
    double sc = aperture(dirs, cands[c].second, drop);
    const Mat W = refine_plane(cands[c].second, sc, opts.refine_steps, rng,
                               [&](const Mat &V) { return aperture(dirs, V, drop); }, false);
    if (sc < best) {
      best = sc;
      fit.W = W;
    }
  }
  fit.alpha = best;
  Eigen::HouseholderQR<Mat> qr(fit.W);
  const Mat Q = qr.householderQ();
  fit.V = Q.rightCols(n - 2);
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec z = points[i] - vertex;
    if (z.norm() <= 1e-12) continue;
    if ((fit.W.transpose() * (z / z.norm())).norm() > fit.alpha) fit.outliers.push_back(static_cast<int>(i));
  }
  return fit;
}

}  // namespace cofreq
