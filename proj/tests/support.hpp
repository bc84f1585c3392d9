#pragma once

// Independent oracles for the test suites. Nothing here calls the library's
// resolvent, family or diagnostics code; answers come from dense linear
// algebra and closed forms.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec normal_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * nd(rng);
  return v;
}

inline Mat normal_matrix(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = nd(rng);
  }
  return m;
}

/// Symmetric matrix with eigenvalues spread evenly over [lo, hi]; the
/// eigenbasis comes from an eigen-decomposition of a random symmetric matrix.
inline Mat spd(Eigen::Index n, double lo, double hi, std::mt19937_64& rng) {
  const Mat g = normal_matrix(n, rng);
  Eigen::SelfAdjointEigenSolver<Mat> es(g + g.transpose());
  Vec spectrum(n);
  for (Eigen::Index i = 0; i < n; ++i) spectrum(i) = n == 1 ? lo : lo + (hi - lo) * i / double(n - 1);
  Mat m = es.eigenvectors() * spectrum.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (m + m.transpose());
}

/// Skew-symmetric matrix with spectral norm `norm`.
inline Mat skew(Eigen::Index n, double norm, std::mt19937_64& rng) {
  const Mat g = normal_matrix(n, rng);
  Mat s = g - g.transpose();
  const double current = Eigen::JacobiSVD<Mat>(s).singularValues()(0);
  return s * (norm / current);
}

/// (I + g M)^{-1}(x - g b) by full-pivot LU.
inline Vec resolvent(const Mat& m, const Vec& b, double g, const Vec& x) {
  const Mat lhs = Mat::Identity(m.rows(), m.cols()) + g * m;
  return lhs.fullPivLu().solve(x - g * b);
}

inline double spectral_norm(const Mat& m) { return Eigen::JacobiSVD<Mat>(m).singularValues()(0); }

/// Zero of (M1 + ... + Mk) z + (b1 + ... + bk).
inline Vec affine_zero(const std::vector<Mat>& ms, const std::vector<Vec>& bs) {
  Mat sm = Mat::Zero(ms[0].rows(), ms[0].cols());
  Vec sb = Vec::Zero(bs[0].size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    sm += ms[i];
    sb += bs[i];
  }
  return sm.fullPivLu().solve(-sb);
}

/// The Douglas-Rachford fixed point z* + g*(M1 z* + b1) of an affine pair
/// with a unique zero.
inline Vec dr_fixed_point(const Mat& m1, const Vec& b1, const Mat& m2, const Vec& b2, double g) {
  const Vec z = affine_zero({m1, m2}, {b1, b2});
  return z + g * (m1 * z + b1);
}

/// Malitsky-Tam fixed point of an affine N-tuple: x^i = z + g sum_{j<=i} (M_j z + b_j).
inline Vec mt_fixed_point(const std::vector<Mat>& ms, const std::vector<Vec>& bs, double g) {
  const Vec z = affine_zero(ms, bs);
  const Eigen::Index d = z.size();
  const Eigen::Index blocks = static_cast<Eigen::Index>(ms.size()) - 1;
  Vec x(blocks * d);
  Vec acc = Vec::Zero(d);
  for (Eigen::Index i = 0; i < blocks; ++i) {
    acc += ms[static_cast<std::size_t>(i)] * z + bs[static_cast<std::size_t>(i)];
    x.segment(i * d, d) = z + g * acc;
  }
  return x;
}

/// ULP distance between two doubles of the same sign.
inline std::int64_t ulp_distance(double a, double b) {
  std::int64_t ia = 0, ib = 0;
  static_assert(sizeof(double) == sizeof(std::int64_t));
  std::memcpy(&ia, &a, sizeof a);
  std::memcpy(&ib, &b, sizeof b);
  return ia > ib ? ia - ib : ib - ia;
}

}  // namespace oracle
