#pragma once

// Reference implementations used only by the tests. They deliberately avoid
// the library's own algorithms so that agreement means something.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errp/rng.hpp"

namespace oracle {

// Cholesky factor L (lower) of an SPD matrix, textbook loop.
inline Eigen::MatrixXd cholesky(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

// Solves L y = b for lower-triangular L.
inline Eigen::MatrixXd forward_solve(const Eigen::MatrixXd& l, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd y = b;
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      double s = y(i, c);
      for (Eigen::Index k = 0; k < i; ++k) s -= l(i, k) * y(k, c);
      y(i, c) = s / l(i, i);
    }
  }
  return y;
}

// Solves L^T x = y.
inline Eigen::MatrixXd backward_solve_t(const Eigen::MatrixXd& l, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd x = y;
  const Eigen::Index n = l.rows();
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      double s = x(i, c);
      for (Eigen::Index k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

struct EigenPairs {
  std::vector<double> values;  // descending
  Eigen::MatrixXd vectors;     // columns
};

// Cyclic Jacobi rotations on a symmetric matrix.
inline EigenPairs jacobi_eigen(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
  EigenPairs out;
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values.push_back(a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]));
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Dense generalized symmetric-definite problem A w = lambda B w by Cholesky
// reduction: C = L^-1 A L^-T, w = L^-T u. Eigenvectors are B-normalized.
inline EigenPairs generalized_eigen(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd l = cholesky(b);
  const Eigen::MatrixXd y = forward_solve(l, a);                      // L^-1 A
  const Eigen::MatrixXd c = forward_solve(l, y.transpose()).transpose();  // L^-1 A L^-T
  EigenPairs p = jacobi_eigen(0.5 * (c + c.transpose()));
  p.vectors = backward_solve_t(l, p.vectors);
  return p;
}

inline Eigen::MatrixXd random_spd(errp::Rng& rng, int n, double jitter = 0.1) {
  Eigen::MatrixXd g(n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2 * n; ++j) g(i, j) = rng.normal();
  return g * g.transpose() / (2.0 * n) + jitter * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::VectorXd random_vector(errp::Rng& rng, Eigen::Index n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

// minimize 1/2 |u - w|^2 + C max(0, 1 - y <u, x>) by ADMM on the split
// z = y <x, u>; returns u.
inline Eigen::VectorXd pa1_admm(const Eigen::VectorXd& w, const Eigen::VectorXd& x, int y, double c,
                                int iterations = 20000) {
  const double rho = 1.0 / x.squaredNorm();
  const Eigen::Index n = w.size();
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + rho * x * x.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> solver(m);
  Eigen::VectorXd u = w;
  double z = y * x.dot(u), v = 0.0;
  for (int it = 0; it < iterations; ++it) {
    u = solver.solve(w + rho * y * (z - v) * x);
    const double a = y * x.dot(u) + v;
    const double z_new = a >= 1.0 ? a : (a <= 1.0 - c / rho ? a + c / rho : 1.0);
    v += y * x.dot(u) - z_new;
    const double change = std::abs(z_new - z);
    z = z_new;
    if (it > 10 && change < 1e-15 && std::abs(y * x.dot(u) - z) < 1e-15) break;
  }
  return u;
}

inline double pa1_objective(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                            const Eigen::VectorXd& x, int y, double c) {
  return 0.5 * (u - w).squaredNorm() + c * std::max(0.0, 1.0 - y * x.dot(u));
}

// Steady-state amplitude of a sinusoid at `freq` in samples [from, end) by
// least squares on sin/cos.
inline double sinusoid_amplitude(const std::vector<double>& x, double freq, double rate,
                                 std::size_t from) {
  double ss = 0, sc = 0, cc = 0, xs = 0, xc = 0;
  for (std::size_t i = from; i < x.size(); ++i) {
    const double ph = 2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate;
    const double s = std::sin(ph), c = std::cos(ph);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    xs += x[i] * s;
    xc += x[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (xs * cc - xc * sc) / det;
  const double b = (xc * ss - xs * sc) / det;
  return std::hypot(a, b);
}

}  // namespace oracle
