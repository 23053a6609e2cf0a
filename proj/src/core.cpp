#include "distopt/core.hpp"

#include <algorithm>
#include <cmath>

namespace distopt {

Mat transpose(const Mat& m) {
  Mat t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

Mat matmul(const Mat& lhs, const Mat& rhs) {
  if (lhs.cols != rhs.rows) throw UsageError("matmul: inner dimensions differ");
  Mat out(lhs.rows, rhs.cols);
  for (std::size_t i = 0; i < lhs.rows; ++i)
    for (std::size_t k = 0; k < lhs.cols; ++k) {
      const double v = lhs(i, k);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols; ++j) out(i, j) += v * rhs(k, j);
    }
  return out;
}

Vec matvec(const Mat& m, const Vec& v) {
  if (m.cols != v.size()) throw UsageError("matvec: dimension mismatch");
  Vec out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out[i] += m(i, j) * v[j];
  return out;
}

double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw UsageError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm_inf(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

Vec solve_linear(Mat A, Vec b) {
  if (A.rows != A.cols) throw UsageError("solve_linear: matrix not square");
  if (A.rows != b.size()) throw UsageError("solve_linear: rhs size mismatch");
  const std::size_t n = A.rows;
  double scale = 0.0;
  for (double v : A.a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) throw DegenerateConstraintError("solve_linear: zero matrix");

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(A(r, col)) > std::fabs(A(piv, col))) piv = r;
    if (std::fabs(A(piv, col)) < 1e-13 * scale)
      throw DegenerateConstraintError("solve_linear: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(piv, j), A(col, j));
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A(r, col) / A(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) A(r, j) -= f * A(col, j);
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= A(ii, j) * x[j];
    x[ii] = s / A(ii, ii);
  }
  return x;
}

Vec symmetric_eigenvalues(Mat S, double tol) {
  if (S.rows != S.cols) throw UsageError("symmetric_eigenvalues: not square");
  const std::size_t n = S.rows;
  double scale = 0.0;
  for (double v : S.a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return Vec(n, 0.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += S(i, j) * S(i, j);
    if (std::sqrt(off) <= tol * scale) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(S(p, q)) <= 1e-300) continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
      }
  }
  Vec ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = S(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

MultiplierResult least_squares_multipliers(const Vec& gamma, const Mat& phi) {
  if (phi.rows != gamma.size())
    throw UsageError("least_squares_multipliers: gradient/sensitivity size mismatch");
  if (phi.rows == 0 || phi.cols == 0)
    throw UsageError("least_squares_multipliers: empty sensitivity matrix");
  if (phi.rows < phi.cols)
    throw UsageError("least_squares_multipliers: more constraints than inputs");

  double maxabs = 0.0;
  for (double v : phi.a) maxabs = std::max(maxabs, std::fabs(v));
  if (maxabs == 0.0)
    throw DegenerateConstraintError("least_squares_multipliers: all-zero sensitivities");

  const Mat phit = transpose(phi);
  Mat gram = matmul(phit, phi);  // m x m, symmetric PSD
  const std::size_t m = phi.cols;

  const Vec ev = symmetric_eigenvalues(gram);
  const double ev_min = ev.front(), ev_max = ev.back();

  MultiplierResult res;
  if (ev_min < 1e-9 * ev_max) {
    double tr = 0.0;
    for (std::size_t k = 0; k < m; ++k) tr += gram(k, k);
    const double eps = 1e-9 * tr / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) gram(k, k) += eps;
    res.regularized = true;
  }

  Vec rhs = matvec(phit, gamma);
  for (double& v : rhs) v = -v;
  res.value = solve_linear(gram, rhs);
  return res;
}

Mat null_space_basis(const Mat& phi) {
  const std::size_t n = phi.rows, m = phi.cols;
  if (n == 0) throw UsageError("null_space_basis: empty matrix");
  if (m > n) throw UsageError("null_space_basis: more constraints than inputs");

  double scale = 0.0;
  for (double v : phi.a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0)
    throw DegenerateConstraintError("null_space_basis: all-zero sensitivities");

  // Householder QR of phi; the trailing n-m columns of Q span the left
  // null space. Work on a copy of phi, accumulating reflectors.
  Mat R = phi;
  std::vector<Vec> reflectors;
  for (std::size_t k = 0; k < m; ++k) {
    double nx = 0.0;
    for (std::size_t i = k; i < n; ++i) nx += R(i, k) * R(i, k);
    nx = std::sqrt(nx);
    if (nx < 1e-12 * scale)
      throw DegenerateConstraintError("null_space_basis: rank-deficient sensitivities");
    Vec v(n, 0.0);
    const double alpha = (R(k, k) >= 0.0) ? -nx : nx;
    for (std::size_t i = k; i < n; ++i) v[i] = R(i, k);
    v[k] -= alpha;
    double vn2 = 0.0;
    for (double w : v) vn2 += w * w;
    if (vn2 > 0.0) {
      for (std::size_t j = k; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += v[i] * R(i, j);
        const double f = 2.0 * s / vn2;
        for (std::size_t i = k; i < n; ++i) R(i, j) -= f * v[i];
      }
    }
    reflectors.push_back(std::move(v));
  }

  // Verify rank: diagonal of R must be non-negligible.
  for (std::size_t k = 0; k < m; ++k)
    if (std::fabs(R(k, k)) < 1e-12 * scale)
      throw DegenerateConstraintError("null_space_basis: rank-deficient sensitivities");

  Mat N(n, n - m);
  for (std::size_t col = 0; col < n - m; ++col) {
    Vec q(n, 0.0);
    q[m + col] = 1.0;  // apply Q = H_0 ... H_{m-1} to e_{m+col}
    for (std::size_t k = m; k-- > 0;) {
      const Vec& v = reflectors[k];
      double vn2 = 0.0;
      for (double w : v) vn2 += w * w;
      if (vn2 == 0.0) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += v[i] * q[i];
      const double f = 2.0 * s / vn2;
      for (std::size_t i = 0; i < n; ++i) q[i] -= f * v[i];
    }
    // Sign convention: first entry with magnitude above 1e-12 positive.
    double sign = 1.0;
    for (double w : q) {
      if (std::fabs(w) > 1e-12) {
        sign = (w > 0.0) ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) N(i, col) = q[i] * sign;
  }
  return N;
}

}  // namespace distopt
