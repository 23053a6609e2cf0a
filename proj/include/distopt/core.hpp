#pragma once

// Core numeric types and small dense linear algebra shared by every layer.
// Problem sizes are tiny (a handful of subsystems, a handful of coupling
// constraints), so everything here is plain O(n^3) dense code with
// deterministic, platform-independent arithmetic order.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace distopt {

using Vec = std::vector<double>;

// ---- error taxonomy ----
// UsageError/ValidationError/ParseError/InputError map to CLI exit code 2,
// FaultError (numerical blow-up at run time) maps to exit code 3.

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct UsageError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct InputError : Error {
  using Error::Error;
};

struct DegenerateConstraintError : Error {
  using Error::Error;
};

struct OracleError : Error {
  using Error::Error;
};

struct ProtocolError : Error {
  using Error::Error;
};

struct FaultError : Error {
  using Error::Error;
};

// ---- dense row-major matrix ----

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec a;  // row-major, rows*cols entries

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

Mat transpose(const Mat& m);
Mat matmul(const Mat& lhs, const Mat& rhs);
Vec matvec(const Mat& m, const Vec& v);
double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double norm_inf(const Vec& x);

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws DegenerateConstraintError when A is numerically singular.
Vec solve_linear(Mat A, Vec b);

// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations, ascending.
Vec symmetric_eigenvalues(Mat S, double tol = 1e-14);

// ---- constraint-sensitivity routines ----

// Multipliers that best explain a cost gradient through the constraint
// sensitivities: lambda = -(Phi^T Phi)^{-1} Phi^T Gamma.
//
// `gamma` has one entry per input, `phi` is inputs x constraints. When
// Phi^T Phi is near-singular (min eigenvalue < 1e-9 * max eigenvalue) the
// normal equations are regularized with eps*I, eps = 1e-9 * trace/m, and
// the result is flagged. An all-zero Phi is rejected outright.
struct MultiplierResult {
  Vec value;
  bool regularized = false;
};

MultiplierResult least_squares_multipliers(const Vec& gamma, const Mat& phi);

// Orthonormal basis of the left null space of phi (inputs x constraints):
// columns N_k satisfy Phi^T N_k = 0, N^T N = I. Deterministic sign
// convention: the first entry of each column whose magnitude exceeds
// 1e-12 is made positive. Returns an n x 0 matrix when n == m, throws
// DegenerateConstraintError when phi is rank-deficient.
Mat null_space_basis(const Mat& phi);

}  // namespace distopt
