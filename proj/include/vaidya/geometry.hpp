#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

namespace vaidya {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Bounded polytope {x : A x >= b}. Rows a_i^T are the constraint normals.
///
/// Construction enforces m >= n + 1 and nonzero rows. Interiority of any
/// particular point is a property of (P, x) and is checked by the barrier
/// routines, not stored here.
class Polytope {
 public:
  Polytope(Matrix A, Vector b);

  /// Axis-aligned box {|x_j - center_j| <= half_width}; rows ordered
  /// +e_0, -e_0, +e_1, -e_1, ...
  static Polytope box(const Vector& center, double half_width);
  static Polytope box(std::size_t n, double half_width);

  std::size_t rows() const { return static_cast<std::size_t>(A_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(A_.cols()); }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

  bool operator==(const Polytope& other) const;

 private:
  Matrix A_;
  Vector b_;
};

/// Everything the barrier needs at one interior point: slacks, the
/// Cholesky factor of the log-barrier Hessian, leverage scores, and the
/// volumetric barrier value and gradient.
struct BarrierState {
  Vector x;
  Vector s;
  Matrix H;
  Eigen::LLT<Matrix> Hfact;
  Vector sigma;
  double F = 0.0;
  Vector gradF;

  /// Solves H y = rhs with the cached factorization.
  Vector solve(const Vector& rhs) const { return Hfact.solve(rhs); }
  double min_sigma() const { return sigma.minCoeff(); }
  Eigen::Index argmin_sigma() const;
};

Vector slacks(const Polytope& P, const Vector& x);

/// True iff min_i s_i > 1e-14 (1 + |b_i|) holds row by row.
bool is_interior(const Polytope& P, const Vector& x);

Matrix barrier_hessian(const Polytope& P, const Vector& x);
Vector leverage_scores(const Polytope& P, const Vector& x);
double volumetric_value(const Polytope& P, const Vector& x);
Vector volumetric_gradient(const Polytope& P, const Vector& x);

/// Computes the full barrier state at an interior point in one pass.
BarrierState evaluate_barrier(const Polytope& P, const Vector& x);

struct CenteringReport {
  BarrierState state;
  int newton_steps = 0;
  double decrement = 0.0;
  /// Line search found no acceptable step (rounding floor of F and slacks).
  bool stalled = false;
};

/// Largest decrement at which a stalled line search is still reported as
/// converged rather than CenteringFailed.
inline constexpr double kStallDecrement = 1e-3;

/// Damped Newton minimization of F from x0 with the exact Hessian of F and
/// backtracking that keeps every slack positive. Stops once the decrement
/// sqrt(gradF^T Q^{-1} gradF), Q(x) = sum sigma_i a_i a_i^T / s_i^2, is <= tol.
/// Throws CenteringFailed if the decrement is still above 10 tol when the
/// step budget runs out or the line search stalls above kStallDecrement.
CenteringReport volumetric_center_report(const Polytope& P, const Vector& x0, double tol,
                                         int max_newton);
BarrierState volumetric_center(const Polytope& P, const Vector& x0, double tol, int max_newton);

/// Newton decrement of F at a precomputed state, measured in the Q^{-1} norm.
double newton_decrement(const Polytope& P, const BarrierState& state);

Polytope add_constraint(const Polytope& P, const Vector& c, double beta);
Polytope drop_constraint(const Polytope& P, std::size_t i);

}  // namespace vaidya
