#include "vaidya/geometry.hpp"

#include <cmath>
#include <string>

#include "vaidya/error.hpp"

namespace vaidya {

namespace {

void require_dims(const Polytope& P, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != P.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "point has dimension " + std::to_string(x.size()) +
                                                  ", polytope has " + std::to_string(P.dim()));
  }
}

void require_interior(const Polytope& P, const Vector& s) {
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s[i] > 1e-14 * (1.0 + std::abs(P.b()[i])))) {
      throw Error(ErrorKind::NonInteriorPoint,
                  "slack of row " + std::to_string(i) + " is " + std::to_string(s[i]));
    }
  }
}

// Cholesky with a single jittered retry.
Eigen::LLT<Matrix> factorize(const Matrix& H) {
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() == Eigen::Success) return llt;
  const double n = static_cast<double>(H.rows());
  Matrix jittered = H;
  const double jitter = 1e-12 * H.trace() / n;
  jittered.diagonal().array() += jitter;
  llt.compute(jittered);
  // A pivot of the size of the jitter itself means H has a null direction.
  if (llt.info() != Eigen::Success ||
      llt.matrixLLT().diagonal().array().square().minCoeff() <= 1e3 * jitter) {
    throw Error(ErrorKind::SingularHessian, "barrier Hessian is not positive definite");
  }
  return llt;
}

// Rows a_i / s_i.
Matrix scaled_rows(const Polytope& P, const Vector& s) {
  return s.cwiseInverse().asDiagonal() * P.A();
}

}  // namespace

Polytope::Polytope(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "A has " + std::to_string(A_.rows()) +
                                                  " rows but b has " + std::to_string(b_.size()));
  }
  if (A_.cols() < 1) throw Error(ErrorKind::InvalidArgument, "polytope dimension must be >= 1");
  if (A_.rows() < A_.cols() + 1) {
    throw Error(ErrorKind::TooFewRows, "a bounded polytope in R^" + std::to_string(A_.cols()) +
                                           " needs at least " + std::to_string(A_.cols() + 1) +
                                           " rows");
  }
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    if (A_.row(i).squaredNorm() == 0.0) {
      throw Error(ErrorKind::ZeroCutVector, "row " + std::to_string(i) + " is zero");
    }
  }
  if (!A_.allFinite() || !b_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "polytope data must be finite");
  }
}

Polytope Polytope::box(const Vector& center, double half_width) {
  if (!(half_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "box half-width must be > 0");
  const Eigen::Index n = center.size();
  Matrix A = Matrix::Zero(2 * n, n);
  Vector b(2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // x_j >= c_j - w  and  -x_j >= -(c_j + w)
    A(2 * j, j) = 1.0;
    b[2 * j] = center[j] - half_width;
    A(2 * j + 1, j) = -1.0;
    b[2 * j + 1] = -(center[j] + half_width);
  }
  return Polytope(std::move(A), std::move(b));
}

Polytope Polytope::box(std::size_t n, double half_width) {
  return box(Vector::Zero(static_cast<Eigen::Index>(n)), half_width);
}

bool Polytope::operator==(const Polytope& other) const {
  return A_.rows() == other.A_.rows() && A_.cols() == other.A_.cols() && A_ == other.A_ &&
         b_ == other.b_;
}

Eigen::Index BarrierState::argmin_sigma() const {
  // First minimizer, so ties resolve to the lowest row index.
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < sigma.size(); ++i) {
    if (sigma[i] < sigma[best]) best = i;
  }
  return best;
}

Vector slacks(const Polytope& P, const Vector& x) {
  require_dims(P, x);
  return P.A() * x - P.b();
}

bool is_interior(const Polytope& P, const Vector& x) {
  const Vector s = slacks(P, x);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s[i] > 1e-14 * (1.0 + std::abs(P.b()[i])))) return false;
  }
  return true;
}

Matrix barrier_hessian(const Polytope& P, const Vector& x) {
  const Vector s = slacks(P, x);
  require_interior(P, s);
  const Matrix As = scaled_rows(P, s);
  Matrix H = As.transpose() * As;
  factorize(H);
  return H;
}

BarrierState evaluate_barrier(const Polytope& P, const Vector& x) {
  BarrierState st;
  st.x = x;
  st.s = slacks(P, x);
  require_interior(P, st.s);
  const Matrix As = scaled_rows(P, st.s);
  st.H = As.transpose() * As;
  st.Hfact = factorize(st.H);

  // sigma_i = |L^{-1} a_i / s_i|^2
  const Matrix W = st.Hfact.matrixL().solve(As.transpose());
  st.sigma = W.colwise().squaredNorm().transpose();

  st.F = st.Hfact.matrixLLT().diagonal().array().log().sum();
  st.gradF = -(As.transpose() * st.sigma);
  return st;
}

Vector leverage_scores(const Polytope& P, const Vector& x) { return evaluate_barrier(P, x).sigma; }

double volumetric_value(const Polytope& P, const Vector& x) { return evaluate_barrier(P, x).F; }

Vector volumetric_gradient(const Polytope& P, const Vector& x) {
  return evaluate_barrier(P, x).gradF;
}

namespace {

Matrix surrogate_hessian(const Polytope& P, const BarrierState& st) {
  const Matrix As = scaled_rows(P, st.s);
  return As.transpose() * st.sigma.asDiagonal() * As;
}

// Exact Hessian of F: A_s^T (3 Sigma - 2 P.^2) A_s with P = A_s H^{-1} A_s^T.
// For m > n^2 the P.^2 term is assembled as C^T C with C = sum_i (w_i (x) w_i) a_i^T / s_i,
// w_i = L^{-1} a_i / s_i, which avoids the m x m matrix.
Matrix volumetric_hessian(const Polytope& P, const BarrierState& st) {
  const Matrix As = scaled_rows(P, st.s);
  const Matrix W = st.Hfact.matrixL().solve(As.transpose());
  const Eigen::Index m = As.rows();
  const Eigen::Index n = As.cols();
  if (m <= n * n) {
    Matrix M = -2.0 * (W.transpose() * W).array().square().matrix();
    M.diagonal() += 3.0 * st.sigma;
    return As.transpose() * M * As;
  }
  Matrix C = Matrix::Zero(n * n, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector w = W.col(i);
    const Matrix outer = w * w.transpose();
    C.noalias() += Eigen::Map<const Vector>(outer.data(), n * n) * As.row(i);
  }
  return 3.0 * (As.transpose() * st.sigma.asDiagonal() * As) - 2.0 * (C.transpose() * C);
}

struct NewtonPoint {
  BarrierState state;
  Vector direction;
  double decrement = 0.0;  // sqrt(gradF^T Q^{-1} gradF)
};

NewtonPoint newton_point(const Polytope& P, BarrierState st) {
  NewtonPoint np;
  const Eigen::LLT<Matrix> Qfact = factorize(surrogate_hessian(P, st));
  np.decrement = std::sqrt(std::max(0.0, st.gradF.dot(Qfact.solve(st.gradF))));
  np.direction = -factorize(volumetric_hessian(P, st)).solve(st.gradF);
  np.state = std::move(st);
  return np;
}

}  // namespace

double newton_decrement(const Polytope& P, const BarrierState& state) {
  const Eigen::LLT<Matrix> Qfact = factorize(surrogate_hessian(P, state));
  return std::sqrt(std::max(0.0, state.gradF.dot(Qfact.solve(state.gradF))));
}

CenteringReport volumetric_center_report(const Polytope& P, const Vector& x0, double tol,
                                         int max_newton) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "centering tolerance must be > 0");
  require_dims(P, x0);

  CenteringReport rep;
  NewtonPoint cur = newton_point(P, evaluate_barrier(P, x0));
  constexpr int kMaxHalvings = 60;

  while (cur.decrement > tol && rep.newton_steps < max_newton) {
    const Vector d = cur.direction;
    const double slope = cur.state.gradF.dot(d);
    const Vector sd = P.A() * d;
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
      const Vector s_trial = cur.state.s + t * sd;
      if (((s_trial.array() - 1e-12 * cur.state.s.array()) <= 0.0).any()) continue;
      const Vector x_trial = cur.state.x + t * d;
      if (!is_interior(P, x_trial)) continue;
      NewtonPoint trial = newton_point(P, evaluate_barrier(P, x_trial));
      const double dF = trial.state.F - cur.state.F;
      // Armijo decrease, or a step whose change in F is below rounding but
      // which still shrinks the decrement.
      const bool decreased = dF <= 1e-4 * t * slope && dF < 0.0;
      const bool flat = std::abs(dF) <= 1e-12 * (1.0 + std::abs(cur.state.F)) &&
                        trial.decrement < cur.decrement;
      if (decreased || flat) {
        cur = std::move(trial);
        accepted = true;
        break;
      }
    }
    ++rep.newton_steps;
    if (!accepted) {
      rep.stalled = true;
      break;
    }
  }

  rep.decrement = cur.decrement;
  rep.state = std::move(cur.state);
  // A stall inside the quadratic region means the center is resolved to the
  // precision the slacks can carry; anything else is a failure.
  const bool precision_floor = rep.stalled && rep.decrement <= kStallDecrement;
  if (rep.decrement > 10.0 * tol && !precision_floor) {
    throw Error(ErrorKind::CenteringFailed,
                "Newton decrement " + std::to_string(rep.decrement) + " after " +
                    std::to_string(rep.newton_steps) + " steps");
  }
  return rep;
}

BarrierState volumetric_center(const Polytope& P, const Vector& x0, double tol, int max_newton) {
  return volumetric_center_report(P, x0, tol, max_newton).state;
}

Polytope add_constraint(const Polytope& P, const Vector& c, double beta) {
  if (static_cast<std::size_t>(c.size()) != P.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "cut vector dimension mismatch");
  }
  if (c.squaredNorm() == 0.0) throw Error(ErrorKind::ZeroCutVector, "cut vector is zero");
  Matrix A(P.A().rows() + 1, P.A().cols());
  A.topRows(P.A().rows()) = P.A();
  A.bottomRows(1) = c.transpose();
  Vector b(P.b().size() + 1);
  b.head(P.b().size()) = P.b();
  b[P.b().size()] = beta;
  return Polytope(std::move(A), std::move(b));
}

Polytope drop_constraint(const Polytope& P, std::size_t i) {
  const std::size_t m = P.rows();
  if (i >= m) {
    throw Error(ErrorKind::InvalidArgument,
                "row index " + std::to_string(i) + " out of range for " + std::to_string(m) +
                    " rows");
  }
  if (m - 1 < P.dim() + 1) {
    throw Error(ErrorKind::TooFewRows, "dropping a row would leave " + std::to_string(m - 1) +
                                           " < n + 1 rows");
  }
  const auto idx = static_cast<Eigen::Index>(i);
  const Eigen::Index tail = static_cast<Eigen::Index>(m) - idx - 1;
  Matrix A(static_cast<Eigen::Index>(m) - 1, P.A().cols());
  Vector b(static_cast<Eigen::Index>(m) - 1);
  A.topRows(idx) = P.A().topRows(idx);
  A.bottomRows(tail) = P.A().bottomRows(tail);
  b.head(idx) = P.b().head(idx);
  b.tail(tail) = P.b().tail(tail);
  return Polytope(std::move(A), std::move(b));
}

}  // namespace vaidya
