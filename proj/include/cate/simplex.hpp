#ifndef CATE_SIMPLEX_HPP_
#define CATE_SIMPLEX_HPP_

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace cate {

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

enum class SimplexStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

/// min c'x  s.t.  A x (<=|=|>=) b,  x >= 0.
template <typename Scalar>
struct LinearProgram {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix a;
  Vector b;
  Vector c;
  std::vector<RowSense> sense;
};

template <typename Scalar>
struct SimplexSolution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  SimplexStatus status = SimplexStatus::kIterationLimit;
  Vector x;
  /// Row duals y with c - A'y >= 0 at optimality (sign convention of a
  /// minimization: y >= 0 on >= rows, y <= 0 on <= rows).
  Vector duals;
  Scalar objective = Scalar(0);
  int pivots = 0;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's
/// rule after a run of degenerate pivots so cycling cannot occur.
template <typename Scalar>
class DenseSimplex {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  explicit DenseSimplex(Scalar tolerance = Scalar(1e-11), int max_pivots = 200000)
      : tol_(tolerance), max_pivots_(max_pivots) {}

  SimplexSolution<Scalar> solve(const LinearProgram<Scalar>& lp) {
    const Eigen::Index m = lp.a.rows();
    const Eigen::Index n = lp.a.cols();
    SimplexSolution<Scalar> out;

    // Column layout: [original n | one slack/surplus per inequality |
    // one artificial per >= or = row | rhs].
    Eigen::Index slack_count = 0;
    Eigen::Index artificial_count = 0;
    std::vector<Scalar> flip(static_cast<std::size_t>(m), Scalar(1));
    std::vector<RowSense> sense = lp.sense;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (lp.b[r] < Scalar(0)) {
        flip[r] = Scalar(-1);
        if (sense[r] == RowSense::kLessEqual) {
          sense[r] = RowSense::kGreaterEqual;
        } else if (sense[r] == RowSense::kGreaterEqual) {
          sense[r] = RowSense::kLessEqual;
        }
      }
      if (sense[r] != RowSense::kEqual) ++slack_count;
      if (sense[r] != RowSense::kLessEqual) ++artificial_count;
    }
    first_artificial_ = n + slack_count;
    const Eigen::Index cols = first_artificial_ + artificial_count;
    tab_ = Matrix::Zero(m, cols + 1);
    basis_.assign(static_cast<std::size_t>(m), 0);
    std::vector<Eigen::Index> identity_col(static_cast<std::size_t>(m));
    Eigen::Index next_slack = n;
    Eigen::Index next_artificial = first_artificial_;
    for (Eigen::Index r = 0; r < m; ++r) {
      tab_.row(r).head(n) = flip[r] * lp.a.row(r);
      tab_(r, cols) = flip[r] * lp.b[r];
      if (sense[r] == RowSense::kLessEqual) {
        tab_(r, next_slack) = Scalar(1);
        basis_[r] = next_slack;
        identity_col[r] = next_slack++;
      } else {
        if (sense[r] == RowSense::kGreaterEqual) tab_(r, next_slack++) = Scalar(-1);
        tab_(r, next_artificial) = Scalar(1);
        basis_[r] = next_artificial;
        identity_col[r] = next_artificial++;
      }
    }

    // Phase 1: minimize the sum of artificials.
    if (artificial_count > 0) {
      Vector phase1_cost = Vector::Zero(cols);
      phase1_cost.tail(artificial_count).setOnes();
      price(phase1_cost);
      const SimplexStatus s = iterate(cols, out.pivots);
      if (s == SimplexStatus::kIterationLimit) {
        out.status = s;
        return out;
      }
      Scalar infeasibility = Scalar(0);
      for (Eigen::Index r = 0; r < m; ++r) {
        if (basis_[r] >= first_artificial_) infeasibility += tab_(r, cols);
      }
      const Scalar scale = Scalar(1) + lp.b.cwiseAbs().sum();
      if (infeasibility > Scalar(1e-9) * scale) {
        out.status = SimplexStatus::kInfeasible;
        return out;
      }
      drive_out_artificials(out.pivots);
    }

    // Phase 2: original costs; artificials may not re-enter.
    Vector cost = Vector::Zero(cols);
    cost.head(n) = lp.c;
    price(cost);
    const SimplexStatus s = iterate(first_artificial_, out.pivots);
    out.status = s;
    if (s != SimplexStatus::kOptimal) return out;

    out.x = Vector::Zero(n);
    for (Eigen::Index r = 0; r < m; ++r) {
      if (basis_[r] < n) out.x[basis_[r]] = tab_(r, cols);
    }
    out.objective = lp.c.dot(out.x);

    // y' = c_B' B^-1, where B^-1 sits in the identity columns.
    Vector c_basis(m);
    for (Eigen::Index r = 0; r < m; ++r) c_basis[r] = cost[basis_[r]];
    out.duals = Vector(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      out.duals[r] = flip[r] * c_basis.dot(tab_.col(identity_col[r]));
    }
    return out;
  }

 private:
  void price(const Vector& cost) {
    const Eigen::Index cols = tab_.cols() - 1;
    reduced_ = RowVector::Zero(cols + 1);
    reduced_.head(cols) = cost.transpose();
    for (Eigen::Index r = 0; r < tab_.rows(); ++r) {
      const Scalar cb = cost[basis_[r]];
      if (cb != Scalar(0)) reduced_ -= cb * tab_.row(r);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    tab_.row(row) /= tab_(row, col);
    Vector column = tab_.col(col);
    column[row] = Scalar(0);
    tab_.noalias() -= column * tab_.row(row);
    reduced_ -= reduced_[col] * tab_.row(row);
    basis_[row] = col;
  }

  // Columns [0, entering_limit) may enter the basis.
  SimplexStatus iterate(Eigen::Index entering_limit, int& pivots) {
    const Eigen::Index rhs = tab_.cols() - 1;
    int degenerate_run = 0;
    while (true) {
      if (pivots >= max_pivots_) return SimplexStatus::kIterationLimit;
      const bool bland = degenerate_run > 50;
      Eigen::Index entering = -1;
      Scalar most_negative = -tol_;
      for (Eigen::Index j = 0; j < entering_limit; ++j) {
        if (reduced_[j] < most_negative) {
          entering = j;
          if (bland) break;
          most_negative = reduced_[j];
        }
      }
      if (entering < 0) return SimplexStatus::kOptimal;

      Eigen::Index leaving = -1;
      Scalar best_ratio = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index r = 0; r < tab_.rows(); ++r) {
        const Scalar a = tab_(r, entering);
        if (a <= tol_) continue;
        const Scalar ratio = tab_(r, rhs) / a;
        if (ratio < best_ratio - tol_ ||
            (ratio <= best_ratio + tol_ && leaving >= 0 && basis_[r] < basis_[leaving])) {
          best_ratio = std::min(ratio, best_ratio);
          leaving = r;
        }
      }
      if (leaving < 0) return SimplexStatus::kUnbounded;
      degenerate_run = best_ratio <= tol_ ? degenerate_run + 1 : 0;
      pivot(leaving, entering);
      // Keep the basic solution primal feasible against round-off.
      for (Eigen::Index r = 0; r < tab_.rows(); ++r) {
        if (tab_(r, rhs) < Scalar(0) && tab_(r, rhs) > -tol_) tab_(r, rhs) = Scalar(0);
      }
      ++pivots;
    }
  }

  void drive_out_artificials(int& pivots) {
    for (Eigen::Index r = 0; r < tab_.rows(); ++r) {
      if (basis_[r] < first_artificial_) continue;
      Eigen::Index best = -1;
      Scalar best_abs = tol_;
      for (Eigen::Index j = 0; j < first_artificial_; ++j) {
        if (std::abs(tab_(r, j)) > best_abs) {
          best_abs = std::abs(tab_(r, j));
          best = j;
        }
      }
      // No candidate: the row is redundant and its artificial stays at 0.
      if (best >= 0) {
        pivot(r, best);
        ++pivots;
      }
    }
  }

  Scalar tol_;
  int max_pivots_;
  Matrix tab_;
  RowVector reduced_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index first_artificial_ = 0;
};

}  // namespace cate

#endif  // CATE_SIMPLEX_HPP_
