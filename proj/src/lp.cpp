#include "branchpath/lp.hpp"

#include <limits>
#include <vector>

#include "branchpath/error.hpp"

namespace branchpath::lp {
namespace {

constexpr double kEps = 1e-11;
constexpr int kDegenerateRunBeforeBland = 50;

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
      : m_(A.rows()), n_(A.cols()), t_(Eigen::MatrixXd::Zero(A.rows() + 1, A.cols() + A.rows() + 1)), basis_(m_) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
      basis_[i] = n_ + i;
    }
  }

  Eigen::Index rhs() const { return n_ + m_; }

  void set_objective(const Eigen::VectorXd& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(cost.size()) = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = basis_[i] < cost.size() ? cost(basis_[i]) : 0.0;
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Runs pivots over columns [0, allowed). Returns false on unboundedness.
  bool optimize(Eigen::Index allowed) {
    int degenerate_run = 0;
    for (;;) {
      const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
      Eigen::Index enter = -1;
      double best = -kEps;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t_(m_, j) < best) {
          enter = j;
          if (bland) break;
          best = t_(m_, j);
        }
      }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= kEps) continue;
        const double r = t_(i, rhs()) / a;
        if (r < ratio - kEps || (r <= ratio + kEps && leave >= 0 && basis_[i] < basis_[leave])) {
          ratio = r;
          leave = i;
        }
      }
      if (leave < 0) return false;
      degenerate_run = ratio <= kEps ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    const Eigen::RowVectorXd pivot_row = t_.row(r);
    Eigen::VectorXd col = t_.col(c);
    col(r) = 0.0;
    t_.noalias() -= col * pivot_row;
    basis_[r] = c;
  }

  // Pivots artificial columns out of the basis where possible.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  double objective() const { return -t_(m_, rhs()); }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) x(basis_[i]) = t_(i, rhs());
    return x;
  }

  Eigen::Index cols() const { return n_; }
  Eigen::Index rows() const { return m_; }

 private:
  Eigen::Index m_, n_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

Solution minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  if (A.rows() != b.size() || A.cols() != c.size()) throw Error(ErrorKind::DimensionMismatch, "lp shapes");
  if (!A.allFinite() || !b.allFinite() || !c.allFinite()) throw Error(ErrorKind::NonFinite, "lp data");

  Tableau tab(A, b);
  const Eigen::Index n = A.cols(), m = A.rows();
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.set_objective(phase1);
  tab.optimize(n + m);
  const double scale = 1.0 + b.cwiseAbs().sum();
  if (tab.objective() > 1e-9 * scale) throw Error(ErrorKind::Infeasible, "linear program has no feasible point");
  tab.expel_artificials();

  tab.set_objective(c);
  if (!tab.optimize(n)) throw Error(ErrorKind::InvalidArgument, "linear program is unbounded");
  Solution s;
  s.x = tab.primal();
  s.value = c.dot(s.x);
  return s;
}

}  // namespace branchpath::lp
