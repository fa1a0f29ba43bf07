#include "fpsi/fem/linear.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#ifdef FPSI_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

namespace fpsi {

EssentialConstraints::EssentialConstraints(const SpMat& A, std::vector<int> dofs) : dofs_(std::move(dofs)) {
  if (A.rows() != A.cols()) throw SolverError("essential constraints need a square matrix");
  std::sort(dofs_.begin(), dofs_.end());
  dofs_.erase(std::unique(dofs_.begin(), dofs_.end()), dofs_.end());
  const Eigen::Index n = A.rows();
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < dofs_.size(); ++i) {
    if (dofs_[i] < 0 || dofs_[i] >= n) throw SolverError("essential DOF " + std::to_string(dofs_[i]) + " out of range");
    slot[dofs_[i]] = static_cast<int>(i);
  }
  Triplets kept, cols;
  kept.reserve(static_cast<std::size_t>(A.nonZeros()));
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      const bool rc = slot[r] >= 0, cc = slot[c] >= 0;
      if (!rc && !cc) {
        kept.emplace_back(r, c, it.value());
      } else if (!rc && cc) {
        cols.emplace_back(r, slot[c], it.value());
      }
    }
  }
  for (int d : dofs_) kept.emplace_back(d, d, 1.0);
  reduced_.resize(n, n);
  reduced_.setFromTriplets(kept.begin(), kept.end());
  columns_.resize(n, static_cast<Eigen::Index>(dofs_.size()));
  columns_.setFromTriplets(cols.begin(), cols.end());
}

Eigen::VectorXd EssentialConstraints::lift(const Eigen::VectorXd& b, const Eigen::VectorXd& values) const {
  if (values.size() != static_cast<Eigen::Index>(dofs_.size())) {
    throw SolverError("essential values: expected " + std::to_string(dofs_.size()) + ", got " +
                      std::to_string(values.size()));
  }
  if (dofs_.empty()) return b;
  Eigen::VectorXd r = b - columns_ * values;
  for (std::size_t i = 0; i < dofs_.size(); ++i) r[dofs_[i]] = values[static_cast<Eigen::Index>(i)];
  return r;
}

SparseSystem apply_essential(const SparseSystem& system, const std::vector<int>& dofs,
                             const std::vector<double>& values) {
  if (dofs.size() != values.size()) throw SolverError("apply_essential: dofs and values differ in length");
  std::map<int, double> unique;
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    auto [it, inserted] = unique.emplace(dofs[i], values[i]);
    if (!inserted && it->second != values[i]) {
      throw SolverError("apply_essential: conflicting values for DOF " + std::to_string(dofs[i]));
    }
  }
  std::vector<int> d;
  Eigen::VectorXd g(static_cast<Eigen::Index>(unique.size()));
  for (const auto& [dof, v] : unique) {
    g[static_cast<Eigen::Index>(d.size())] = v;
    d.push_back(dof);
  }
  EssentialConstraints ec(system.matrix, d);
  return {ec.matrix(), ec.lift(system.rhs, g)};
}

struct DirectSolver::Impl {
#ifdef FPSI_HAVE_UMFPACK
  Eigen::UmfPackLU<SpMat> lu;
#else
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
#endif
  SpMat A;
  bool ready = false;
};

DirectSolver::DirectSolver(std::string label) : impl_(std::make_unique<Impl>()), label_(std::move(label)) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

const char* DirectSolver::backend() {
#ifdef FPSI_HAVE_UMFPACK
  return "umfpack";
#else
  return "eigen-sparselu";
#endif
}

void DirectSolver::factorize(const SpMat& A) {
  if (A.rows() != A.cols()) throw SolverError(label_ + ": matrix is not square");
  impl_->A = A;
  impl_->A.makeCompressed();
  impl_->lu.compute(impl_->A);
  impl_->ready = impl_->lu.info() == Eigen::Success;
  if (!impl_->ready) throw SolverError(label_ + ": factorization failed (singular matrix?)");
}

bool DirectSolver::factorized() const { return impl_->ready; }

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& b) const {
  if (!impl_->ready) throw SolverError(label_ + ": solve called before factorize");
  if (b.size() != impl_->A.rows()) throw SolverError(label_ + ": right-hand side has the wrong length");
  Eigen::VectorXd x = impl_->lu.solve(b);
  const double bound = tolerance * (1.0 + b.norm());
  Eigen::VectorXd r = b - impl_->A * x;
  for (int it = 0; it < 2 && !(r.norm() <= bound); ++it) {
    x += impl_->lu.solve(r);
    r = b - impl_->A * x;
  }
  if (!x.allFinite() || !(r.norm() <= bound)) {
    throw SolverError(label_ + ": residual " + std::to_string(r.norm()) + " exceeds tolerance " +
                      std::to_string(bound));
  }
  return x;
}

Eigen::VectorXd solve(const SparseSystem& system) {
  DirectSolver s;
  s.factorize(system.matrix);
  return s.solve(system.rhs);
}

}  // namespace fpsi
