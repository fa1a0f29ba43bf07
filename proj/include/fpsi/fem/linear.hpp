#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "fpsi/fem/assembly.hpp"

namespace fpsi {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix plus right-hand side.
struct SparseSystem {
  SpMat matrix;
  Eigen::VectorXd rhs;
};

/// Symmetric elimination of essential DOFs. The constrained rows and
/// columns are replaced by the identity and the eliminated columns are kept
/// so the right-hand side can be lifted again for new boundary values.
class EssentialConstraints {
 public:
  EssentialConstraints() = default;
  EssentialConstraints(const SpMat& A, std::vector<int> dofs);

  const SpMat& matrix() const { return reduced_; }
  const std::vector<int>& dofs() const { return dofs_; }
  bool empty() const { return dofs_.empty(); }

  /// b - A(:, D) g on free rows, g on constrained rows.
  Eigen::VectorXd lift(const Eigen::VectorXd& b, const Eigen::VectorXd& values) const;

 private:
  SpMat reduced_;
  SpMat columns_;  // A restricted to free rows and constrained columns (n x |D|)
  std::vector<int> dofs_;
};

/// One-shot application: duplicate DOFs must carry identical values.
SparseSystem apply_essential(const SparseSystem& system, const std::vector<int>& dofs,
                             const std::vector<double>& values);

/// Sparse direct solver with cached factorization. Backed by UMFPACK when
/// available, otherwise by Eigen's SparseLU.
class DirectSolver {
 public:
  explicit DirectSolver(std::string label = "system");
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  void factorize(const SpMat& A);
  bool factorized() const;
  /// Solves with the cached factors; checks ||Ax - b|| <= tol (1 + ||b||)
  /// and applies up to two steps of iterative refinement if needed.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  const std::string& label() const { return label_; }
  static const char* backend();

  double tolerance = 1e-10;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string label_;
};

/// Factorize-and-solve convenience wrapper.
Eigen::VectorXd solve(const SparseSystem& system);

}  // namespace fpsi
