#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

// Self-dual embedding interior-point solver for cone programs
//
//   minimize    c'x
//   subject to  A x = b,
//               G x + s = h,   s in K,
//
// where K is a product of a nonnegative orthant and small dense positive
// semidefinite blocks (stored in scaled-packed "svec" form). Nesterov-Todd
// scaling, Mehrotra predictor-corrector steps, and a homogeneous embedding
// so infeasibility and unboundedness come out as certificates rather than
// solver failures.

namespace switchid::conelp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

struct ConeSpec {
  int orthant = 0;
  std::vector<int> psd_sizes;

  int packed_dim() const;
  /// Barrier degree: orthant count plus the sum of PSD block orders.
  int degree() const;
};

enum class Status {
  kOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kIterationLimit,
};

struct Problem {
  Vec c;
  SpMat a;  // p x n
  Vec b;
  SpMat g;  // m x n, m = cone.packed_dim()
  Vec h;
  ConeSpec cone;
};

struct Solution {
  Status status = Status::kIterationLimit;
  Vec x;
  Vec y;
  Vec z;
  Vec s;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
};

Solution solve(const Problem& problem, double tol, int max_iterations = 100);

/// Packed dimension of a q x q symmetric matrix.
int svec_dim(int q);

/// Scaled packing of a symmetric matrix (column-major lower triangle,
/// off-diagonal entries multiplied by sqrt(2)) so that the Euclidean inner
/// product of packed vectors equals the Frobenius inner product.
Vec svec(const Mat& m);

/// Inverse of svec.
Mat smat(const Vec& v, int q);

}  // namespace switchid::conelp
