#include "conelp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace switchid::conelp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

/// Packed-vector layout of the cone: orthant entries first, then one
/// svec-packed segment per PSD block.
struct Layout {
  int orthant = 0;
  std::vector<int> qs;
  std::vector<int> offsets;
  int dim = 0;

  explicit Layout(const ConeSpec& spec)
      : orthant(spec.orthant), qs(spec.psd_sizes) {
    int off = orthant;
    for (int q : qs) {
      offsets.push_back(off);
      off += svec_dim(q);
    }
    dim = off;
  }
};

/// Cholesky-like factor of a (nominally) positive definite small matrix.
/// Falls back to an eigenvalue-clamped symmetric factor near breakdown.
Mat psd_factor(const Mat& a) {
  const int q = static_cast<int>(a.rows());
  double jitter = 0.0;
  const double scale = std::max(a.diagonal().cwiseAbs().maxCoeff(), 1e-30);
  for (int attempt = 0; attempt < 3; ++attempt) {
    Mat work = a;
    if (jitter > 0.0) work.diagonal().array() += jitter;
    Eigen::LLT<Mat> llt(work);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = (jitter == 0.0) ? 1e-14 * scale : jitter * 100.0;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(a);
  Vec values = eig.eigenvalues().cwiseMax(1e-14 * scale);
  return eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
}

struct Scaling {
  Vec w;                      // orthant: sqrt(s_i / z_i)
  std::vector<Mat> r, r_inv;  // per PSD block
  Vec lambda;                 // packed scaled point (orthant + diag spectra)
};

Scaling compute_scaling(const Layout& cone, const Vec& s, const Vec& z) {
  Scaling sc;
  sc.lambda.resize(cone.dim);
  sc.w.resize(cone.orthant);
  for (int i = 0; i < cone.orthant; ++i) {
    sc.w(i) = std::sqrt(s(i) / z(i));
    sc.lambda(i) = std::sqrt(s(i) * z(i));
  }
  for (std::size_t blk = 0; blk < cone.qs.size(); ++blk) {
    const int q = cone.qs[blk];
    const int off = cone.offsets[blk];
    const int nv = svec_dim(q);
    const Mat sm = smat(s.segment(off, nv), q);
    const Mat zm = smat(z.segment(off, nv), q);
    const Mat ls = psd_factor(sm);
    const Mat lz = psd_factor(zm);
    Eigen::JacobiSVD<Mat> svd(lz.transpose() * ls,
                              Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec sig = svd.singularValues();
    const Vec sig_sqrt = sig.cwiseSqrt();
    sc.r.push_back(ls * svd.matrixV() * sig_sqrt.cwiseInverse().asDiagonal());
    sc.r_inv.push_back(sig_sqrt.asDiagonal() * svd.matrixV().transpose() *
                       ls.inverse());
    Mat lam_mat = Mat::Zero(q, q);
    lam_mat.diagonal() = sig;
    sc.lambda.segment(off, nv) = svec(lam_mat);
  }
  return sc;
}

enum class Op { kW, kWTranspose, kWInverseTranspose };

/// Applies the Nesterov-Todd scaling (or its transpose/inverse-transpose)
/// to a packed vector.
Vec apply_scaling(const Layout& cone, const Scaling& sc, const Vec& v, Op op) {
  Vec out(cone.dim);
  for (int i = 0; i < cone.orthant; ++i) {
    out(i) = (op == Op::kWInverseTranspose) ? v(i) / sc.w(i) : v(i) * sc.w(i);
  }
  for (std::size_t blk = 0; blk < cone.qs.size(); ++blk) {
    const int q = cone.qs[blk];
    const int off = cone.offsets[blk];
    const int nv = svec_dim(q);
    const Mat vm = smat(v.segment(off, nv), q);
    Mat result;
    switch (op) {
      case Op::kW:
        result = sc.r[blk].transpose() * vm * sc.r[blk];
        break;
      case Op::kWTranspose:
        result = sc.r[blk] * vm * sc.r[blk].transpose();
        break;
      case Op::kWInverseTranspose:
        result = sc.r_inv[blk] * vm * sc.r_inv[blk].transpose();
        break;
    }
    out.segment(off, nv) = svec(result);
  }
  return out;
}

/// Jordan product u o v on the packed cone space.
Vec jordan(const Layout& cone, const Vec& u, const Vec& v) {
  Vec out(cone.dim);
  for (int i = 0; i < cone.orthant; ++i) out(i) = u(i) * v(i);
  for (std::size_t blk = 0; blk < cone.qs.size(); ++blk) {
    const int q = cone.qs[blk];
    const int off = cone.offsets[blk];
    const int nv = svec_dim(q);
    const Mat um = smat(u.segment(off, nv), q);
    const Mat vm = smat(v.segment(off, nv), q);
    out.segment(off, nv) = svec(0.5 * (um * vm + vm * um));
  }
  return out;
}

/// Solves lambda o u = v for u, where lambda is the scaled point (diagonal
/// spectra on PSD blocks).
Vec lambda_divide(const Layout& cone, const Scaling& sc, const Vec& v) {
  Vec out(cone.dim);
  for (int i = 0; i < cone.orthant; ++i) out(i) = v(i) / sc.lambda(i);
  for (std::size_t blk = 0; blk < cone.qs.size(); ++blk) {
    const int q = cone.qs[blk];
    const int off = cone.offsets[blk];
    const int nv = svec_dim(q);
    const Mat vm = smat(v.segment(off, nv), q);
    const Mat lam = smat(sc.lambda.segment(off, nv), q);
    Mat um(q, q);
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        um(i, j) = 2.0 * vm(i, j) / (lam(i, i) + lam(j, j));
      }
    }
    out.segment(off, nv) = svec(um);
  }
  return out;
}

Vec cone_identity(const Layout& cone) {
  Vec e = Vec::Zero(cone.dim);
  e.head(cone.orthant).setOnes();
  for (std::size_t blk = 0; blk < cone.qs.size(); ++blk) {
    const int q = cone.qs[blk];
    e.segment(cone.offsets[blk], svec_dim(q)) = svec(Mat::Identity(q, q));
  }
  return e;
}

/// Largest step alpha with v + alpha * dv still in the cone (up to kInf).
double max_step(const Layout& cone, const Vec& v, const Vec& dv) {
  double step = kInf;
  for (int i = 0; i < cone.orthant; ++i) {
    if (dv(i) < 0.0) step = std::min(step, -v(i) / dv(i));
  }
  for (std::size_t blk = 0; blk < cone.qs.size(); ++blk) {
    const int q = cone.qs[blk];
    const int off = cone.offsets[blk];
    const int nv = svec_dim(q);
    const Mat vm = smat(v.segment(off, nv), q);
    const Mat dvm = smat(dv.segment(off, nv), q);
    const Mat l = psd_factor(vm);
    const Mat l_inv = l.inverse();
    Eigen::SelfAdjointEigenSolver<Mat> eig(l_inv * dvm * l_inv.transpose());
    const double eig_min = eig.eigenvalues().minCoeff();
    if (eig_min < 0.0) step = std::min(step, -1.0 / eig_min);
  }
  return step;
}

struct KktSystem {
  SpMat matrix;  // regularized
  Eigen::SimplicialLDLT<SpMat> ldlt;
  double reg = 0.0;
  int nx = 0, p = 0, m = 0;
  bool pattern_analyzed = false;

  /// d = K^{-1} rhs with iterative refinement against the unregularized K.
  Vec solve(const Vec& rhs) const {
    Vec d = ldlt.solve(rhs);
    for (int round = 0; round < 2; ++round) {
      Vec residual = rhs - matrix * d;
      // The regularization shifts +reg on the x block and -reg elsewhere;
      // undo it so refinement targets the unregularized system.
      residual.head(nx) += reg * d.head(nx);
      residual.tail(p + m) -= reg * d.tail(p + m);
      d += ldlt.solve(residual);
    }
    return d;
  }
};

bool assemble_and_factor(const Problem& prob, const Layout& cone,
                         const Scaling& sc, double reg, KktSystem& kkt) {
  const int nx = static_cast<int>(prob.c.size());
  const int p = static_cast<int>(prob.b.size());
  const int m = cone.dim;
  const int dim = nx + p + m;
  kkt.nx = nx;
  kkt.p = p;
  kkt.m = m;
  kkt.reg = reg;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * (prob.a.nonZeros() + prob.g.nonZeros()) + dim + 64);
  for (int i = 0; i < nx; ++i) trips.emplace_back(i, i, reg);
  for (int k = 0; k < prob.a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(prob.a, k); it; ++it) {
      trips.emplace_back(nx + static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()),
                         nx + static_cast<int>(it.row()), it.value());
    }
  }
  for (int i = 0; i < p; ++i) trips.emplace_back(nx + i, nx + i, -reg);
  for (int k = 0; k < prob.g.outerSize(); ++k) {
    for (SpMat::InnerIterator it(prob.g, k); it; ++it) {
      trips.emplace_back(nx + p + static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()),
                         nx + p + static_cast<int>(it.row()), it.value());
    }
  }
  // -W'W block: diagonal on the orthant, dense per PSD block.
  for (int i = 0; i < cone.orthant; ++i) {
    trips.emplace_back(nx + p + i, nx + p + i, -sc.w(i) * sc.w(i) - reg);
  }
  for (std::size_t blk = 0; blk < cone.qs.size(); ++blk) {
    const int q = cone.qs[blk];
    const int off = cone.offsets[blk];
    const int nv = svec_dim(q);
    const Mat t = sc.r[blk] * sc.r[blk].transpose();
    for (int col = 0; col < nv; ++col) {
      Vec unit = Vec::Zero(nv);
      unit(col) = 1.0;
      const Vec image = svec(t * smat(unit, q) * t);
      for (int row = 0; row < nv; ++row) {
        double value = -image(row);
        if (row == col) value -= reg;
        trips.emplace_back(nx + p + off + row, nx + p + off + col, value);
      }
    }
  }

  kkt.matrix.resize(dim, dim);
  kkt.matrix.setFromTriplets(trips.begin(), trips.end());
  if (!kkt.pattern_analyzed) {
    kkt.ldlt.analyzePattern(kkt.matrix);
    kkt.pattern_analyzed = true;
  }
  kkt.ldlt.factorize(kkt.matrix);
  return kkt.ldlt.info() == Eigen::Success;
}

/// Equality-constrained problem with no cone part: solve directly via
/// least squares instead of the interior-point iteration.
Solution solve_equality_only(const Problem& prob, double tol) {
  Solution sol;
  const int nx = static_cast<int>(prob.c.size());
  const Mat a = Mat(prob.a);
  Vec x = Vec::Zero(nx);
  if (a.rows() > 0) {
    x = a.colPivHouseholderQr().solve(prob.b);
    if ((a * x - prob.b).norm() > tol * (1.0 + prob.b.norm())) {
      sol.status = Status::kPrimalInfeasible;
      return sol;
    }
  } else if (prob.b.size() > 0) {
    sol.status = Status::kPrimalInfeasible;
    return sol;
  }
  Vec y(0);
  if (a.rows() > 0) {
    y = (a.transpose()).colPivHouseholderQr().solve(-prob.c);
  }
  const Vec dual_residual =
      (a.rows() > 0) ? Vec(prob.c + a.transpose() * y) : prob.c;
  if (dual_residual.norm() > tol * (1.0 + prob.c.norm())) {
    sol.status = Status::kDualInfeasible;
    return sol;
  }
  sol.status = Status::kOptimal;
  sol.x = x;
  sol.y = y;
  sol.z.resize(0);
  sol.s.resize(0);
  sol.primal_objective = prob.c.dot(x);
  sol.dual_objective = sol.primal_objective;
  return sol;
}

}  // namespace

int ConeSpec::packed_dim() const {
  int m = orthant;
  for (int q : psd_sizes) m += svec_dim(q);
  return m;
}

int ConeSpec::degree() const {
  int d = orthant;
  for (int q : psd_sizes) d += q;
  return d;
}

int svec_dim(int q) { return q * (q + 1) / 2; }

Vec svec(const Mat& m) {
  const int q = static_cast<int>(m.rows());
  Vec v(svec_dim(q));
  int idx = 0;
  for (int j = 0; j < q; ++j) {
    for (int i = j; i < q; ++i) {
      v(idx++) = (i == j) ? m(i, j) : 0.5 * kSqrt2 * (m(i, j) + m(j, i));
    }
  }
  return v;
}

Mat smat(const Vec& v, int q) {
  Mat m(q, q);
  int idx = 0;
  for (int j = 0; j < q; ++j) {
    for (int i = j; i < q; ++i) {
      const double value = (i == j) ? v(idx) : v(idx) / kSqrt2;
      m(i, j) = value;
      m(j, i) = value;
      ++idx;
    }
  }
  return m;
}

Solution solve(const Problem& prob, double tol, int max_iterations) {
  const int nx = static_cast<int>(prob.c.size());
  const int p = static_cast<int>(prob.b.size());
  const Layout cone(prob.cone);
  const int m = cone.dim;
  if (prob.g.rows() != m || prob.g.cols() != nx || prob.a.cols() != nx ||
      prob.a.rows() != p || prob.h.size() != m) {
    throw std::invalid_argument("conelp: inconsistent problem dimensions");
  }
  if (m == 0) return solve_equality_only(prob, tol);

  const double nu = prob.cone.degree();
  const Vec e = cone_identity(cone);
  const double norm_b = 1.0 + prob.b.norm();
  const double norm_h = 1.0 + prob.h.norm();
  const double norm_c = 1.0 + prob.c.norm();

  Vec x = Vec::Zero(nx), y = Vec::Zero(p);
  Vec s = e, z = e;
  double tau = 1.0, kappa = 1.0;

  Solution sol;
  KktSystem kkt;
  double reg = 1e-8;

  const auto scaled_candidate = [&]() {
    sol.x = x / tau;
    sol.y = y / tau;
    sol.z = z / tau;
    sol.s = s / tau;
    sol.primal_objective = prob.c.dot(sol.x);
    sol.dual_objective = -(prob.b.dot(sol.y) + prob.h.dot(sol.z));
  };

  for (int iter = 0; iter < max_iterations; ++iter) {
    sol.iterations = iter;

    const Vec rx = prob.a.transpose() * y + prob.g.transpose() * z + prob.c * tau;
    const Vec ry = prob.a * x - prob.b * tau;
    const Vec rz = prob.g * x + s - prob.h * tau;
    const double rtau = kappa + prob.c.dot(x) + prob.b.dot(y) + prob.h.dot(z);
    const double gap = s.dot(z);
    const double mu = (gap + tau * kappa) / (nu + 1.0);

    // Optimality of the scaled candidate.
    const double pcost = prob.c.dot(x) / tau;
    const double dcost = -(prob.b.dot(y) + prob.h.dot(z)) / tau;
    const double pres = std::max(ry.norm() / norm_b, rz.norm() / norm_h) / tau;
    const double dres = rx.norm() / norm_c / tau;
    const double relgap =
        (gap / (tau * tau)) / std::max({1.0, std::abs(pcost), std::abs(dcost)});
    if (pres <= tol && dres <= tol && relgap <= tol) {
      sol.status = Status::kOptimal;
      scaled_candidate();
      return sol;
    }

    // Infeasibility certificates.
    const double by_hz = prob.b.dot(y) + prob.h.dot(z);
    if (by_hz < 0.0) {
      const Vec dual_dir = prob.a.transpose() * y + prob.g.transpose() * z;
      if (dual_dir.norm() / norm_c <= tol * (-by_hz)) {
        sol.status = Status::kPrimalInfeasible;
        sol.y = y / (-by_hz);
        sol.z = z / (-by_hz);
        return sol;
      }
    }
    const double cx = prob.c.dot(x);
    if (cx < 0.0) {
      const double primal_dir = std::max((prob.a * x).norm() / norm_b,
                                         (prob.g * x + s).norm() / norm_h);
      if (primal_dir <= tol * (-cx)) {
        sol.status = Status::kDualInfeasible;
        sol.x = x / (-cx);
        return sol;
      }
    }

    const Scaling sc = compute_scaling(cone, s, z);
    bool factored = false;
    for (int attempt = 0; attempt < 3 && !factored; ++attempt) {
      factored = assemble_and_factor(prob, cone, sc, reg, kkt);
      if (!factored) reg *= 100.0;
    }
    if (!factored) break;

    Vec rhs1(nx + p + m);
    rhs1.head(nx) = -prob.c;
    rhs1.segment(nx, p) = prob.b;
    rhs1.tail(m) = prob.h;
    const Vec d1 = kkt.solve(rhs1);

    const auto combined_dot = [&](const Vec& d) {
      // c'dx + b'dy + h'dz with d = (dx, dy, dz)
      return prob.c.dot(d.head(nx)) + prob.b.dot(d.segment(nx, p)) +
             prob.h.dot(d.tail(m));
    };

    const Vec lamsq = jordan(cone, sc.lambda, sc.lambda);

    // One Newton solve for a given residual weight and complementarity rhs.
    struct Direction {
      Vec dx, dy, dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    const auto newton = [&](double sigma_weight, const Vec& comp_rhs,
                            double comp_tau_rhs) {
      Direction dir;
      const Vec g_vec = lambda_divide(cone, sc, comp_rhs);
      const Vec wt_g = apply_scaling(cone, sc, g_vec, Op::kWTranspose);
      Vec rhs0(nx + p + m);
      rhs0.head(nx) = -sigma_weight * rx;
      rhs0.segment(nx, p) = -sigma_weight * ry;
      rhs0.tail(m) = -sigma_weight * rz - wt_g;
      const Vec d0 = kkt.solve(rhs0);
      const double denom = combined_dot(d1) - kappa / tau;
      const double numer =
          -sigma_weight * rtau - combined_dot(d0) - comp_tau_rhs / tau;
      dir.dtau = numer / denom;
      Vec d = d0 + dir.dtau * d1;
      dir.dx = d.head(nx);
      dir.dy = d.segment(nx, p);
      dir.dz = d.tail(m);
      const Vec w_dz = apply_scaling(cone, sc, dir.dz, Op::kW);
      dir.ds = apply_scaling(cone, sc, g_vec - w_dz, Op::kWTranspose);
      dir.dkappa = (comp_tau_rhs - kappa * dir.dtau) / tau;
      return dir;
    };

    // Predictor (affine) step.
    const Direction aff = newton(1.0, -lamsq, -tau * kappa);
    double alpha_aff = std::min({max_step(cone, s, aff.ds),
                                 max_step(cone, z, aff.dz),
                                 aff.dtau < 0 ? -tau / aff.dtau : kInf,
                                 aff.dkappa < 0 ? -kappa / aff.dkappa : kInf});
    alpha_aff = std::min(alpha_aff, 1.0);
    const double mu_aff =
        ((s + alpha_aff * aff.ds).dot(z + alpha_aff * aff.dz) +
         (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa)) /
        (nu + 1.0);
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector (combined) step.
    const Vec w_inv_ds = apply_scaling(cone, sc, aff.ds, Op::kWInverseTranspose);
    const Vec w_dz = apply_scaling(cone, sc, aff.dz, Op::kW);
    const Vec correction = jordan(cone, w_inv_ds, w_dz);
    const Vec comp_rhs = sigma * mu * e - lamsq - correction;
    const double comp_tau_rhs =
        sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
    const Direction dir = newton(1.0 - sigma, comp_rhs, comp_tau_rhs);

    double alpha = std::min({max_step(cone, s, dir.ds),
                             max_step(cone, z, dir.dz),
                             dir.dtau < 0 ? -tau / dir.dtau : kInf,
                             dir.dkappa < 0 ? -kappa / dir.dkappa : kInf});
    alpha = std::min(0.99 * alpha, 1.0);
    if (!std::isfinite(alpha) || alpha <= 0.0) break;

    x += alpha * dir.dx;
    y += alpha * dir.dy;
    z += alpha * dir.dz;
    s += alpha * dir.ds;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
    if (tau < 1e-13) break;
  }

  sol.status = Status::kIterationLimit;
  scaled_candidate();
  return sol;
}

}  // namespace switchid::conelp
