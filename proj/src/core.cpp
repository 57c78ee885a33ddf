#include "switchid/core.hpp"

#include <cmath>
#include <limits>

namespace switchid {

namespace {

void append_exponents_of_degree(int n, int degree, std::vector<int>& prefix,
                                std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == n - 1) {
    prefix.push_back(degree);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  // Descending first exponent yields descending lexicographic order within
  // a fixed total degree.
  for (int e = degree; e >= 0; --e) {
    prefix.push_back(e);
    append_exponents_of_degree(n, degree - e, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::uint64_t basis_size(int n, int d) {
  if (n < 1) throw std::invalid_argument("basis_size: need n >= 1");
  if (d < 0) throw std::invalid_argument("basis_size: need d >= 0");
  // binomial(n + d, d) via the multiplicative formula with overflow checks.
  std::uint64_t result = 1;
  for (int i = 1; i <= d; ++i) {
    const std::uint64_t factor = static_cast<std::uint64_t>(n) + i;
    if (result > std::numeric_limits<std::uint64_t>::max() / factor) {
      throw CapacityError("basis_size: binomial(n + d, d) overflows 64 bits");
    }
    result = result * factor / i;
  }
  return result;
}

MonomialBasis MonomialBasis::create(int n, int d) {
  const std::uint64_t count = basis_size(n, d);
  // Guard allocation: anything near this bound is unusable downstream anyway.
  constexpr std::uint64_t kMaxTerms = 10'000'000;
  if (count > kMaxTerms) {
    throw CapacityError("MonomialBasis: basis with " + std::to_string(count) +
                        " terms exceeds the supported size");
  }
  MonomialBasis basis;
  basis.n = n;
  basis.d = d;
  basis.exponents.reserve(static_cast<std::size_t>(count));
  std::vector<int> prefix;
  for (int degree = 0; degree <= d; ++degree) {
    append_exponents_of_degree(n, degree, prefix, basis.exponents);
  }
  return basis;
}

int MonomialBasis::linear_index(int k) const {
  if (k < 0 || k >= n) {
    throw std::invalid_argument("linear_index: variable index out of range");
  }
  for (int idx = 0; idx < size(); ++idx) {
    const auto& e = exponents[idx];
    int total = 0;
    for (int v = 0; v < n; ++v) total += e[v];
    if (total == 1 && e[k] == 1) return idx;
  }
  return -1;
}

Vec eval_basis(const MonomialBasis& basis, const Vec& z) {
  if (z.size() != basis.n) {
    throw std::invalid_argument("eval_basis: state dimension mismatch");
  }
  // Precompute z_i^k for all needed powers; features are then products.
  Mat powers(basis.n, basis.d + 1);
  for (int i = 0; i < basis.n; ++i) {
    powers(i, 0) = 1.0;
    for (int k = 1; k <= basis.d; ++k) powers(i, k) = powers(i, k - 1) * z(i);
  }
  Vec phi(basis.size());
  for (int idx = 0; idx < basis.size(); ++idx) {
    double value = 1.0;
    for (int i = 0; i < basis.n; ++i) {
      value *= powers(i, basis.exponents[idx][i]);
    }
    phi(idx) = value;
  }
  return phi;
}

Vec eval_mode(const ModeDynamics& mode, const MonomialBasis& basis,
              const Vec& z) {
  if (mode.coeffs.cols() != basis.size()) {
    throw std::invalid_argument("eval_mode: coefficient/basis size mismatch");
  }
  return mode.coeffs * eval_basis(basis, z);
}

Vec SurfaceSet::values(const Vec& z) const {
  const Vec phi = eval_basis(basis, z);
  Vec out(count());
  for (int l = 0; l < count(); ++l) out(l) = surfaces[l].dot(phi);
  return out;
}

SurfaceSet SurfaceSet::normalized() const {
  SurfaceSet out = *this;
  for (Vec& a : out.surfaces) {
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale > 0.0) a /= scale;
  }
  return out;
}

bool Dataset::fully_labeled() const {
  if (samples.empty()) return false;
  for (const Sample& s : samples) {
    if (!s.true_mode.has_value()) return false;
  }
  return true;
}

std::pair<Vec, double> residual_l1(const Sample& sample,
                                   const std::vector<ModeDynamics>& modes,
                                   const MonomialBasis& basis,
                                   const Vec& lambda) {
  const int m = static_cast<int>(modes.size());
  if (lambda.size() != m) {
    throw std::invalid_argument("residual_l1: lambda size != mode count");
  }
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    if (lambda(j) < -kSimplexTol) {
      throw std::invalid_argument("residual_l1: lambda has a negative entry");
    }
    sum += lambda(j);
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw std::invalid_argument("residual_l1: lambda does not sum to one");
  }
  const Vec phi = eval_basis(basis, sample.z);
  Vec residual = sample.zdot;
  for (int j = 0; j < m; ++j) {
    residual.noalias() -= lambda(j) * (modes[j].coeffs * phi);
  }
  return {residual, residual.lpNorm<1>()};
}

int region_mode(const SurfaceSet& surfaces, const ModeBook& modebook,
                const Vec& z) {
  const int L = surfaces.count();
  if (L == 0) throw std::invalid_argument("region_mode: no surfaces");
  if (modebook.surface_count() != L) {
    throw std::invalid_argument(
        "region_mode: modebook code length != surface count");
  }
  const Vec values = surfaces.values(z);
  std::vector<int> pattern(L);
  for (int l = 0; l < L; ++l) pattern[l] = values(l) >= 0.0 ? 1 : -1;

  int best = 0;
  int best_distance = L + 1;
  for (int j = 0; j < modebook.mode_count(); ++j) {
    int distance = 0;
    for (int l = 0; l < L; ++l) {
      if (modebook.codes[j][l] != pattern[l]) ++distance;
    }
    if (distance == 0) return j;
    if (distance < best_distance) {
      best_distance = distance;
      best = j;
    }
  }
  return best;
}

}  // namespace switchid
