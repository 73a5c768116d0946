#include "interdyn/sparsify.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

#include "interdyn/error.hpp"

namespace interdyn {

std::string to_string(SparsifyMethod method) {
  return method == SparsifyMethod::kAdmm ? "admm" : "subgradient";
}

SparsifyMethod parse_sparsify_method(const std::string& name) {
  if (name == "admm") return SparsifyMethod::kAdmm;
  if (name == "subgradient") return SparsifyMethod::kSubgradient;
  throw InvalidArgument("unknown sparsify method '" + name + "' (expected admm or subgradient)");
}

void SparsifyConfig::validate() const {
  if (max_iters == 0) throw InvalidArgument("sparsify max_iters must be positive");
  if (!(step_size > 0.0)) throw InvalidArgument("sparsify step_size must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("sparsify tol must be positive");
  if (!(penalty > 0.0)) throw InvalidArgument("sparsify penalty must be positive");
}

namespace {

// The interaction vector is affine in gamma: I(gamma) = K gamma + c, with
//   K gamma = [ Mobius(gamma) ; Mobius(P gamma) ]   (empty-set rows dropped)
//   c       = [ I_and(0)      ; I_or(0)         ]
// where P maps S -> N \ S. Both blocks are stored as length-2^n vectors with
// entry 0 pinned to zero.
struct LinearMap {
  std::size_t size;

  void apply(const std::vector<double>& gamma, std::vector<double>& out_and,
             std::vector<double>& out_or) const {
    out_and = gamma;
    subset_mobius(out_and);
    out_and[0] = 0.0;
    out_or = complement_permute(gamma);
    subset_mobius(out_or);
    out_or[0] = 0.0;
  }

  std::vector<double> apply_transpose(std::vector<double> y_and, std::vector<double> y_or) const {
    y_and[0] = 0.0;
    y_or[0] = 0.0;
    superset_mobius(y_and);
    superset_mobius(y_or);
    std::vector<double> out = complement_permute(y_or);
    for (std::size_t i = 0; i < size; ++i) out[i] += y_and[i];
    return out;
  }
};

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double total = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) total += std::abs(a[i]) + std::abs(b[i]);
  return total;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Exact solver for (K^T K + beta 1 1^T) x = rhs. Without the dropped
// empty-set rows, K^T K = (x)A + (x)B over the n bits with
//   A = [[2, -1], [-1, 1]]  (AND block),  B = [[1, -1], [-1, 2]]  (OR block).
// A congruence S with S^T A S = I and S^T B S = diag(d) turns that into
// S^-T (I + (x)diag(d)) S^-1. The two dropped rows remove e_0 e_0^T and
// e_N e_N^T; constant gamma is then in the null space, which beta 1 1^T fills.
// All three rank-one terms go through a 3x3 Woodbury correction.
class GramSolver {
 public:
  explicit GramSolver(const LinearMap& map) : map_(map), size_(map.size) {
    // Cholesky of A, then the eigenvectors of L^-1 B L^-T.
    const double l00 = std::sqrt(2.0), l10 = -1.0 / l00, l11 = std::sqrt(1.0 - l10 * l10);
    // C = L^-1 B L^-T for B = [[1,-1],[-1,2]].
    const double i00 = 1.0 / l00, i10 = -l10 / (l00 * l11), i11 = 1.0 / l11;
    const double c00 = i00 * i00 * 1.0;
    const double c01 = i00 * (i10 * 1.0 + i11 * -1.0);
    const double c11 = i10 * i10 * 1.0 + 2.0 * i10 * i11 * -1.0 + i11 * i11 * 2.0;
    const double mean = 0.5 * (c00 + c11);
    const double radius = std::hypot(0.5 * (c00 - c11), c01);
    const double d[2] = {mean - radius, mean + radius};
    double q[2][2];
    for (int k = 0; k < 2; ++k) {
      double v0 = c01, v1 = d[k] - c00;
      if (std::abs(v0) + std::abs(v1) < 1e-300) {
        v0 = 1.0;
        v1 = 0.0;
      }
      const double norm = std::hypot(v0, v1);
      q[0][k] = v0 / norm;
      q[1][k] = v1 / norm;
    }
    // S = L^-T Q.
    for (int k = 0; k < 2; ++k) {
      s_[0][k] = i00 * q[0][k] + i10 * q[1][k];
      s_[1][k] = i11 * q[1][k];
    }
    const int n = std::popcount(size_ - 1);
    inverse_diag_.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      const int k = std::popcount(i);
      inverse_diag_[i] = 1.0 / (1.0 + std::pow(d[0], n - k) * std::pow(d[1], k));
    }

    beta_ = 1.0 / static_cast<double>(size_);
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<double> u(size_, 0.0);
      if (j == 0) u[0] = 1.0;
      if (j == 1) u[size_ - 1] = 1.0;
      if (j == 2) std::fill(u.begin(), u.end(), 1.0);
      z_[j] = base_inverse(u);
    }
    double small[3][3];
    const double w_inverse[3] = {-1.0, -1.0, 1.0 / beta_};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto ut_z = project(z_[i]);
      for (std::size_t j = 0; j < 3; ++j) small[j][i] = ut_z[j] + (i == j ? w_inverse[i] : 0.0);
    }
    invert3(small, small_inverse_);
  }

  std::vector<double> solve(const std::vector<double>& rhs) const {
    std::vector<double> x = solve_once(rhs);
    // One step of iterative refinement.
    std::vector<double> a, o;
    map_.apply(x, a, o);
    std::vector<double> r = map_.apply_transpose(std::move(a), std::move(o));
    double total = 0.0;
    for (double v : x) total += v;
    for (std::size_t i = 0; i < size_; ++i) r[i] = rhs[i] - r[i] - beta_ * total;
    const std::vector<double> dx = solve_once(r);
    for (std::size_t i = 0; i < size_; ++i) x[i] += dx[i];
    return x;
  }

 private:
  // Applies (x)M for a 2x2 M to v in place.
  static void kron_apply(const double m[2][2], std::vector<double>& v) {
    for (std::size_t bit = 1; bit < v.size(); bit <<= 1) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i & bit) continue;
        const double lo = v[i], hi = v[i | bit];
        v[i] = m[0][0] * lo + m[0][1] * hi;
        v[i | bit] = m[1][0] * lo + m[1][1] * hi;
      }
    }
  }

  // (K^T K without the row removals)^-1 v = (x)S diag (x)S^T v.
  std::vector<double> base_inverse(std::vector<double> v) const {
    const double st[2][2] = {{s_[0][0], s_[1][0]}, {s_[0][1], s_[1][1]}};
    kron_apply(st, v);
    for (std::size_t i = 0; i < size_; ++i) v[i] *= inverse_diag_[i];
    kron_apply(s_, v);
    return v;
  }

  std::array<double, 3> project(const std::vector<double>& v) const {
    double total = 0.0;
    for (double x : v) total += x;
    return {v[0], v[size_ - 1], total};
  }

  std::vector<double> solve_once(const std::vector<double>& rhs) const {
    std::vector<double> y = base_inverse(rhs);
    const auto t = project(y);
    for (std::size_t j = 0; j < 3; ++j) {
      double coefficient = 0.0;
      for (std::size_t k = 0; k < 3; ++k) coefficient += small_inverse_[j][k] * t[k];
      for (std::size_t i = 0; i < size_; ++i) y[i] -= coefficient * z_[j][i];
    }
    return y;
  }

  static void invert3(const double m[3][3], double out[3][3]) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (!(std::abs(det) > 0.0)) throw NumericError("sparsify: singular normal equations");
    out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    out[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    out[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    out[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    out[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    out[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    out[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  }

  const LinearMap& map_;
  std::size_t size_;
  double s_[2][2];
  std::vector<double> inverse_diag_;
  double beta_ = 0.0;
  std::array<std::vector<double>, 3> z_;
  double small_inverse_[3][3];
};

bool window_converged(const std::vector<double>& trace, double tol) {
  if (trace.size() <= kConvergenceWindow) return false;
  const double before = trace[trace.size() - 1 - kConvergenceWindow];
  const double now = trace.back();
  return before - now <= tol * std::max(before, 1e-300);
}

}  // namespace

double objective(const MaskedOutputTable& table, const GammaVector& gamma) {
  const InteractionDecomposition d = decompose(table, gamma);
  return l1(d.i_and, d.i_or);
}

SparsifyResult sparsify(const MaskedOutputTable& table, const SparsifyConfig& config) {
  config.validate();
  table.validate();
  const std::size_t size = table.values.size();
  const LinearMap map{size};

  const InteractionDecomposition start = decompose(table, GammaVector::zeros(table.n));
  std::vector<double> c_and = start.i_and;
  std::vector<double> c_or = start.i_or;

  SparsifyResult result;
  result.gamma = GammaVector::zeros(table.n);
  const double initial = l1(c_and, c_or);
  if (!std::isfinite(initial)) throw NumericError("sparsify: objective is not finite");
  result.objective_trace.push_back(initial);
  result.final_objective = initial;

  double scale = 0.0;
  for (std::size_t i = 1; i < size; ++i) scale = std::max({scale, std::abs(c_and[i]), std::abs(c_or[i])});
  if (scale == 0.0) {
    result.converged = true;
    return result;
  }
  // Work on the table divided by `scale`; the objective is positively
  // homogeneous, so the optimal gamma scales back linearly.
  for (std::size_t i = 0; i < size; ++i) {
    c_and[i] /= scale;
    c_or[i] /= scale;
  }

  std::vector<double> gamma(size, 0.0);
  std::vector<double> best_gamma = gamma;
  double best = initial / scale;
  std::vector<double> r_and, r_or;
  auto residual = [&](const std::vector<double>& g) {
    map.apply(g, r_and, r_or);
    for (std::size_t i = 0; i < size; ++i) {
      r_and[i] += c_and[i];
      r_or[i] += c_or[i];
    }
  };
  auto record = [&](double value) {
    if (!std::isfinite(value)) throw NumericError("sparsify: objective became non-finite");
    if (value < best) {
      best = value;
      best_gamma = gamma;
    }
    result.objective_trace.push_back(best * scale);
    ++result.iterations;
  };

  if (config.method == SparsifyMethod::kAdmm) {
    const GramSolver solver(map);
    std::vector<double> z_and = c_and, z_or = c_or;
    std::vector<double> u_and(size, 0.0), u_or(size, 0.0);
    const double threshold = 1.0 / config.penalty;
    for (std::size_t it = 0; it < config.max_iters; ++it) {
      std::vector<double> t_and(size), t_or(size);
      for (std::size_t i = 0; i < size; ++i) {
        t_and[i] = z_and[i] - c_and[i] - u_and[i];
        t_or[i] = z_or[i] - c_or[i] - u_or[i];
      }
      gamma = solver.solve(map.apply_transpose(std::move(t_and), std::move(t_or)));
      residual(gamma);
      double primal = 0.0;
      for (std::size_t i = 1; i < size; ++i) {
        z_and[i] = soft_threshold(r_and[i] + u_and[i], threshold);
        z_or[i] = soft_threshold(r_or[i] + u_or[i], threshold);
        u_and[i] += r_and[i] - z_and[i];
        u_or[i] += r_or[i] - z_or[i];
        primal = std::max({primal, std::abs(r_and[i] - z_and[i]), std::abs(r_or[i] - z_or[i])});
      }
      record(l1(r_and, r_or));
      if (primal <= 1e-6 && window_converged(result.objective_trace, config.tol)) {
        result.converged = true;
        break;
      }
    }
  } else {
    for (std::size_t it = 0; it < config.max_iters; ++it) {
      residual(gamma);
      std::vector<double> s_and(size), s_or(size);
      for (std::size_t i = 0; i < size; ++i) {
        s_and[i] = sign(r_and[i]);
        s_or[i] = sign(r_or[i]);
      }
      const std::vector<double> grad = map.apply_transpose(std::move(s_and), std::move(s_or));
      const double step = config.step_size / std::sqrt(1.0 + static_cast<double>(it));
      for (std::size_t i = 0; i < size; ++i) gamma[i] -= step * grad[i];
      residual(gamma);
      record(l1(r_and, r_or));
      if (window_converged(result.objective_trace, config.tol)) {
        result.converged = true;
        break;
      }
    }
  }

  result.gamma.values.resize(size);
  for (std::size_t i = 0; i < size; ++i) result.gamma.values[i] = best_gamma[i] * scale;
  // Report the objective of the returned gamma, evaluated on the original
  // table, so final_objective and gamma always agree.
  result.final_objective = objective(table, result.gamma);
  return result;
}

InteractionDecomposition decompose_sparse(const MaskedOutputTable& table,
                                          const SparsifyConfig& config, SparsifyResult* result) {
  SparsifyResult local = sparsify(table, config);
  InteractionDecomposition d = decompose(table, local.gamma);
  if (result != nullptr) *result = std::move(local);
  return d;
}

}  // namespace interdyn
