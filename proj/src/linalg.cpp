#include "qnn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qnn/error.hpp"

namespace qnn {

namespace {

void require_finite(const Matrix& m, const char* op) {
  if (!all_finite(m)) throw Error(ErrorKind::NonFiniteInput, std::string(op) + ": non-finite entry");
}

// Jacobi sweeps on a matrix with at least as many rows as columns.
Svd jacobi_svd_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix u = a;
  Matrix v = Matrix::identity(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_sweeps = 100;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          alpha += u(r, p) * u(r, p);
          beta += u(r, q) * u(r, q);
          gamma += u(r, p) * u(r, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          const double up = u(r, p);
          const double uq = u(r, q);
          u(r, p) = c * up - s * uq;
          u(r, q) = s * up + c * uq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vp = v(r, p);
          const double vq = v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(u.column_vector(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Svd out{Matrix(m, n), Vector(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.s[j] = sigma[src];
    for (std::size_t r = 0; r < m; ++r) out.u(r, j) = sigma[src] > 0.0 ? u(r, src) / sigma[src] : 0.0;
    for (std::size_t r = 0; r < n; ++r) out.v(r, j) = v(r, src);
  }
  return out;
}

}  // namespace

CompleteQR complete_qr(const Matrix& m) {
  require_finite(m, "complete_qr");
  const std::size_t n = m.rows();
  const std::size_t c = m.cols();
  const std::size_t k = std::min(n, c);
  Matrix a = m;
  Matrix q = Matrix::identity(n);
  const std::size_t steps = n == 0 ? 0 : std::min(n - 1, c);

  Vector v;
  for (std::size_t j = 0; j < steps; ++j) {
    double below = 0.0;
    for (std::size_t i = j + 1; i < n; ++i) below += a(i, j) * a(i, j);
    if (below == 0.0) continue;  // column already reduced; only the sign fix may apply

    v.assign(n - j, 0.0);
    for (std::size_t i = j; i < n; ++i) v[i - j] = a(i, j);
    const double alpha = norm2(v);
    const double beta = a(j, j) >= 0.0 ? -alpha : alpha;
    v[0] -= beta;
    const double vtv = dot(v, v);

    for (std::size_t col = j + 1; col < c; ++col) {
      double s = 0.0;
      for (std::size_t i = j; i < n; ++i) s += v[i - j] * a(i, col);
      const double f = 2.0 * s / vtv;
      for (std::size_t i = j; i < n; ++i) a(i, col) -= f * v[i - j];
    }
    a(j, j) = beta;
    for (std::size_t i = j + 1; i < n; ++i) a(i, j) = 0.0;

    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t i = j; i < n; ++i) s += q(r, i) * v[i - j];
      const double f = 2.0 * s / vtv;
      for (std::size_t i = j; i < n; ++i) q(r, i) -= f * v[i - j];
    }
  }

  for (std::size_t i = 0; i < k; ++i) {
    if (a(i, i) < 0.0) {
      for (std::size_t col = i; col < c; ++col) a(i, col) = -a(i, col);
      for (std::size_t r = 0; r < n; ++r) q(r, i) = -q(r, i);
    }
  }

  Matrix r(k, c);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t col = i; col < c; ++col) r(i, col) = a(i, col);
  return {std::move(q), std::move(r)};
}

Svd svd(const Matrix& m) {
  require_finite(m, "svd");
  if (m.rows() >= m.cols()) return jacobi_svd_tall(m);
  Svd t = jacobi_svd_tall(m.transpose());
  return {std::move(t.v), std::move(t.s), std::move(t.u)};
}

double default_rank_tolerance(const Matrix& m) {
  const Svd d = svd(m);
  const double sigma_max = d.s.empty() ? 0.0 : d.s.front();
  return static_cast<double>(std::max(m.rows(), m.cols())) *
         std::numeric_limits<double>::epsilon() * sigma_max;
}

std::size_t numerical_rank(const Matrix& m, std::optional<double> tol) {
  const Svd d = svd(m);
  const double sigma_max = d.s.empty() ? 0.0 : d.s.front();
  const double threshold =
      tol ? *tol
          : static_cast<double>(std::max(m.rows(), m.cols())) *
                std::numeric_limits<double>::epsilon() * sigma_max;
  return static_cast<std::size_t>(
      std::count_if(d.s.begin(), d.s.end(), [&](double s) { return s > threshold; }));
}

std::vector<std::size_t> pivot_permutation(const Matrix& m, std::size_t k,
                                           std::optional<double> tol) {
  const std::size_t n = m.cols();
  if (k > n) {
    throw Error(ErrorKind::RankMismatch,
                "rank " + std::to_string(k) + " exceeds column count " + std::to_string(n));
  }
  const double threshold = tol ? *tol : default_rank_tolerance(m);

  std::vector<Vector> residual(n);
  for (std::size_t j = 0; j < n; ++j) residual[j] = m.column_vector(j);
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> perm;
  perm.reserve(n);

  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = n;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      const double nrm = norm2(residual[j]);
      if (nrm > best_norm) {
        best_norm = nrm;
        best = j;
      }
    }
    if (best_norm <= 0.0) {
      throw Error(ErrorKind::RankMismatch, "only " + std::to_string(step) +
                                               " independent columns, expected " +
                                               std::to_string(k));
    }
    taken[best] = true;
    perm.push_back(best);
    Vector dir = residual[best];
    for (double& x : dir) x /= best_norm;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      // two passes of Gram-Schmidt
      for (int pass = 0; pass < 2; ++pass) {
        const double proj = dot(dir, residual[j]);
        for (std::size_t r = 0; r < residual[j].size(); ++r) residual[j][r] -= proj * dir[r];
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    if (!taken[j]) perm.push_back(j);

  if (k > 0) {
    const std::vector<std::size_t> leading(perm.begin(), perm.begin() + static_cast<long>(k));
    const Svd d = svd(m.select_columns(leading));
    if (d.s.back() <= threshold) {
      throw Error(ErrorKind::RankMismatch, "selected columns are not independent at tolerance " +
                                               std::to_string(threshold));
    }
  }
  return perm;
}

Matrix left_inverse(const Matrix& b) {
  const std::size_t n = b.rows();
  const std::size_t k = b.cols();
  if (k > n) {
    throw Error(ErrorKind::RankDeficient, std::to_string(n) + "x" + std::to_string(k) +
                                              " matrix cannot be injective");
  }
  if (k == 0) return Matrix(0, n);
  if (numerical_rank(b) < k) throw Error(ErrorKind::RankDeficient, "matrix lacks full column rank");

  const CompleteQR f = complete_qr(b);
  Matrix out(k, n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = k; i-- > 0;) {
      double acc = f.q(col, i);  // (Q_1^T)(i, col)
      for (std::size_t l = i + 1; l < k; ++l) acc -= f.r(i, l) * out(l, col);
      out(i, col) = acc / f.r(i, i);
    }
  }
  return out;
}

}  // namespace qnn
