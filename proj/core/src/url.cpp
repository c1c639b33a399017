#include "vtn/url.hpp"

#include <cmath>
#include <stdexcept>

#include "vtn/errors.hpp"
#include "vtn/rng.hpp"

namespace vtn::url {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kFloor = 1e-12;
}

void check_data_matrix(const MatrixXd& m, const char* name) {
  if (m.rows() < 1 || m.cols() < 1)
    throw std::invalid_argument(std::string(name) + ": empty matrix");
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double x = m(i, j);
      if (!std::isfinite(x) || x < 0.0)
        throw std::invalid_argument(std::string(name) +
                                    ": entries must be finite and nonnegative");
    }
}

MatrixXd pairwise_affinity(const MatrixXd& x) {
  const Eigen::Index n = x.cols();
  if (n < 2)
    throw std::invalid_argument("pairwise_affinity: need at least two columns");

  MatrixXd cols = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = cols.col(j).sum();
    if (!(s > 0.0))
      throw std::invalid_argument("pairwise_affinity: all-zero column");
    cols.col(j) /= s;
  }

  // H(x, y) = -sum_i x_i log max(y_i, floor)
  MatrixXd logc = cols.array().max(kFloor).log().matrix();
  MatrixXd h = -(cols.transpose() * logc);  // h(i, j) = H(col_i, col_j)
  MatrixXd g = 0.5 * (h + h.transpose());
  g.diagonal().setZero();
  const double total = g.sum();
  if (!(total > 0.0))
    throw std::invalid_argument("pairwise_affinity: degenerate affinities");
  return g / total;
}

MatrixXd q_matrix(const MatrixXd& v) {
  const Eigen::Index n = v.cols();
  if (n < 2)
    throw std::invalid_argument("q_matrix: need at least two columns");
  MatrixXd q(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    q(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d2 = (v.col(i) - v.col(j)).squaredNorm();
      const double w = 1.0 / (1.0 + d2);
      q(i, j) = w;
      q(j, i) = w;
    }
  }
  const double total = q.sum();
  if (!(total > 0.0)) throw NumericError("q_matrix: degenerate weights");
  return q / total;
}

namespace {
double kl_against(const MatrixXd& p, const MatrixXd& q) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double pij = p(i, j);
      if (pij <= 0.0) continue;  // 0 log 0 = 0
      acc += pij * (std::log(pij) - std::log(std::max(q(i, j), kFloor)));
    }
  return acc;
}
}  // namespace

double jsd(const MatrixXd& p_a, const MatrixXd& p_b, const MatrixXd& q) {
  if (p_a.rows() != q.rows() || p_a.cols() != q.cols() ||
      p_b.rows() != q.rows() || p_b.cols() != q.cols())
    throw std::invalid_argument("jsd: matrix shapes differ");
  return 0.5 * kl_against(p_a, q) + 0.5 * kl_against(p_b, q);
}

double jsd_midpoint(const MatrixXd& p_a, const MatrixXd& p_b) {
  if (p_a.rows() != p_b.rows() || p_a.cols() != p_b.cols())
    throw std::invalid_argument("jsd_midpoint: matrix shapes differ");
  const MatrixXd m = 0.5 * (p_a + p_b);
  return 0.5 * kl_against(p_a, m) + 0.5 * kl_against(p_b, m);
}

MatrixXd update_u(const MatrixXd& a, const MatrixXd& u, const MatrixXd& v) {
  if (a.rows() != u.rows() || a.cols() != v.cols() || u.cols() != v.rows())
    throw std::invalid_argument("update_u: factor shapes differ");
  const MatrixXd numer = a * v.transpose();
  const MatrixXd denom = u * (v * v.transpose());
  return (u.array() * numer.array() / (denom.array() + kFloor)).matrix();
}

namespace {
// Coupling terms of the latent update. For latent column j and row i:
//   upsilon(i,j) = eta * sum_k [(pA+pB)(j,k) V(i,k) + 2 q(j,k) V(i,j)] * T(j,k)
//   gamma(i,j)   = eta * sum_k [(pA+pB)(j,k) V(i,j) + 2 q(j,k) V(i,k)] * T(j,k)
// with T(j,k) = 1 / (1 + |v_j - v_k|^2).
void coupling_terms(const MatrixXd& v, double eta, const MatrixXd& p_a,
                    const MatrixXd& p_b, MatrixXd* upsilon, MatrixXd* gamma) {
  const Eigen::Index n = v.cols();
  MatrixXd t(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    t(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d2 = (v.col(i) - v.col(j)).squaredNorm();
      const double w = 1.0 / (1.0 + d2);
      t(i, j) = w;
      t(j, i) = w;
    }
  }
  const MatrixXd q = q_matrix(v);
  const MatrixXd s1 = ((p_a + p_b).array() * t.array()).matrix();
  const MatrixXd s2 = (2.0 * q.array() * t.array()).matrix();
  const VectorXd s1_row = s1.rowwise().sum();
  const VectorXd s2_row = s2.rowwise().sum();
  // s1, s2 are symmetric, so V * s1^T = V * s1.
  *upsilon = eta * (v * s1 + (v.array().rowwise() * s2_row.transpose().array()).matrix());
  *gamma = eta * ((v.array().rowwise() * s1_row.transpose().array()).matrix() + v * s2);
}
}  // namespace

MatrixXd update_v(const MatrixXd& a, const MatrixXd& b, const MatrixXd& u,
                  const MatrixXd& w, const MatrixXd& v, double eta,
                  const MatrixXd& p_a, const MatrixXd& p_b) {
  if (a.cols() != v.cols() || b.cols() != v.cols() || u.rows() != a.rows() ||
      w.rows() != b.rows() || u.cols() != v.rows() || w.cols() != v.rows())
    throw std::invalid_argument("update_v: factor shapes differ");
  MatrixXd numer = u.transpose() * a + w.transpose() * b;
  MatrixXd denom =
      (u.transpose() * u) * v + (w.transpose() * w) * v;
  if (eta != 0.0) {
    MatrixXd upsilon, gamma;
    coupling_terms(v, eta, p_a, p_b, &upsilon, &gamma);
    numer += upsilon;
    denom += gamma;
  }
  return (v.array() * numer.array() / (denom.array() + kFloor)).matrix();
}

MatrixXd update_v(const MatrixXd& a, const MatrixXd& b, const MatrixXd& u,
                  const MatrixXd& w, const MatrixXd& v, double eta) {
  if (eta == 0.0) {
    MatrixXd empty(v.cols(), v.cols());
    empty.setZero();
    return update_v(a, b, u, w, v, eta, empty, empty);
  }
  return update_v(a, b, u, w, v, eta, pairwise_affinity(a),
                  pairwise_affinity(b));
}

double objective(const MatrixXd& a, const MatrixXd& b, const MatrixXd& u,
                 const MatrixXd& w, const MatrixXd& v, double eta,
                 const MatrixXd& p_a, const MatrixXd& p_b) {
  double obj = (a - u * v).squaredNorm() + (b - w * v).squaredNorm();
  if (eta != 0.0) obj += eta * jsd(p_a, p_b, q_matrix(v));
  return obj;
}

Factorization fit(const MatrixXd& a, const MatrixXd& b, int d, double eta,
                  const FitOptions& opts) {
  check_data_matrix(a, "fit: A");
  check_data_matrix(b, "fit: B");
  if (a.cols() != b.cols())
    throw std::invalid_argument("fit: views must share the sample count");
  if (d < 1) throw std::invalid_argument("fit: latent dimension must be >= 1");
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("fit: eta must be finite and >= 0");
  if (opts.max_iter < 1) throw std::invalid_argument("fit: max_iter must be >= 1");

  const Eigen::Index n = a.cols();
  Rng rng(opts.seed);
  auto uniform_fill = [&rng](MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform01();
  };

  Factorization f;
  f.eta = eta;
  f.u.resize(a.rows(), d);
  f.w.resize(b.rows(), d);
  f.v.resize(d, n);
  uniform_fill(f.u);
  uniform_fill(f.w);
  uniform_fill(f.v);

  MatrixXd p_a, p_b;
  if (eta != 0.0) {
    p_a = pairwise_affinity(a);
    p_b = pairwise_affinity(b);
  } else {
    p_a = MatrixXd::Zero(n, n);
    p_b = MatrixXd::Zero(n, n);
  }

  double prev = objective(a, b, f.u, f.w, f.v, eta, p_a, p_b);
  for (int it = 0; it < opts.max_iter; ++it) {
    f.u = update_u(a, f.u, f.v);
    f.w = update_u(b, f.w, f.v);
    f.v = update_v(a, b, f.u, f.w, f.v, eta, p_a, p_b);
    const double obj = objective(a, b, f.u, f.w, f.v, eta, p_a, p_b);
    f.objective_trace.push_back(obj);
    f.iterations = it + 1;
    const double rel = std::abs(prev - obj) / std::max(std::abs(prev), kFloor);
    prev = obj;
    if (rel < opts.tol) break;
  }
  return f;
}

ProcrustesResult procrustes(const MatrixXd& x, const MatrixXd& v) {
  if (x.cols() != v.cols())
    throw std::invalid_argument("procrustes: sample counts differ");
  if (v.rows() > x.rows())
    throw std::invalid_argument("procrustes: latent dimension exceeds the feature dimension");
  const MatrixXd c = x * v.transpose();  // M x D
  Eigen::JacobiSVD<MatrixXd> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ProcrustesResult out;
  out.projection = svd.matrixV() * svd.matrixU().transpose();
  const auto& sing = svd.singularValues();
  out.rank_deficient =
      sing.size() == 0 || sing(sing.size() - 1) <= sing(0) * 1e-12 ||
      sing(0) <= 0.0;
  return out;
}

Projections make_projections(const MatrixXd& a, const MatrixXd& b,
                             const MatrixXd& v) {
  Projections p;
  ProcrustesResult ra = procrustes(a, v);
  ProcrustesResult rb = procrustes(b, v);
  p.p_a = std::move(ra.projection);
  p.p_b = std::move(rb.projection);
  p.a_rank_deficient = ra.rank_deficient;
  p.b_rank_deficient = rb.rank_deficient;
  return p;
}

int predict(const VectorXd& embedded, const MatrixXd& prototypes) {
  if (prototypes.cols() < 1)
    throw std::invalid_argument("predict: no prototypes");
  if (prototypes.rows() != embedded.size())
    throw std::invalid_argument("predict: dimension mismatch");
  int best = 0;
  double best_d = (prototypes.col(0) - embedded).squaredNorm();
  for (Eigen::Index k = 1; k < prototypes.cols(); ++k) {
    const double dk = (prototypes.col(k) - embedded).squaredNorm();
    if (dk < best_d) {
      best_d = dk;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace vtn::url
