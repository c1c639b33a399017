#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace vtn::url {

// Joint nonnegative factorization of two views A (M1 x N) and B (M2 x N)
// sharing a latent matrix V (D x N), with a divergence penalty that pulls
// the latent pairwise structure towards the structure of both views.

// Throws std::invalid_argument on negative or non-finite entries.
void check_data_matrix(const Eigen::MatrixXd& m, const char* name);

// Pairwise affinities of the columns of X: columns are L1-normalized, the
// symmetrized cross entropy g(x, y) = (H(x,y) + H(y,x)) / 2 is taken with
// logs floored at 1e-12, and the off-diagonal entries are normalized to
// sum to 1. Diagonal is zero. All-zero columns are rejected.
Eigen::MatrixXd pairwise_affinity(const Eigen::MatrixXd& x);

// Student-t pairwise weights of the columns of V: (1 + |v_i - v_j|^2)^-1,
// off-diagonal entries normalized to sum to 1, zero diagonal.
Eigen::MatrixXd q_matrix(const Eigen::MatrixXd& v);

// Divergence of q from the two view affinities:
// (KL(pA || q) + KL(pB || q)) / 2 with 0 log 0 = 0 and q floored at 1e-12.
double jsd(const Eigen::MatrixXd& p_a, const Eigen::MatrixXd& p_b,
           const Eigen::MatrixXd& q);

// Midpoint variant (KL(pA||m) + KL(pB||m)) / 2 with m = (pA + pB) / 2,
// bounded by ln 2; reported as a diagnostic only, the objective uses jsd().
double jsd_midpoint(const Eigen::MatrixXd& p_a, const Eigen::MatrixXd& p_b);

// Multiplicative updates. Factors stay nonnegative; zero entries stay zero.
Eigen::MatrixXd update_u(const Eigen::MatrixXd& a, const Eigen::MatrixXd& u,
                         const Eigen::MatrixXd& v);
inline Eigen::MatrixXd update_w(const Eigen::MatrixXd& b,
                                const Eigen::MatrixXd& w,
                                const Eigen::MatrixXd& v) {
  return update_u(b, w, v);
}

// Latent update including the divergence coupling terms; eta = 0 reduces
// to the plain joint factorization update.
Eigen::MatrixXd update_v(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                         const Eigen::MatrixXd& v, double eta);
Eigen::MatrixXd update_v(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                         const Eigen::MatrixXd& v, double eta,
                         const Eigen::MatrixXd& p_a,
                         const Eigen::MatrixXd& p_b);

double objective(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                 const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                 const Eigen::MatrixXd& v, double eta,
                 const Eigen::MatrixXd& p_a, const Eigen::MatrixXd& p_b);

struct Factorization {
  Eigen::MatrixXd u, w, v;
  double eta = 0.0;
  std::vector<double> objective_trace;  // one entry per iteration
  int iterations = 0;
};

struct FitOptions {
  int max_iter = 1000;
  double tol = 1e-6;  // relative objective change
  std::uint64_t seed = 0;
};

// Alternating multiplicative optimization from a seeded uniform [0, 1]
// start. Bit-identical traces for equal inputs and seed.
Factorization fit(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int d,
                  double eta, const FitOptions& opts = {});

struct ProcrustesResult {
  Eigen::MatrixXd projection;  // D x M, rows orthonormal
  bool rank_deficient = false;
};

// Rows-orthonormal projection maximizing alignment of P X with V, from the
// thin SVD of X V^T. Requires D <= M.
ProcrustesResult procrustes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& v);

struct Projections {
  Eigen::MatrixXd p_a, p_b;
  bool a_rank_deficient = false, b_rank_deficient = false;
};
Projections make_projections(const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& v);

// Nearest prototype by Euclidean distance; ties take the lowest index.
int predict(const Eigen::VectorXd& embedded, const Eigen::MatrixXd& prototypes);

}  // namespace vtn::url
