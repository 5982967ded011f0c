#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "urb/channels.hpp"
#include "urb/clifford.hpp"
#include "urb/pauli.hpp"

namespace urb {

/// Sparse vector over the Pauli-product basis of (d^2)^copies labels. Each
/// basis label packs `copies` single-copy Pauli labels, 4 bits per factor
/// (enough for d^2 <= 16), most significant factor first.
struct LiouvilleVec {
  int q = 1;
  int copies = 2;
  std::unordered_map<std::uint32_t, double> coeff;

  double norm2() const;
  static std::uint32_t pack(const std::vector<int>& labels);
  static void unpack(std::uint32_t key, int copies, int* labels);
};

double dot(const LiouvilleVec& a, const LiouvilleVec& b);

/// Materialize the dense operator (feasible for q = 1, or 2-copy q = 2).
DenseOperator liouville_dense(const LiouvilleVec& v);

/// Image under G^(x copies) — a signed permutation of the basis labels.
LiouvilleVec apply_tensor_clifford(const CliffordElement& g,
                                   const LiouvilleVec& v);

/// B1 = sigma_0 sigma_0, B2 = (1/sqrt(d^2-1)) sum_{sigma in P*} sigma sigma.
std::pair<LiouvilleVec, LiouvilleVec> basis_B(int d);

/// The averaging projector G_avg^(n) = |G|^-1 sum_G G^(x n).
/// Dense matrix for q = 1 ((d^2)^n x (d^2)^n); q = 2 offers only the
/// matrix-free application (the dense form would be 65536^2 at n = 4).
class GroupAverager {
 public:
  GroupAverager(int n, int q);

  int n() const { return n_; }
  int q() const { return q_; }

  /// Dense projector; throws for q = 2.
  const RMatrix& dense() const;

  /// Matrix-free application to a full coefficient vector of length (d^2)^n.
  /// Parallelized over group elements with a fixed reduction order, so the
  /// result is bit-stable.
  RVector apply(const RVector& x) const;

 private:
  int n_;
  int q_;
  RMatrix dense_;  // q = 1 only
};

/// The 2x2 matrix of M = G_avg Lambda^(x2) G_avg on span{B1, B2}:
/// [[1, 0], [||alpha(L)||^2/sqrt(d^2-1), u(L)]].
Eigen::Matrix2d m_matrix(const TransferMatrix& lambda);

/// Trivial-subrepresentation operators of the tensor-4 Liouville
/// representation, HS-normalized and G^(x4)-invariant. At d = 2 the set is
/// {A_0, A_{1,2}, A_S}; at d = 4 it also carries A_adj. A_adj lies inside the
/// span of the V_S irreps, so <A_S|A_adj> = sqrt(|V_adj|/|V_S|) rather than 0.
struct TrivialBasis {
  int d = 2;
  LiouvilleVec a0;
  LiouvilleVec a12;
  LiouvilleVec aS;
  LiouvilleVec a_adj;  // empty at d = 2 (C_tau is empty there)
  bool has_adj = false;
};
TrivialBasis trivial_basis(int d);

/// Coefficients a_i = <<A_i | N - M^(x2) | B2 B2>> and the mirrored b_i.
/// Since the A_i are invariant under G_avg^(4), these reduce to direct
/// inner products against Lambda^(x4); the group-averaged route is available
/// for verification via `via_group_average` (q = 1 always uses the dense
/// 24-element average).
struct AbCoefficients {
  double a0 = 0, b0 = 0;
  double a12 = 0, b12 = 0;
  double aS = 0, bS = 0;
  double a_adj = 0, b_adj = 0;
  bool has_adj = false;
};
AbCoefficients ab_coefficients(const TransferMatrix& lambda,
                               bool via_group_average = false);

/// Exact sequence-purity mean E[q_j] for q = 1: iterate m times
/// v <- G_avg^(2) (Lambda^(x2) v) starting from rho_bar and close with E_bar.
double exact_mean(const TransferMatrix& lambda, const DenseOperator& rho_bar,
                  const DenseOperator& e, int m);

/// Exact between-sequence variance V[q_j] for q = 1 via the 256-dimensional
/// tensor-4 space: E[q^2] - E[q]^2 with exhaustive 24-element averaging.
double exact_variance(const TransferMatrix& lambda,
                      const DenseOperator& rho_bar, const DenseOperator& e,
                      int m);

/// || N^m - (M^(x2))^m - sum_s N^(m-s) (N - M^(x2)) (M^(x2))^(s-1) || on the
/// 256-dim space; q = 1, m <= 6.
double telescoping_residual(const TransferMatrix& lambda, int m);
bool verify_telescoping(const TransferMatrix& lambda, int m,
                        double tol = 1e-9);

/// Irrep dimensions of the two-copy Liouville decomposition, as used by
/// the variance-bound constants.
struct IrrepDims {
  double v12;                       // |V_{1,2}| = d^2 - 2
  double vS;                        // |V_S| = (d^2-1)(d^2-2)/2
  double v_adj;                     // d^2 - 1
  std::vector<double> z12;          // leaves of V_{1,2} with positive dim
  std::vector<double> zS_not_adj;   // leaves of V_S except adj, positive dim
};
IrrepDims irrep_dims(int d);

}  // namespace urb
