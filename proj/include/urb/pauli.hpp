#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace urb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// A normalized q-qubit Pauli operator P/sqrt(d), identified by its X/Z bit
/// pattern. Bit i of x (z) indicates an X (Z) factor on qubit i; a qubit with
/// both bits set carries Y. label 0 is sigma_0 = I/sqrt(d).
struct PauliIndex {
  int q = 1;
  std::uint32_t label = 0;

  std::uint32_t x_bits() const { return label & ((1u << q) - 1); }
  std::uint32_t z_bits() const { return label >> q; }
  bool is_identity() const { return label == 0; }

  friend bool operator==(const PauliIndex&, const PauliIndex&) = default;
};

/// Number of normalized Paulis on q qubits (= d^2).
inline std::uint32_t pauli_count(int q) { return 1u << (2 * q); }

struct SignedPauli {
  int sign = +1;  // +1 or -1
  PauliIndex pauli;

  friend bool operator==(const SignedPauli&, const SignedPauli&) = default;
};

/// Hermitian operator on k copies of the base q-qubit space, held densely.
struct DenseOperator {
  int q = 1;
  int copies = 1;
  CMatrix mat;  // d^copies x d^copies with d = 2^q

  int base_dim() const { return 1 << q; }
  int dim() const {
    int d = 1;
    for (int i = 0; i < copies; ++i) d *= base_dim();
    return d;
  }
};

/// Dense matrix of a normalized Pauli, P/sqrt(d).
DenseOperator pauli_matrix(const PauliIndex& idx);

/// Dense matrix of the unnormalized Pauli P (eigenvalues +-1).
CMatrix pauli_matrix_unnormalized(const PauliIndex& idx);

/// Hilbert-Schmidt inner product Tr[A^dag B]. Throws on dimension mismatch.
Complex hs_inner(const DenseOperator& a, const DenseOperator& b);

/// Schatten p-norm for p in {1, 2, inf}. Hermitian inputs go through an
/// eigendecomposition, everything else through an SVD.
enum class SchattenP { one, two, inf };
double schatten_norm(const DenseOperator& a, SchattenP p);
double schatten_norm(const CMatrix& a, SchattenP p);

/// Do two Paulis commute? (symplectic form on the bit patterns)
bool pauli_commute(const PauliIndex& a, const PauliIndex& b);

/// Result of the normalized matrix product sigma . tau = (1/sqrt(d)) sigma tau.
/// Commuting inputs produce a Hermitian +-Pauli; anti-commuting inputs give a
/// phase +-i, which is reported through the flag rather than coerced.
struct PauliProduct {
  bool anticommuting = false;
  SignedPauli value;  // meaningful only when !anticommuting
};
PauliProduct normalized_product(const SignedPauli& a, const SignedPauli& b);

/// All sigma in P* \ {tau} commuting with tau; |C_tau| = (d^2-4)/2.
/// Throws if tau is the identity.
std::vector<PauliIndex> commutant_set(const PauliIndex& tau);

/// Coefficients of a Hermitian operator on k copies in the normalized
/// Pauli-product basis: coeff[i] = Tr[(sigma_{i_1} x ... x sigma_{i_k}) A],
/// with the flat index i = ((i_1*d^2 + i_2)*d^2 + ...). Real for Hermitian A.
RVector pauli_coefficients(const DenseOperator& a);

/// Inverse of pauli_coefficients.
DenseOperator dense_from_pauli_coefficients(int q, int copies,
                                            const RVector& coeff);

}  // namespace urb
