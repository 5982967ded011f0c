#pragma once

#include <string>

#include "urb/pauli.hpp"
#include "urb/rng.hpp"

namespace urb {

/// Quantum channel in Liouville / Pauli-transfer-matrix form: a real
/// (d^2)x(d^2) matrix in the normalized Pauli basis, basis index 0 = sigma_0.
/// Trace preservation pins row 0 to (1, 0, ..., 0).
struct TransferMatrix {
  int q = 1;
  RMatrix m;

  int dim() const { return static_cast<int>(pauli_count(q)); }
};

TransferMatrix identity_channel(int d);

bool is_trace_preserving(const TransferMatrix& l, double tol = 1e-9);

/// u = Tr[Lu^T Lu] / (d^2-1) over the unital block. Throws on non-TP input.
double unitarity(const TransferMatrix& l);

/// Randomized-benchmarking decay parameter f = sum_{sigma in P*} <sigma|L|sigma> / (d^2-1).
double rb_decay(const TransferMatrix& l);

/// Average gate fidelity F = ((d-1) f + 1) / d. Satisfies ((dF-1)/(d-1))^2 <= u.
double avg_gate_fidelity(const TransferMatrix& l);

/// diag(1, p, ..., p). Throws if p is outside [-1/(d^2-1), 1].
TransferMatrix depolarizing(double p, int d);

/// Random CPTP channel by Stinespring sampling: a Gaussian d*k x d matrix is
/// orthonormalized into an isometry and sliced into k Kraus operators.
TransferMatrix random_cptp(int d, int kraus_rank, RngStream& rng);

/// (1-w) * Identity + w * L, entrywise. w in [0,1].
TransferMatrix mix_with_identity(const TransferMatrix& l, double w);

/// Convex mixture of n_terms uniformly sampled Clifford conjugations.
/// Unital and CPTP by construction.
TransferMatrix random_unital(int d, int n_terms, RngStream& rng);

/// Lower-right (d^2-1)x(d^2-1) block, and first column below row 0.
RMatrix unital_block(const TransferMatrix& l);
RVector nonunitality(const TransferMatrix& l);

/// Choi matrix (normalized so that Tr = d for a CPTP channel).
CMatrix choi_matrix(const TransferMatrix& l);

/// Row-0 condition plus Choi PSD within tol.
bool is_cptp(const TransferMatrix& l, double tol = 1e-9);

/// Apply the channel to a Hermitian operator on one copy.
DenseOperator apply_channel(const TransferMatrix& l, const DenseOperator& a);

/// JSON import/export: {"q": int, "ptm": row-major array of d^4 reals}.
std::string channel_to_json(const TransferMatrix& l);
TransferMatrix channel_from_json(const std::string& text);

}  // namespace urb
