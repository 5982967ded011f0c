#pragma once

#include <cstdint>
#include <vector>

#include "urb/pauli.hpp"
#include "urb/rng.hpp"

namespace urb {

struct TransferMatrix;  // channels.hpp

/// A Clifford group element stored as a signed permutation of the nonidentity
/// Pauli labels (conjugation action). img/sgn are indexed by label-1.
struct CliffordElement {
  int q = 1;
  std::vector<std::uint8_t> img;  // label -> image label, size d^2-1
  std::vector<std::int8_t> sgn;   // label -> +-1
  int id = -1;                    // position in the canonical enumeration
  std::vector<std::uint8_t> word; // generator word (indices into generator set)

  SignedPauli apply(const SignedPauli& p) const;

  friend bool operator==(const CliffordElement& a, const CliffordElement& b) {
    return a.q == b.q && a.img == b.img && a.sgn == b.sgn;
  }
};

/// |Cliff(2^q)| = prod_{j=1..q} 2 (4^j - 1) 4^j.
std::uint64_t clifford_group_size(int q);

/// Full enumeration for q in {1,2}, in a canonical (fingerprint-sorted)
/// order. Built once, cached; the returned reference is shareable read-only.
const std::vector<CliffordElement>& clifford_group(int q);

/// Uniform sample; needs an exclusively owned stream.
const CliffordElement& sample_uniform_clifford(int q, RngStream& rng);

/// Composition c2 after c1, and inverse.
CliffordElement compose(const CliffordElement& c2, const CliffordElement& c1);
CliffordElement inverse(const CliffordElement& c);

/// Liouville matrix of the conjugation action: a signed permutation with
/// entry (0,0) = 1.
TransferMatrix ptm(const CliffordElement& c);

/// Generator set used for the enumeration: {H_i, S_i, CNOT_ij}.
/// Returns the dense unitaries, for oracle-style checks.
const std::vector<CMatrix>& clifford_generators(int q);

/// Dense unitary of an enumerated element, reconstructed from its generator
/// word. Intended for cross-checks, not hot paths.
CMatrix unitary_of(const CliffordElement& c);

}  // namespace urb
