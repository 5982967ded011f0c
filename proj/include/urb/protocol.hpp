#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "urb/channels.hpp"
#include "urb/clifford.hpp"
#include "urb/pauli.hpp"
#include "urb/rng.hpp"

namespace urb {

enum class Implementation { single_copy, two_copy };

struct ProtocolConfig {
  int q = 1;
  Implementation impl = Implementation::two_copy;
  std::vector<int> sequence_lengths;
  int sequences_per_length = 1;  // N_m
  bool exact = true;             // exact expectation values (infinite shots)
  int shots = 0;                 // R per expectation value when !exact
  std::uint64_t seed = 0;
};

struct TwoCopySpam {
  DenseOperator rho;      // 2 copies
  DenseOperator rho_hat;  // 2 copies
  DenseOperator e;        // Hermitian observable, spectrum in [-1, 1]
};

struct SingleCopySpam {
  // families indexed by the nonidentity Pauli label - 1
  std::vector<DenseOperator> rho;
  std::vector<DenseOperator> rho_hat;
  std::vector<DenseOperator> e;
};

struct SpamModel {
  int q = 1;
  std::optional<TwoCopySpam> two_copy;
  std::optional<SingleCopySpam> single_copy;
};

/// rho = (I+S)/(d(d+1)), rho_hat = (I-S)/(d(d-1)), E = S.
TwoCopySpam ideal_two_copy_operators(int d);

/// rho^(P) = (I+P)/d, rho_hat^(P) = (I-P)/d, E^(Q) = Q (unnormalized Paulis).
/// Throws on identity input.
struct SingleCopySetting {
  DenseOperator rho;
  DenseOperator rho_hat;
  DenseOperator e;
};
SingleCopySetting ideal_single_copy_operators(const PauliIndex& p,
                                              const PauliIndex& q_meas);

/// The complete ideal family over all P, Q != I.
SingleCopySpam ideal_single_copy_family(int q);

SpamModel ideal_spam(int q, Implementation impl);

/// Convex perturbation (1-eta) ideal + eta random-valid-operator; random
/// states are normalized Wishart samples, random observables are
/// spectrum-clipped Hermitian samples.
SpamModel perturbed_spam(int q, Implementation impl, double eta,
                         RngStream& rng);

/// Effective two-copy operators of a single-copy family:
/// rho_eff = d/(d^2-1) sum_P rho_bar^(P) x rho_bar^(P),
/// E_eff = (1/d) sum_Q E_bar^(Q) x E_bar^(Q).
std::pair<DenseOperator, DenseOperator> effective_operators(
    const SingleCopySpam& s);

/// A gate sequence as canonical ids into clifford_group(q).
using Sequence = std::vector<int>;

Sequence sample_sequence(int q, int m, RngStream& rng);

/// Exact q_j^(2) = Tr[E (G_j Lambda)^(x2) ... (rho_bar)].
double sequence_purity_two_copy(const Sequence& seq,
                                const TransferMatrix& lambda,
                                const SpamModel& spam);

/// Exact q_j^(1) = (1/(d^2-1)) sum_PQ Tr[E_bar^(Q) G_j(rho_bar^(P))]^2.
double sequence_purity_single_copy(const Sequence& seq,
                                   const TransferMatrix& lambda,
                                   const SpamModel& spam);

/// Finite-shot estimate of q_j^(2): R draws from the three-outcome
/// distribution over {-1, 0, 1} with a = Tr[M ...(rho)], b = Tr[M ...(rho_hat)],
/// M = (I+E)/2. Returns the mean and the outcome tallies (counts of -1, 0, 1).
struct TwoCopyShotResult {
  double q_bar = 0.0;
  std::array<long, 3> tallies{0, 0, 0};
};
TwoCopyShotResult sample_shots_two_copy(const Sequence& seq,
                                        const TransferMatrix& lambda,
                                        const SpamModel& spam, int shots,
                                        RngStream& rng);

/// Bias-corrected single-copy estimate
/// (1/(d^2-1)) sum_PQ xbar_PQ^2 - s^2_PQ/R.  Requires R >= 2.
double sample_shots_single_copy(const Sequence& seq,
                                const TransferMatrix& lambda,
                                const SpamModel& spam, int shots,
                                RngStream& rng);

/// Uncorrected (positively biased) variant, for bias studies.
double sample_shots_single_copy_naive(const Sequence& seq,
                                      const TransferMatrix& lambda,
                                      const SpamModel& spam, int shots,
                                      RngStream& rng);

struct ExperimentDataset {
  ProtocolConfig config;
  // samples[i][k] = k-th sequence-purity sample at sequence_lengths[i]
  std::vector<std::vector<double>> samples;
  // per-sample outcome tallies (counts of -1, 0, +1), two-copy shot mode only
  std::vector<std::vector<std::array<long, 3>>> tallies;

  double mean_at(std::size_t i) const;
  double variance_at(std::size_t i) const;  // unbiased
};

/// Runs Algorithm-1 style data collection. Each sample's RNG stream is
/// derived from (seed, m, sample index), so results do not depend on
/// evaluation order.
ExperimentDataset run_experiment(const ProtocolConfig& config,
                                 const TransferMatrix& lambda,
                                 const SpamModel& spam);

std::string dataset_to_json(const ExperimentDataset& ds);
ExperimentDataset dataset_from_json(const std::string& text);
std::string dataset_to_csv(const ExperimentDataset& ds);
ExperimentDataset dataset_from_csv(const std::string& text);

}  // namespace urb
