#pragma once

#include <array>
#include <optional>

#include "urb/pauli.hpp"

namespace urb {

/// Decomposition of implemented SPAM operators against the ideal ones:
/// rho_bar = alpha rho_ideal + rho_spam, E_bar = beta E_ideal + E_spam,
/// with the error parts Hilbert-Schmidt orthogonal to the ideals.
struct SpamParams {
  double alpha = 1.0;
  double beta = 1.0;
  double rho_spam_trace_norm = 0.0;
  double e_spam_inf_norm = 0.0;
};

struct ConfidenceParams {
  double epsilon = 0.02;
  double delta = 0.01;
};

/// Inputs to the variance bound. m empty means the long-sequence limit.
struct BoundInputs {
  double u = 1.0;
  std::optional<int> m;
  int d = 2;
  SpamParams spam;
};

/// alpha = (d^2-1) Tr[rho_ideal rho_bar], beta = Tr[E_ideal E_bar]/(d^2-1),
/// plus the Schatten norms of the orthogonal remainders. rho_bar must be
/// traceless; E is replaced by its traceless part internally.
SpamParams spam_decompose(const DenseOperator& rho_bar, const DenseOperator& e);

/// Variance-bound constants (c1, c2, c3). Exact rationals at d = 2; the
/// d >= 4 branch evaluates the closed forms over the irrep dimensions of
/// the two-copy decomposition (nonpositive-dimension leaves dropped).
std::array<double, 3> c_constants(int d);

/// sigma^2 = (1-u^(2(m-1)))/(1-u^2) (1-u)^2 [a^2 b^2 c1 + a^2 c2 ||E_spam||^2
///           + b^2 c3 ||rho_spam||^2] + ||rho_spam||^2 ||E_spam||^2.
/// m = 1 gives only the product term; the long-sequence limit replaces the
/// front factor by (1-u)/(1+u); u = 1 sends the front factor to 0.
double variance_bound(const BoundInputs& in);

/// Interval-length bound L. Coarse form 1 + r + e + re; refined form
/// ab + b r + a e + re (requires alpha, beta >= 0).
double interval_bound(const SpamParams& spam, bool use_alpha_beta = false);

/// Smallest N with 2 [ (L/(L-eps))^((L^2-eps L)/(s2+L^2))
///                     (s2/(s2+eps L))^((s2+eps L)/(s2+L^2)) ]^N <= delta.
/// Throws if eps >= L or the base is not < 1. A zero variance bound is
/// degenerate (a point mass); N = 1 is returned for it.
int hoeffding_n(const ConfidenceParams& cp, double sigma2, double interval_l);

/// Solves the same inequality for eps at fixed N by bisection (the bound is
/// monotone in eps). Throws if no root lies in (0, L).
double hoeffding_epsilon(int n, double delta, double sigma2,
                         double interval_l);

/// First-order Hoeffding (no variance): smallest N with
/// 2 exp(-2 N eps^2 / L^2) <= delta.
int first_order_n(const ConfidenceParams& cp, double interval_l);
double first_order_epsilon(int n, double delta, double interval_l);

/// Total variance budget sigma^2 + 1/(2R) for the two-copy shot estimate.
double total_variance(double sigma2, int shots);

}  // namespace urb
