#include "urb/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "urb/protocol.hpp"

namespace urb {

SpamParams spam_decompose(const DenseOperator& rho_bar,
                          const DenseOperator& e) {
  if (rho_bar.copies != 2 || e.copies != 2)
    throw std::invalid_argument("spam_decompose: two-copy operators expected");
  if (std::abs(rho_bar.mat.trace()) > 1e-9)
    throw std::invalid_argument("spam_decompose: rho_bar must be traceless");
  const int d = rho_bar.base_dim();
  const double n1 = static_cast<double>(d) * d - 1.0;

  const auto ideal = ideal_two_copy_operators(d);
  DenseOperator rho_ideal{rho_bar.q, 2,
                          (ideal.rho.mat - ideal.rho_hat.mat) / 2.0};
  // E_bar_ideal = S - Tr[S]/d^2 I ; Tr[S] = d
  const int dim = rho_bar.dim();
  DenseOperator e_bar_ideal{
      rho_bar.q, 2,
      ideal.e.mat - (ideal.e.mat.trace() / static_cast<double>(dim)) *
                        CMatrix::Identity(dim, dim)};

  DenseOperator e_bar{rho_bar.q, 2,
                      e.mat - (e.mat.trace() / static_cast<double>(dim)) *
                                  CMatrix::Identity(dim, dim)};

  SpamParams out;
  out.alpha = n1 * hs_inner(rho_ideal, rho_bar).real();
  out.beta = hs_inner(e_bar_ideal, e_bar).real() / n1;

  DenseOperator rho_spam{rho_bar.q, 2,
                         rho_bar.mat - out.alpha * rho_ideal.mat};
  DenseOperator e_spam{rho_bar.q, 2, e_bar.mat - out.beta * e_bar_ideal.mat};
  out.rho_spam_trace_norm = schatten_norm(rho_spam, SchattenP::one);
  out.e_spam_inf_norm = schatten_norm(e_spam, SchattenP::inf);
  return out;
}

std::array<double, 3> c_constants(int d) {
  if (d < 2 || (d & (d - 1)) != 0)
    throw std::invalid_argument("c_constants: d must be a power of 2, d >= 2");
  if (d == 2) return {11.0 / 12.0, 13.0 / 9.0, 5.0 / 2.0};

  const double n = static_cast<double>(d) * d;  // d^2
  // irrep leaf dimensions; nonpositive ones are empty and dropped.
  std::vector<double> z12, zs;
  for (double v : {(d * (d + 1.0) - 2) / 2, (d * (d - 1.0) - 2) / 2})
    if (v > 0) z12.push_back(v);
  for (double v :
       {(n - 1) * d * (d + 2.0) / 8, (n - 1) * d * (d - 2.0) / 8,
        (n - 1) * (d * (d + 2.0) / 8 - 1), (n - 1) * (d * (d - 2.0) / 8 - 1)})
    if (v > 0) zs.push_back(v);
  const double v12 = n - 2;
  const double vs = (n - 1) * (n - 2) / 2;
  const double v_adj = n - 1;

  const double w12 = std::sqrt(n - 2) / n;                    // a_{1,2} bound
  const double ws = std::sqrt(2.0) * std::sqrt((n - 2) / (n - 1));  // a_S
  const double w_adj = std::sqrt(n - 1);                      // a_adj

  // c1 pairs each coefficient bound with <A_i|N^k|B2 B2> <= 1/sqrt(|V_i|).
  double c1 = w_adj / std::sqrt(v_adj);
  for (double v : z12) c1 += w12 * std::sqrt(v12) / v;
  for (double v : zs) c1 += ws * std::sqrt(vs) / v;

  // c2, c3 pair the same coefficients with the A_i Schatten-norm bounds.
  double k = w_adj;
  for (double v : z12) k += w12 * std::sqrt(v12 / v);
  for (double v : zs) k += ws * std::sqrt(vs / v);
  const double c2 = 4.0 * n / (n - 1) * k;
  const double c3 = (n - 1) / 4.0 * std::sqrt(6.0 / ((d - 2) * (d - 1))) * k;
  return {c1, c2, c3};
}

double variance_bound(const BoundInputs& in) {
  if (in.u < 0.0 || in.u > 1.0 + 1e-12)
    throw std::invalid_argument("variance_bound: u outside [0,1]");
  if (in.m && *in.m < 1)
    throw std::invalid_argument("variance_bound: m >= 1");
  const auto c = c_constants(in.d);
  const double u = std::min(in.u, 1.0);
  double front;
  if (!in.m) {
    front = (u == 1.0) ? 0.0 : (1.0 - u) / (1.0 + u);
  } else if (u == 1.0) {
    front = 0.0;
  } else {
    const int m = *in.m;
    front = (1.0 - std::pow(u, 2.0 * (m - 1))) / (1.0 - u * u) *
            (1.0 - u) * (1.0 - u);
  }
  const double r2 = in.spam.rho_spam_trace_norm * in.spam.rho_spam_trace_norm;
  const double e2 = in.spam.e_spam_inf_norm * in.spam.e_spam_inf_norm;
  const double a2 = in.spam.alpha * in.spam.alpha;
  const double b2 = in.spam.beta * in.spam.beta;
  return front * (a2 * b2 * c[0] + a2 * c[1] * e2 + b2 * c[2] * r2) + r2 * e2;
}

double interval_bound(const SpamParams& spam, bool use_alpha_beta) {
  const double r = spam.rho_spam_trace_norm;
  const double e = spam.e_spam_inf_norm;
  if (!use_alpha_beta) return 1.0 + r + e + r * e;
  if (spam.alpha < 0.0 || spam.beta < 0.0)
    throw std::invalid_argument(
        "interval_bound: refined form needs alpha, beta >= 0");
  return spam.alpha * spam.beta + spam.beta * r + spam.alpha * e + r * e;
}

namespace {

// ln of the per-sample base of the Hoeffding bound, in a form stable for
// sigma2 << eps L (log1p on both factors).
double ln_base(double eps, double sigma2, double l) {
  const double e1 = (l * l - eps * l) / (sigma2 + l * l);
  const double e2 = (sigma2 + eps * l) / (sigma2 + l * l);
  return -e1 * std::log1p(-eps / l) - e2 * std::log1p(eps * l / sigma2);
}

}  // namespace

int hoeffding_n(const ConfidenceParams& cp, double sigma2, double interval_l) {
  if (cp.epsilon <= 0.0 || cp.epsilon >= interval_l)
    throw std::domain_error("hoeffding_n: need 0 < epsilon < L");
  if (cp.delta <= 0.0 || cp.delta >= 1.0)
    throw std::domain_error("hoeffding_n: need 0 < delta < 1");
  if (sigma2 < 0.0) throw std::domain_error("hoeffding_n: sigma2 < 0");
  if (sigma2 == 0.0) return 1;  // point mass: one sample determines the mean
  const double lb = ln_base(cp.epsilon, sigma2, interval_l);
  if (!(lb < 0.0))
    throw std::domain_error("hoeffding_n: vacuous bound (base >= 1)");
  return static_cast<int>(std::ceil(std::log(cp.delta / 2.0) / lb));
}

double hoeffding_epsilon(int n, double delta, double sigma2,
                         double interval_l) {
  if (n < 1) throw std::domain_error("hoeffding_epsilon: N >= 1");
  if (delta <= 0.0 || delta >= 1.0)
    throw std::domain_error("hoeffding_epsilon: need 0 < delta < 1");
  if (sigma2 <= 0.0)
    throw std::domain_error("hoeffding_epsilon: sigma2 must be positive");
  const double target = std::log(delta / 2.0);
  // f(eps) = N ln_base(eps) decreases from 0; a root exists iff the eps -> L
  // limit undershoots the target.
  const double at_l =
      n * std::log(sigma2 / (sigma2 + interval_l * interval_l));
  if (at_l > target)
    throw std::domain_error("hoeffding_epsilon: no root in (0, L)");
  double lo = 0.0, hi = interval_l;
  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * interval_l; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (n * ln_base(mid, sigma2, interval_l) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

int first_order_n(const ConfidenceParams& cp, double interval_l) {
  if (cp.epsilon <= 0.0) throw std::domain_error("first_order_n: epsilon > 0");
  if (cp.delta >= 2.0) return 0;  // bound already holds with no data
  const double n = interval_l * interval_l /
                   (2.0 * cp.epsilon * cp.epsilon) *
                   std::log(2.0 / cp.delta);
  return static_cast<int>(std::ceil(n));
}

double first_order_epsilon(int n, double delta, double interval_l) {
  if (n < 1) throw std::domain_error("first_order_epsilon: N >= 1");
  return interval_l * std::sqrt(std::log(2.0 / delta) / (2.0 * n));
}

double total_variance(double sigma2, int shots) {
  if (shots < 1) throw std::invalid_argument("total_variance: R >= 1");
  return sigma2 + 1.0 / (2.0 * shots);
}

}  // namespace urb
