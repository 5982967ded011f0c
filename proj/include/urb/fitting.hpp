#pragma once

#include <optional>
#include <string>
#include <vector>

namespace urb {

struct DecayFit {
  double u_hat = 0.0;
  double b_hat = 0.0;
  std::vector<std::pair<int, double>> residuals;  // (m, log-domain residual)
  double r_squared = 1.0;
  std::vector<int> dropped_m;  // lengths excluded for nonpositive mean
};

/// Least squares on ln q_m = ln B + (m-1) ln u. Points with q_m <= 0 are
/// dropped (two-copy means can dip below zero under SPAM noise); at least two
/// usable distinct lengths must remain. Optional per-point weights.
DecayFit fit_decay(const std::vector<std::pair<int, double>>& points,
                   const std::optional<std::vector<double>>& weights = {});

std::string fit_to_json(const DecayFit& fit);

}  // namespace urb
