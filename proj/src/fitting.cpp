#include "urb/fitting.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

namespace urb {

DecayFit fit_decay(const std::vector<std::pair<int, double>>& points,
                   const std::optional<std::vector<double>>& weights) {
  if (weights && weights->size() != points.size())
    throw std::invalid_argument("fit_decay: weights length mismatch");
  DecayFit fit;
  std::vector<double> x, y, w;
  std::set<int> distinct;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [m, q] = points[i];
    if (m < 1) throw std::invalid_argument("fit_decay: m >= 1");
    if (q <= 0.0) {
      fit.dropped_m.push_back(m);
      continue;
    }
    x.push_back(static_cast<double>(m - 1));
    y.push_back(std::log(q));
    w.push_back(weights ? (*weights)[i] : 1.0);
    distinct.insert(m);
  }
  if (distinct.size() < 2)
    throw std::invalid_argument(
        "fit_decay: need at least two usable distinct sequence lengths");

  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (std::abs(det) < 1e-15)
    throw std::invalid_argument("fit_decay: degenerate design");
  const double slope = (sw * sxy - sx * sy) / det;
  const double intercept = (sxx * sy - sx * sxy) / det;
  fit.u_hat = std::exp(slope);
  fit.b_hat = std::exp(intercept);

  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / sw;
  std::size_t i = 0;
  for (const auto& [m, q] : points) {
    if (q <= 0.0) continue;
    const double pred = intercept + slope * (m - 1);
    const double res = std::log(q) - pred;
    fit.residuals.emplace_back(m, res);
    ss_res += w[i] * res * res;
    ss_tot += w[i] * (std::log(q) - ybar) * (std::log(q) - ybar);
    ++i;
  }
  fit.r_squared = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::string fit_to_json(const DecayFit& fit) {
  nlohmann::json j;
  j["u_hat"] = fit.u_hat;
  j["B_hat"] = fit.b_hat;
  j["r_squared"] = fit.r_squared;
  j["dropped_m"] = fit.dropped_m;
  nlohmann::json res = nlohmann::json::array();
  for (const auto& [m, r] : fit.residuals) res.push_back({{"m", m}, {"residual", r}});
  j["residuals"] = res;
  return j.dump(2);
}

}  // namespace urb
