#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "urb/fitting.hpp"

using namespace urb;

TEST_SUITE_BEGIN("fitting");

TEST_CASE("exact decay data is recovered exactly") {
  const double u = 0.98, b = 0.9;
  std::vector<std::pair<int, double>> pts;
  for (int m : {2, 10, 50}) pts.emplace_back(m, b * std::pow(u, m - 1));
  const auto fit = fit_decay(pts);
  CHECK(fit.u_hat == doctest::Approx(u).epsilon(1e-12));
  CHECK(fit.b_hat == doctest::Approx(b).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  for (const auto& [m, r] : fit.residuals) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("contract violations") {
  CHECK_THROWS_AS((void)fit_decay({{5, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS((void)fit_decay({{5, 0.5}, {5, 0.6}}), std::invalid_argument);
  CHECK_THROWS_AS((void)fit_decay({{2, -0.1}, {5, -0.2}, {9, 0.4}}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)fit_decay({{0, 0.5}, {3, 0.2}}), std::invalid_argument);
  std::vector<double> wrong_weights{1.0};
  CHECK_THROWS_AS((void)fit_decay({{2, 0.5}, {5, 0.2}}, wrong_weights),
                  std::invalid_argument);
}

TEST_CASE("nonpositive means are dropped with a record, fit proceeds") {
  std::vector<std::pair<int, double>> pts{
      {2, 0.9}, {10, 0.8}, {40, -0.01}, {60, 0.6}};
  const auto fit = fit_decay(pts);
  REQUIRE(fit.dropped_m.size() == 1);
  CHECK(fit.dropped_m[0] == 40);
  CHECK(fit.u_hat > 0.0);
}

TEST_CASE("scale equivariance and permutation invariance") {
  std::vector<std::pair<int, double>> pts{
      {2, 0.82}, {6, 0.71}, {14, 0.52}, {30, 0.31}};
  const auto base = fit_decay(pts);
  std::vector<std::pair<int, double>> scaled = pts;
  for (auto& [m, q] : scaled) q *= 3.7;
  const auto s = fit_decay(scaled);
  CHECK(s.u_hat == doctest::Approx(base.u_hat).epsilon(1e-12));
  CHECK(s.b_hat == doctest::Approx(3.7 * base.b_hat).epsilon(1e-12));

  std::vector<std::pair<int, double>> shuffled = pts;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto p = fit_decay(shuffled);
  CHECK(p.u_hat == doctest::Approx(base.u_hat).epsilon(1e-13));
  CHECK(p.b_hat == doctest::Approx(base.b_hat).epsilon(1e-13));
}

TEST_CASE("weights influence the solution toward the heavy points") {
  // two groups of points drawn from two different decays; weighting one group
  // strongly must pull u_hat toward that group's rate
  std::vector<std::pair<int, double>> pts;
  for (int m : {2, 8, 20}) pts.emplace_back(m, 0.95 * std::pow(0.99, m - 1));
  for (int m : {3, 9, 25}) pts.emplace_back(m, 0.95 * std::pow(0.90, m - 1));
  std::vector<double> heavy_first{100, 100, 100, 1e-6, 1e-6, 1e-6};
  std::vector<double> heavy_second{1e-6, 1e-6, 1e-6, 100, 100, 100};
  CHECK(fit_decay(pts, heavy_first).u_hat == doctest::Approx(0.99).epsilon(1e-4));
  CHECK(fit_decay(pts, heavy_second).u_hat == doctest::Approx(0.90).epsilon(1e-4));
}

TEST_CASE("fit report serialization") {
  const auto fit = fit_decay({{2, 0.9}, {10, 0.7}, {30, 0.4}});
  const auto text = fit_to_json(fit);
  CHECK(text.find("u_hat") != std::string::npos);
  CHECK(text.find("B_hat") != std::string::npos);
  CHECK(text.find("residuals") != std::string::npos);
}

TEST_SUITE_END();
