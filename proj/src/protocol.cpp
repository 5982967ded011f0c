#include "urb/protocol.hpp"

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace urb {

namespace {

int qubits_for_dim(int d) {
  int q = 0, x = 1;
  while (x < d) {
    x <<= 1;
    ++q;
  }
  if (x != d) throw std::invalid_argument("dimension must be a power of 2");
  return q;
}

CMatrix swap_operator(int d) {
  CMatrix s = CMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
  return s;
}

// Coefficient matrix V_ab = Tr[(sigma_a x sigma_b) A] of a two-copy operator.
RMatrix two_copy_coeffs(const DenseOperator& a) {
  if (a.copies != 2)
    throw std::invalid_argument("two_copy_coeffs: need a 2-copy operator");
  RVector flat = pauli_coefficients(a);
  const int n = static_cast<int>(pauli_count(a.q));
  RMatrix v(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = flat(i * n + j);
  return v;
}

// K V K^T for every gate in the sequence, with K = ptm(C) * Lambda. The
// Clifford factor is a signed permutation and is applied as one rather than
// as a dense product.
RMatrix evolve_two_copy(const Sequence& seq, const TransferMatrix& lambda,
                        RMatrix v) {
  const auto& group = clifford_group(lambda.q);
  const int n = lambda.dim();
  RMatrix w(n, n);
  for (int id : seq) {
    const CliffordElement& g = group[id];
    const RMatrix lv = lambda.m * v * lambda.m.transpose();
    w(0, 0) = lv(0, 0);
    for (int b = 1; b < n; ++b) {
      w(0, g.img[b - 1]) = g.sgn[b - 1] * lv(0, b);
      w(g.img[b - 1], 0) = g.sgn[b - 1] * lv(b, 0);
    }
    for (int a = 1; a < n; ++a)
      for (int b = 1; b < n; ++b)
        w(g.img[a - 1], g.img[b - 1]) =
            g.sgn[a - 1] * g.sgn[b - 1] * lv(a, b);
    v = w;
  }
  return v;
}

RVector evolve_single_copy(const Sequence& seq, const TransferMatrix& lambda,
                           RVector v) {
  const auto& group = clifford_group(lambda.q);
  const int n = lambda.dim();
  RVector w(n);
  for (int id : seq) {
    const CliffordElement& g = group[id];
    const RVector lv = lambda.m * v;
    w(0) = lv(0);
    for (int b = 1; b < n; ++b) w(g.img[b - 1]) = g.sgn[b - 1] * lv(b);
    v = w;
  }
  return v;
}

DenseOperator random_state(int q, int copies, RngStream& rng) {
  int dim = 1;
  for (int c = 0; c < copies; ++c) dim *= (1 << q);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  CMatrix w = g * g.adjoint();
  return DenseOperator{q, copies, w / w.trace().real()};
}

DenseOperator random_observable(int q, int copies, RngStream& rng) {
  int dim = 1;
  for (int c = 0; c < copies; ++c) dim *= (1 << q);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  CMatrix h = (g + g.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  RVector ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  RVector clipped = (ev / scale).cwiseMax(-1.0).cwiseMin(1.0);
  return DenseOperator{
      q, copies,
      es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint()};
}

double clamp01(double x, const char* what) {
  if (x < -1e-7 || x > 1.0 + 1e-7)
    throw std::runtime_error(std::string(what) +
                             ": outcome probability outside [0,1]");
  return std::min(1.0, std::max(0.0, x));
}

// Draw R shots of the {-1, 0, +1} difference variable for probabilities a, b.
template <typename Tally>
double draw_difference_shots(double a, double b, int shots, RngStream& rng,
                             Tally&& tally) {
  std::bernoulli_distribution da(a), db(b);
  long sum = 0;
  for (int r = 0; r < shots; ++r) {
    const int x = (da(rng) ? 1 : 0) - (db(rng) ? 1 : 0);
    sum += x;
    tally(x);
  }
  return static_cast<double>(sum) / shots;
}

}  // namespace

TwoCopySpam ideal_two_copy_operators(int d) {
  const int q = qubits_for_dim(d);
  const int dim = d * d;
  const CMatrix s = swap_operator(d);
  const CMatrix id = CMatrix::Identity(dim, dim);
  TwoCopySpam out;
  out.rho = DenseOperator{q, 2, (id + s) / static_cast<double>(d * (d + 1))};
  out.rho_hat =
      DenseOperator{q, 2, (id - s) / static_cast<double>(d * (d - 1))};
  out.e = DenseOperator{q, 2, s};
  return out;
}

SingleCopySetting ideal_single_copy_operators(const PauliIndex& p,
                                              const PauliIndex& q_meas) {
  if (p.is_identity() || q_meas.is_identity())
    throw std::invalid_argument(
        "ideal_single_copy_operators: P, Q must be nonidentity");
  const int d = 1 << p.q;
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix pm = pauli_matrix_unnormalized(p);
  SingleCopySetting out;
  out.rho = DenseOperator{p.q, 1, (id + pm) / static_cast<double>(d)};
  out.rho_hat = DenseOperator{p.q, 1, (id - pm) / static_cast<double>(d)};
  out.e = DenseOperator{p.q, 1, pauli_matrix_unnormalized(q_meas)};
  return out;
}

SingleCopySpam ideal_single_copy_family(int q) {
  const int n = static_cast<int>(pauli_count(q));
  SingleCopySpam fam;
  for (int l = 1; l < n; ++l) {
    auto set = ideal_single_copy_operators(
        PauliIndex{q, static_cast<std::uint32_t>(l)},
        PauliIndex{q, static_cast<std::uint32_t>(l)});
    fam.rho.push_back(set.rho);
    fam.rho_hat.push_back(set.rho_hat);
    fam.e.push_back(set.e);
  }
  return fam;
}

SpamModel ideal_spam(int q, Implementation impl) {
  SpamModel spam;
  spam.q = q;
  if (impl == Implementation::two_copy)
    spam.two_copy = ideal_two_copy_operators(1 << q);
  else
    spam.single_copy = ideal_single_copy_family(q);
  return spam;
}

SpamModel perturbed_spam(int q, Implementation impl, double eta,
                         RngStream& rng) {
  if (eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("perturbed_spam: eta outside [0,1]");
  SpamModel spam = ideal_spam(q, impl);
  if (impl == Implementation::two_copy) {
    auto& tc = *spam.two_copy;
    tc.rho.mat = (1 - eta) * tc.rho.mat + eta * random_state(q, 2, rng).mat;
    tc.rho_hat.mat =
        (1 - eta) * tc.rho_hat.mat + eta * random_state(q, 2, rng).mat;
    tc.e.mat = (1 - eta) * tc.e.mat + eta * random_observable(q, 2, rng).mat;
  } else {
    auto& sc = *spam.single_copy;
    for (auto& r : sc.rho)
      r.mat = (1 - eta) * r.mat + eta * random_state(q, 1, rng).mat;
    for (auto& r : sc.rho_hat)
      r.mat = (1 - eta) * r.mat + eta * random_state(q, 1, rng).mat;
    for (auto& e : sc.e)
      e.mat = (1 - eta) * e.mat + eta * random_observable(q, 1, rng).mat;
  }
  return spam;
}

std::pair<DenseOperator, DenseOperator> effective_operators(
    const SingleCopySpam& s) {
  if (s.rho.empty() || s.rho.size() != s.rho_hat.size() ||
      s.rho.size() != s.e.size())
    throw std::invalid_argument("effective_operators: incomplete family");
  const int q = s.rho[0].q;
  const int d = 1 << q;
  const int n1 = d * d - 1;
  if (static_cast<int>(s.rho.size()) != n1)
    throw std::invalid_argument("effective_operators: incomplete family");
  CMatrix rho_eff = CMatrix::Zero(d * d, d * d);
  CMatrix e_eff = CMatrix::Zero(d * d, d * d);
  for (int i = 0; i < n1; ++i) {
    const CMatrix rb = (s.rho[i].mat - s.rho_hat[i].mat) / 2.0;
    const CMatrix eb =
        s.e[i].mat -
        (s.e[i].mat.trace() / static_cast<double>(d)) * CMatrix::Identity(d, d);
    rho_eff += Eigen::kroneckerProduct(rb, rb);
    e_eff += Eigen::kroneckerProduct(eb, eb);
  }
  rho_eff *= static_cast<double>(d) / n1;
  e_eff /= static_cast<double>(d);
  return {DenseOperator{q, 2, rho_eff}, DenseOperator{q, 2, e_eff}};
}

Sequence sample_sequence(int q, int m, RngStream& rng) {
  const auto& group = clifford_group(q);
  std::uniform_int_distribution<int> dist(0,
                                          static_cast<int>(group.size()) - 1);
  Sequence seq(m);
  for (int s = 0; s < m; ++s) seq[s] = dist(rng);
  return seq;
}

double sequence_purity_two_copy(const Sequence& seq,
                                const TransferMatrix& lambda,
                                const SpamModel& spam) {
  if (!spam.two_copy)
    throw std::invalid_argument("sequence_purity_two_copy: missing operators");
  const auto& tc = *spam.two_copy;
  RMatrix v = two_copy_coeffs(DenseOperator{
      spam.q, 2, (tc.rho.mat - tc.rho_hat.mat) / 2.0});
  v = evolve_two_copy(seq, lambda, std::move(v));
  const RMatrix w = two_copy_coeffs(tc.e);
  return (w.array() * v.array()).sum();
}

double sequence_purity_single_copy(const Sequence& seq,
                                   const TransferMatrix& lambda,
                                   const SpamModel& spam) {
  if (!spam.single_copy)
    throw std::invalid_argument(
        "sequence_purity_single_copy: missing operators");
  const auto& sc = *spam.single_copy;
  const int d = 1 << spam.q;
  const int n1 = d * d - 1;
  double total = 0.0;
  for (int p = 0; p < n1; ++p) {
    RVector v = pauli_coefficients(DenseOperator{
        spam.q, 1, (sc.rho[p].mat - sc.rho_hat[p].mat) / 2.0});
    v = evolve_single_copy(seq, lambda, std::move(v));
    for (int qq = 0; qq < n1; ++qq) {
      RVector w = pauli_coefficients(sc.e[qq]);
      w[0] = 0.0;  // traceless part; makes no difference against traceless v
      const double x = w.dot(v);
      total += x * x;
    }
  }
  return total / n1;
}

TwoCopyShotResult sample_shots_two_copy(const Sequence& seq,
                                        const TransferMatrix& lambda,
                                        const SpamModel& spam, int shots,
                                        RngStream& rng) {
  if (shots < 1)
    throw std::invalid_argument("sample_shots_two_copy: R >= 1");
  if (!spam.two_copy)
    throw std::invalid_argument("sample_shots_two_copy: missing operators");
  const auto& tc = *spam.two_copy;
  const RMatrix w = two_copy_coeffs(tc.e);
  RMatrix vr = evolve_two_copy(seq, lambda, two_copy_coeffs(tc.rho));
  RMatrix vh = evolve_two_copy(seq, lambda, two_copy_coeffs(tc.rho_hat));
  // a = Tr[M G(rho)] with M = (I+E)/2 and Tr[G(rho)] = 1
  const double a =
      clamp01(0.5 * (1.0 + (w.array() * vr.array()).sum()), "two_copy a");
  const double b =
      clamp01(0.5 * (1.0 + (w.array() * vh.array()).sum()), "two_copy b");
  TwoCopyShotResult res;
  res.q_bar = draw_difference_shots(a, b, shots, rng,
                                    [&](int x) { res.tallies[x + 1]++; });
  return res;
}

namespace {

double single_copy_shot_estimate(const Sequence& seq,
                                 const TransferMatrix& lambda,
                                 const SpamModel& spam, int shots,
                                 RngStream& rng, bool corrected) {
  if (!spam.single_copy)
    throw std::invalid_argument("sample_shots_single_copy: missing operators");
  const auto& sc = *spam.single_copy;
  const int d = 1 << spam.q;
  const int n1 = d * d - 1;
  double total = 0.0;
  for (int p = 0; p < n1; ++p) {
    RVector vr = evolve_single_copy(seq, lambda,
                                    pauli_coefficients(sc.rho[p]));
    RVector vh = evolve_single_copy(seq, lambda,
                                    pauli_coefficients(sc.rho_hat[p]));
    for (int qq = 0; qq < n1; ++qq) {
      const RVector w = pauli_coefficients(sc.e[qq]);
      const double a = clamp01(0.5 * (1.0 + w.dot(vr)), "single_copy a");
      const double b = clamp01(0.5 * (1.0 + w.dot(vh)), "single_copy b");
      double sum = 0.0, sumsq = 0.0;
      std::bernoulli_distribution da(a), db(b);
      for (int r = 0; r < shots; ++r) {
        const int x = (da(rng) ? 1 : 0) - (db(rng) ? 1 : 0);
        sum += x;
        sumsq += x * x;
      }
      const double xbar = sum / shots;
      total += xbar * xbar;
      if (corrected) {
        const double s2 = (sumsq - shots * xbar * xbar) / (shots - 1);
        total -= s2 / shots;
      }
    }
  }
  return total / n1;
}

}  // namespace

double sample_shots_single_copy(const Sequence& seq,
                                const TransferMatrix& lambda,
                                const SpamModel& spam, int shots,
                                RngStream& rng) {
  if (shots < 2)
    throw std::invalid_argument(
        "sample_shots_single_copy: R >= 2 (bias correction needs a variance "
        "estimate)");
  return single_copy_shot_estimate(seq, lambda, spam, shots, rng, true);
}

double sample_shots_single_copy_naive(const Sequence& seq,
                                      const TransferMatrix& lambda,
                                      const SpamModel& spam, int shots,
                                      RngStream& rng) {
  if (shots < 1)
    throw std::invalid_argument("sample_shots_single_copy_naive: R >= 1");
  return single_copy_shot_estimate(seq, lambda, spam, shots, rng, false);
}

double ExperimentDataset::mean_at(std::size_t i) const {
  const auto& s = samples.at(i);
  double sum = 0.0;
  for (double x : s) sum += x;
  return sum / s.size();
}

double ExperimentDataset::variance_at(std::size_t i) const {
  const auto& s = samples.at(i);
  const double mu = mean_at(i);
  double acc = 0.0;
  for (double x : s) acc += (x - mu) * (x - mu);
  return acc / (s.size() - 1);
}

ExperimentDataset run_experiment(const ProtocolConfig& config,
                                 const TransferMatrix& lambda,
                                 const SpamModel& spam) {
  if (config.sequence_lengths.empty() || config.sequences_per_length < 1)
    throw std::invalid_argument("run_experiment: empty plan");
  for (int m : config.sequence_lengths)
    if (m < 1) throw std::invalid_argument("run_experiment: m >= 1");
  if (!config.exact) {
    const int min_shots =
        (config.impl == Implementation::single_copy) ? 2 : 1;
    if (config.shots < min_shots)
      throw std::invalid_argument("run_experiment: too few shots");
  }
  ExperimentDataset ds;
  ds.config = config;
  const bool keep_tallies =
      !config.exact && config.impl == Implementation::two_copy;
  for (int m : config.sequence_lengths) {
    std::vector<double> col(config.sequences_per_length);
    std::vector<std::array<long, 3>> tally_col;
    for (int k = 0; k < config.sequences_per_length; ++k) {
      RngStream stream(derive_seed(config.seed, static_cast<std::uint64_t>(m),
                                   static_cast<std::uint64_t>(k)));
      const Sequence seq = sample_sequence(config.q, m, stream);
      double value;
      if (config.impl == Implementation::two_copy) {
        if (config.exact) {
          value = sequence_purity_two_copy(seq, lambda, spam);
        } else {
          const auto res =
              sample_shots_two_copy(seq, lambda, spam, config.shots, stream);
          value = res.q_bar;
          tally_col.push_back(res.tallies);
        }
      } else {
        value = config.exact
                    ? sequence_purity_single_copy(seq, lambda, spam)
                    : sample_shots_single_copy(seq, lambda, spam,
                                               config.shots, stream);
      }
      col[k] = value;
    }
    ds.samples.push_back(std::move(col));
    if (keep_tallies) ds.tallies.push_back(std::move(tally_col));
  }
  return ds;
}

namespace {

nlohmann::json config_to_json(const ProtocolConfig& c) {
  nlohmann::json j;
  j["q"] = c.q;
  j["implementation"] =
      (c.impl == Implementation::two_copy) ? "two_copy" : "single_copy";
  j["sequence_lengths"] = c.sequence_lengths;
  j["sequences_per_length"] = c.sequences_per_length;
  j["exact"] = c.exact;
  j["shots"] = c.shots;
  j["seed"] = c.seed;
  return j;
}

ProtocolConfig config_from_json(const nlohmann::json& j) {
  ProtocolConfig c;
  c.q = j.at("q").get<int>();
  c.impl = (j.at("implementation").get<std::string>() == "two_copy")
               ? Implementation::two_copy
               : Implementation::single_copy;
  c.sequence_lengths = j.at("sequence_lengths").get<std::vector<int>>();
  c.sequences_per_length = j.at("sequences_per_length").get<int>();
  c.exact = j.at("exact").get<bool>();
  c.shots = j.at("shots").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string dataset_to_json(const ExperimentDataset& ds) {
  nlohmann::json j;
  j["config"] = config_to_json(ds.config);
  j["samples"] = ds.samples;
  if (!ds.tallies.empty()) j["tallies"] = ds.tallies;
  return j.dump(2);
}

ExperimentDataset dataset_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  ExperimentDataset ds;
  ds.config = config_from_json(j.at("config"));
  ds.samples = j.at("samples").get<std::vector<std::vector<double>>>();
  if (j.contains("tallies"))
    ds.tallies =
        j.at("tallies").get<std::vector<std::vector<std::array<long, 3>>>>();
  return ds;
}

std::string dataset_to_csv(const ExperimentDataset& ds) {
  std::ostringstream out;
  // config echo as a comment line keeps the flat format self-describing
  out << "# config " << config_to_json(ds.config).dump() << '\n';
  out << "m,sample_index,q_value,n_shots\n";
  out.precision(17);
  const int shots = ds.config.exact ? 0 : ds.config.shots;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    for (std::size_t k = 0; k < ds.samples[i].size(); ++k)
      out << ds.config.sequence_lengths[i] << ',' << k << ','
          << ds.samples[i][k] << ',' << shots << '\n';
  return out.str();
}

ExperimentDataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ExperimentDataset ds;
  bool have_config = false, have_header = false;
  std::map<int, std::vector<double>> by_m;
  int shots = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# config ", 0) == 0) {
      ds.config = config_from_json(nlohmann::json::parse(line.substr(9)));
      have_config = true;
      continue;
    }
    if (line[0] == '#') continue;
    if (!have_header) {
      have_header = true;  // column header row
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    const int m = std::stoi(field);
    std::getline(row, field, ',');
    std::getline(row, field, ',');
    const double q_value = std::stod(field);
    if (std::getline(row, field, ',')) shots = std::stoi(field);
    by_m[m].push_back(q_value);
  }
  if (!have_header)
    throw std::invalid_argument("dataset_from_csv: empty input");
  if (have_config) {
    // keep sample columns in the config's length order
    for (int m : ds.config.sequence_lengths) ds.samples.push_back(by_m.at(m));
    return ds;
  }
  for (const auto& [m, col] : by_m) {
    ds.config.sequence_lengths.push_back(m);
    ds.samples.push_back(col);
  }
  ds.config.exact = (shots == 0);
  ds.config.shots = shots;
  if (!ds.samples.empty())
    ds.config.sequences_per_length = static_cast<int>(ds.samples[0].size());
  return ds;
}

}  // namespace urb
