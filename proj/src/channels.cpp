#include "urb/channels.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

#include "urb/clifford.hpp"

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

}  // namespace

TransferMatrix identity_channel(int d) {
  const int q = qubits_for_dim(d);
  return TransferMatrix{q, RMatrix::Identity(d * d, d * d)};
}

bool is_trace_preserving(const TransferMatrix& l, double tol) {
  const int n = l.dim();
  if (std::abs(l.m(0, 0) - 1.0) > tol) return false;
  for (int j = 1; j < n; ++j)
    if (std::abs(l.m(0, j)) > tol) return false;
  return true;
}

double unitarity(const TransferMatrix& l) {
  if (!is_trace_preserving(l))
    throw std::invalid_argument("unitarity: channel is not trace preserving");
  const int n = l.dim();
  const auto lu = l.m.bottomRightCorner(n - 1, n - 1);
  return (lu.transpose() * lu).trace() / static_cast<double>(n - 1);
}

double rb_decay(const TransferMatrix& l) {
  const int n = l.dim();
  return (l.m.trace() - l.m(0, 0)) / static_cast<double>(n - 1);
}

double avg_gate_fidelity(const TransferMatrix& l) {
  if (!is_trace_preserving(l))
    throw std::invalid_argument("avg_gate_fidelity: channel not TP");
  const int d = 1 << l.q;
  return ((d - 1) * rb_decay(l) + 1.0) / d;
}

TransferMatrix depolarizing(double p, int d) {
  const int q = qubits_for_dim(d);
  const int n = d * d;
  if (p > 1.0 + 1e-15 || p < -1.0 / (n - 1) - 1e-15)
    throw std::invalid_argument("depolarizing: p outside CPTP range");
  RMatrix m = RMatrix::Identity(n, n) * p;
  m(0, 0) = 1.0;
  return TransferMatrix{q, std::move(m)};
}

TransferMatrix random_cptp(int d, int kraus_rank, RngStream& rng) {
  const int q = qubits_for_dim(d);
  if (kraus_rank < 1 || kraus_rank > d * d)
    throw std::invalid_argument("random_cptp: kraus_rank out of range");
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(d * kraus_rank, d);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  // Orthonormalize columns into an isometry, then slice into Kraus blocks.
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix iso = qr.householderQ() * CMatrix::Identity(d * kraus_rank, d);
  std::vector<CMatrix> kraus(kraus_rank);
  for (int a = 0; a < kraus_rank; ++a) kraus[a] = iso.block(a * d, 0, d, d);

  const int n = d * d;
  std::vector<CMatrix> basis(n);
  for (int i = 0; i < n; ++i)
    basis[i] = pauli_matrix(PauliIndex{q, static_cast<std::uint32_t>(i)}).mat;
  RMatrix m(n, n);
  for (int j = 0; j < n; ++j) {
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& k : kraus) out += k * basis[j] * k.adjoint();
    for (int i = 0; i < n; ++i)
      m(i, j) = ((basis[i].adjoint() * out).trace()).real();
  }
  return TransferMatrix{q, std::move(m)};
}

TransferMatrix mix_with_identity(const TransferMatrix& l, double w) {
  if (w < 0.0 || w > 1.0)
    throw std::invalid_argument("mix_with_identity: w outside [0,1]");
  const int n = l.dim();
  return TransferMatrix{l.q, (1.0 - w) * RMatrix::Identity(n, n) + w * l.m};
}

TransferMatrix random_unital(int d, int n_terms, RngStream& rng) {
  const int q = qubits_for_dim(d);
  if (q != 1 && q != 2)
    throw std::invalid_argument("random_unital: q must be 1 or 2");
  if (n_terms < 1) throw std::invalid_argument("random_unital: n_terms >= 1");
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(n_terms);
  double total = 0.0;
  for (auto& x : w) {
    x = expo(rng);
    total += x;
  }
  const int n = d * d;
  RMatrix m = RMatrix::Zero(n, n);
  for (int i = 0; i < n_terms; ++i)
    m += (w[i] / total) * ptm(sample_uniform_clifford(q, rng)).m;
  return TransferMatrix{q, std::move(m)};
}

RMatrix unital_block(const TransferMatrix& l) {
  const int n = l.dim();
  return l.m.bottomRightCorner(n - 1, n - 1);
}

RVector nonunitality(const TransferMatrix& l) {
  const int n = l.dim();
  return l.m.block(1, 0, n - 1, 1);
}

CMatrix choi_matrix(const TransferMatrix& l) {
  const int d = 1 << l.q;
  const int n = d * d;
  std::vector<CMatrix> basis(n);
  for (int i = 0; i < n; ++i)
    basis[i] = pauli_matrix(PauliIndex{l.q, static_cast<std::uint32_t>(i)}).mat;
  // C = sum_ij |i><j| (x) L(|i><j|), with L(|i><j|) expanded in the basis.
  CMatrix choi = CMatrix::Zero(n, n);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      CMatrix eij = CMatrix::Zero(d, d);
      eij(i, j) = 1.0;
      Eigen::VectorXcd cin(n);
      for (int k = 0; k < n; ++k) cin(k) = (basis[k].adjoint() * eij).trace();
      Eigen::VectorXcd cout = l.m.cast<Complex>() * cin;
      CMatrix lij = CMatrix::Zero(d, d);
      for (int k = 0; k < n; ++k) lij += cout(k) * basis[k];
      choi.block(i * d, j * d, d, d) = lij;
    }
  }
  return choi;
}

bool is_cptp(const TransferMatrix& l, double tol) {
  if (!is_trace_preserving(l, tol)) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(choi_matrix(l),
                                            Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

DenseOperator apply_channel(const TransferMatrix& l, const DenseOperator& a) {
  if (a.q != l.q || a.copies != 1)
    throw std::invalid_argument("apply_channel: operand mismatch");
  RVector c = pauli_coefficients(a);
  RVector out = l.m * c;
  return dense_from_pauli_coefficients(a.q, 1, out);
}

std::string channel_to_json(const TransferMatrix& l) {
  nlohmann::json j;
  j["q"] = l.q;
  std::vector<double> flat;
  flat.reserve(l.m.size());
  for (int i = 0; i < l.m.rows(); ++i)
    for (int k = 0; k < l.m.cols(); ++k) flat.push_back(l.m(i, k));
  j["ptm"] = flat;
  return j.dump(2);
}

TransferMatrix channel_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  const int q = j.at("q").get<int>();
  const auto flat = j.at("ptm").get<std::vector<double>>();
  const int n = static_cast<int>(pauli_count(q));
  if (flat.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("channel_from_json: wrong ptm length");
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = flat[i * n + k];
  return TransferMatrix{q, std::move(m)};
}

}  // namespace urb
