#include "urb/pauli.hpp"

#include <bit>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace urb {

namespace {

// Single-qubit Hermitian Pauli for one (x, z) bit pair: i^{x&z} X^x Z^z.
CMatrix single_factor(bool x, bool z) {
  CMatrix m(2, 2);
  if (!x && !z) {
    m << 1, 0, 0, 1;
  } else if (x && !z) {
    m << 0, 1, 1, 0;
  } else if (!x && z) {
    m << 1, 0, 0, -1;
  } else {
    m << 0, Complex(0, -1), Complex(0, 1), 0;
  }
  return m;
}

// Number of Y factors (positions with both bits set).
int y_count(const PauliIndex& p) {
  return std::popcount(p.x_bits() & p.z_bits());
}

// Materialized normalized Pauli-product bases, keyed by (q, copies). The
// conversions between dense operators and coefficient vectors live on hot
// paths, so the kron products are built once.
const std::vector<CMatrix>& product_basis(int q, int copies) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::vector<CMatrix>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find({q, copies});
  if (it != cache.end()) return it->second;

  const int d2 = static_cast<int>(pauli_count(q));
  std::vector<CMatrix> single(d2);
  for (int i = 0; i < d2; ++i)
    single[i] = pauli_matrix(PauliIndex{q, static_cast<std::uint32_t>(i)}).mat;
  std::vector<CMatrix> basis = single;
  for (int c = 1; c < copies; ++c) {
    std::vector<CMatrix> next;
    next.reserve(basis.size() * single.size());
    for (const auto& a : basis)
      for (const auto& b : single)
        next.push_back(Eigen::kroneckerProduct(a, b).eval());
    basis = std::move(next);
  }
  return cache.emplace(std::make_pair(q, copies), std::move(basis))
      .first->second;
}

}  // namespace

CMatrix pauli_matrix_unnormalized(const PauliIndex& idx) {
  if (idx.label >= pauli_count(idx.q))
    throw std::invalid_argument("pauli label out of range");
  CMatrix m = single_factor(idx.x_bits() & 1u, idx.z_bits() & 1u);
  for (int i = 1; i < idx.q; ++i) {
    const CMatrix f =
        single_factor((idx.x_bits() >> i) & 1u, (idx.z_bits() >> i) & 1u);
    m = Eigen::kroneckerProduct(m, f).eval();
  }
  return m;
}

DenseOperator pauli_matrix(const PauliIndex& idx) {
  const double d = static_cast<double>(1 << idx.q);
  return DenseOperator{idx.q, 1, pauli_matrix_unnormalized(idx) / std::sqrt(d)};
}

Complex hs_inner(const DenseOperator& a, const DenseOperator& b) {
  if (a.mat.rows() != b.mat.rows() || a.mat.cols() != b.mat.cols())
    throw std::invalid_argument("hs_inner: dimension mismatch");
  return (a.mat.adjoint() * b.mat).trace();
}

double schatten_norm(const CMatrix& a, SchattenP p) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("schatten_norm: matrix not square");
  Eigen::VectorXd sv;
  const bool hermitian = (a - a.adjoint()).cwiseAbs().maxCoeff() < 1e-12;
  if (hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
    sv = es.eigenvalues().cwiseAbs();
  } else {
    Eigen::JacobiSVD<CMatrix> svd(a);
    sv = svd.singularValues();
  }
  switch (p) {
    case SchattenP::one:
      return sv.sum();
    case SchattenP::two:
      return std::sqrt(sv.squaredNorm());
    case SchattenP::inf:
      return sv.maxCoeff();
  }
  return 0.0;  // unreachable
}

double schatten_norm(const DenseOperator& a, SchattenP p) {
  return schatten_norm(a.mat, p);
}

bool pauli_commute(const PauliIndex& a, const PauliIndex& b) {
  const int s = std::popcount(a.x_bits() & b.z_bits()) +
                std::popcount(a.z_bits() & b.x_bits());
  return (s % 2) == 0;
}

PauliProduct normalized_product(const SignedPauli& a, const SignedPauli& b) {
  if (a.pauli.q != b.pauli.q)
    throw std::invalid_argument("normalized_product: qubit count mismatch");
  const int q = a.pauli.q;
  const std::uint32_t xo = a.pauli.x_bits() ^ b.pauli.x_bits();
  const std::uint32_t zo = a.pauli.z_bits() ^ b.pauli.z_bits();
  PauliIndex out{q, xo | (zo << q)};
  // sigma_a sigma_b = i^t sigma_out with
  // t = y(a) + y(b) - y(out) + 2 |z_a & x_b|  (mod 4)
  int t = y_count(a.pauli) + y_count(b.pauli) - y_count(out) +
          2 * std::popcount(a.pauli.z_bits() & b.pauli.x_bits());
  t = ((t % 4) + 4) % 4;
  PauliProduct res;
  if (t == 1 || t == 3) {
    res.anticommuting = true;
    return res;
  }
  const int sign = (t == 0) ? +1 : -1;
  res.value = SignedPauli{a.sign * b.sign * sign, out};
  return res;
}

std::vector<PauliIndex> commutant_set(const PauliIndex& tau) {
  if (tau.is_identity())
    throw std::invalid_argument("commutant_set: tau must be nonidentity");
  std::vector<PauliIndex> out;
  for (std::uint32_t l = 1; l < pauli_count(tau.q); ++l) {
    if (l == tau.label) continue;
    PauliIndex s{tau.q, l};
    if (pauli_commute(s, tau)) out.push_back(s);
  }
  return out;
}

RVector pauli_coefficients(const DenseOperator& a) {
  const auto& basis = product_basis(a.q, a.copies);
  const long total = static_cast<long>(basis.size());
  RVector coeff(total);
  for (long flat = 0; flat < total; ++flat)
    coeff(flat) = ((basis[flat].adjoint() * a.mat).trace()).real();
  return coeff;
}

DenseOperator dense_from_pauli_coefficients(int q, int copies,
                                            const RVector& coeff) {
  const auto& basis = product_basis(q, copies);
  if (coeff.size() != static_cast<long>(basis.size()))
    throw std::invalid_argument("dense_from_pauli_coefficients: bad length");
  int dim = 1;
  for (int c = 0; c < copies; ++c) dim *= (1 << q);
  CMatrix out = CMatrix::Zero(dim, dim);
  for (long flat = 0; flat < coeff.size(); ++flat)
    if (coeff(flat) != 0.0) out += coeff(flat) * basis[flat];
  return DenseOperator{q, copies, out};
}

}  // namespace urb
