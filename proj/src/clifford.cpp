#include "urb/clifford.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

#include "urb/channels.hpp"

namespace urb {

namespace {

CMatrix kron2(const CMatrix& a, const CMatrix& b) {
  return Eigen::kroneckerProduct(a, b);
}

std::vector<CMatrix> build_generators(int q) {
  CMatrix I2 = CMatrix::Identity(2, 2);
  CMatrix H(2, 2), S(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  H << s, s, s, -s;
  S << 1, 0, 0, Complex(0, 1);
  if (q == 1) return {H, S};
  if (q == 2) {
    CMatrix cnot01 = CMatrix::Zero(4, 4);  // control qubit 0, target qubit 1
    cnot01(0, 0) = 1;
    cnot01(1, 1) = 1;
    cnot01(2, 3) = 1;
    cnot01(3, 2) = 1;
    CMatrix cnot10 = CMatrix::Zero(4, 4);
    cnot10(0, 0) = 1;
    cnot10(1, 3) = 1;
    cnot10(2, 2) = 1;
    cnot10(3, 1) = 1;
    return {kron2(H, I2), kron2(I2, H), kron2(S, I2), kron2(I2, S),
            cnot01, cnot10};
  }
  throw std::invalid_argument("clifford generators: q must be 1 or 2");
}

// Action table of a unitary on the nonidentity Paulis, found by matching
// U sigma U^dag against +-sigma'.
CliffordElement table_of_unitary(int q, const CMatrix& u) {
  const int n = static_cast<int>(pauli_count(q)) - 1;
  CliffordElement c;
  c.q = q;
  c.img.resize(n);
  c.sgn.resize(n);
  std::vector<CMatrix> basis(n + 1);
  for (int l = 0; l <= n; ++l)
    basis[l] = pauli_matrix(PauliIndex{q, static_cast<std::uint32_t>(l)}).mat;
  for (int l = 1; l <= n; ++l) {
    CMatrix conj = u * basis[l] * u.adjoint();
    bool found = false;
    for (int m = 1; m <= n && !found; ++m) {
      const Complex ip = (basis[m].adjoint() * conj).trace();
      if (std::abs(ip - 1.0) < 1e-9) {
        c.img[l - 1] = static_cast<std::uint8_t>(m);
        c.sgn[l - 1] = +1;
        found = true;
      } else if (std::abs(ip + 1.0) < 1e-9) {
        c.img[l - 1] = static_cast<std::uint8_t>(m);
        c.sgn[l - 1] = -1;
        found = true;
      }
    }
    if (!found) throw std::runtime_error("unitary is not Clifford");
  }
  return c;
}

std::vector<std::uint8_t> fingerprint(const CliffordElement& c) {
  std::vector<std::uint8_t> f;
  f.reserve(c.img.size() * 2);
  for (std::size_t i = 0; i < c.img.size(); ++i) {
    f.push_back(c.img[i]);
    f.push_back(static_cast<std::uint8_t>(c.sgn[i] > 0 ? 1 : 0));
  }
  return f;
}

std::vector<CliffordElement> enumerate_group(int q) {
  if (q != 1 && q != 2)
    throw std::invalid_argument("clifford enumeration supports q in {1,2}");
  const auto& gens = clifford_generators(q);
  std::vector<CliffordElement> gen_tables;
  for (const auto& u : gens) gen_tables.push_back(table_of_unitary(q, u));

  const int n = static_cast<int>(pauli_count(q)) - 1;
  CliffordElement ident;
  ident.q = q;
  ident.img.resize(n);
  ident.sgn.assign(n, +1);
  for (int l = 1; l <= n; ++l) ident.img[l - 1] = static_cast<std::uint8_t>(l);

  std::map<std::vector<std::uint8_t>, CliffordElement> seen;
  seen.emplace(fingerprint(ident), ident);
  std::vector<CliffordElement> frontier{ident};
  while (!frontier.empty()) {
    std::vector<CliffordElement> next;
    for (const auto& t : frontier) {
      for (std::size_t g = 0; g < gen_tables.size(); ++g) {
        CliffordElement c = compose(gen_tables[g], t);
        c.word = t.word;
        c.word.push_back(static_cast<std::uint8_t>(g));
        auto f = fingerprint(c);
        if (seen.emplace(std::move(f), c).second) next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  if (seen.size() != clifford_group_size(q))
    throw std::runtime_error("clifford enumeration: wrong group size");

  // std::map iteration gives the fingerprint-sorted canonical order.
  std::vector<CliffordElement> out;
  out.reserve(seen.size());
  int id = 0;
  for (auto& [f, c] : seen) {
    c.id = id++;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

SignedPauli CliffordElement::apply(const SignedPauli& p) const {
  if (p.pauli.q != q)
    throw std::invalid_argument("CliffordElement::apply: qubit mismatch");
  if (p.pauli.is_identity()) return p;
  const std::uint32_t l = p.pauli.label;
  return SignedPauli{p.sign * sgn[l - 1],
                     PauliIndex{q, static_cast<std::uint32_t>(img[l - 1])}};
}

std::uint64_t clifford_group_size(int q) {
  if (q < 1) throw std::invalid_argument("clifford_group_size: q >= 1");
  std::uint64_t size = 1;
  for (int j = 1; j <= q; ++j) {
    const std::uint64_t f = 1ULL << (2 * j);  // 4^j
    size *= 2 * (f - 1) * f;
  }
  return size;
}

const std::vector<CMatrix>& clifford_generators(int q) {
  static const std::vector<CMatrix> g1 = build_generators(1);
  static const std::vector<CMatrix> g2 = build_generators(2);
  if (q == 1) return g1;
  if (q == 2) return g2;
  throw std::invalid_argument("clifford_generators: q must be 1 or 2");
}

const std::vector<CliffordElement>& clifford_group(int q) {
  static std::once_flag once1, once2;
  static std::vector<CliffordElement> g1, g2;
  if (q == 1) {
    std::call_once(once1, [] { g1 = enumerate_group(1); });
    return g1;
  }
  if (q == 2) {
    std::call_once(once2, [] { g2 = enumerate_group(2); });
    return g2;
  }
  throw std::invalid_argument("clifford_group: q must be 1 or 2");
}

const CliffordElement& sample_uniform_clifford(int q, RngStream& rng) {
  const auto& group = clifford_group(q);
  std::uniform_int_distribution<std::size_t> dist(0, group.size() - 1);
  return group[dist(rng)];
}

CliffordElement compose(const CliffordElement& c2, const CliffordElement& c1) {
  if (c1.q != c2.q) throw std::invalid_argument("compose: qubit mismatch");
  CliffordElement out;
  out.q = c1.q;
  const std::size_t n = c1.img.size();
  out.img.resize(n);
  out.sgn.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    const int mid = c1.img[l];
    out.img[l] = c2.img[mid - 1];
    out.sgn[l] = static_cast<std::int8_t>(c1.sgn[l] * c2.sgn[mid - 1]);
  }
  return out;
}

CliffordElement inverse(const CliffordElement& c) {
  CliffordElement out;
  out.q = c.q;
  const std::size_t n = c.img.size();
  out.img.resize(n);
  out.sgn.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    out.img[c.img[l] - 1] = static_cast<std::uint8_t>(l + 1);
    out.sgn[c.img[l] - 1] = c.sgn[l];
  }
  return out;
}

TransferMatrix ptm(const CliffordElement& c) {
  const int d2 = static_cast<int>(pauli_count(c.q));
  RMatrix m = RMatrix::Zero(d2, d2);
  m(0, 0) = 1.0;
  for (int l = 1; l < d2; ++l) m(c.img[l - 1], l) = c.sgn[l - 1];
  return TransferMatrix{c.q, std::move(m)};
}

CMatrix unitary_of(const CliffordElement& c) {
  const auto& gens = clifford_generators(c.q);
  CMatrix u = CMatrix::Identity(1 << c.q, 1 << c.q);
  for (const std::uint8_t g : c.word) u = gens[g] * u;
  return u;
}

}  // namespace urb
