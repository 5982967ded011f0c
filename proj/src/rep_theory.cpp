#include "urb/rep_theory.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <unsupported/Eigen/KroneckerProduct>

namespace urb {

namespace {

RMatrix kron_r(const RMatrix& a, const RMatrix& b) {
  return Eigen::kroneckerProduct(a, b);
}

}  // namespace

double LiouvilleVec::norm2() const {
  double s = 0.0;
  for (const auto& [k, v] : coeff) s += v * v;
  return std::sqrt(s);
}

std::uint32_t LiouvilleVec::pack(const std::vector<int>& labels) {
  std::uint32_t key = 0;
  for (int l : labels) key = (key << 4) | static_cast<std::uint32_t>(l);
  return key;
}

void LiouvilleVec::unpack(std::uint32_t key, int copies, int* labels) {
  for (int c = copies - 1; c >= 0; --c) {
    labels[c] = static_cast<int>(key & 0xFu);
    key >>= 4;
  }
}

double dot(const LiouvilleVec& a, const LiouvilleVec& b) {
  if (a.q != b.q || a.copies != b.copies)
    throw std::invalid_argument("LiouvilleVec dot: shape mismatch");
  const auto* small = &a;
  const auto* large = &b;
  if (small->coeff.size() > large->coeff.size()) std::swap(small, large);
  double s = 0.0;
  for (const auto& [k, v] : small->coeff) {
    auto it = large->coeff.find(k);
    if (it != large->coeff.end()) s += v * it->second;
  }
  return s;
}

DenseOperator liouville_dense(const LiouvilleVec& v) {
  const int d2 = static_cast<int>(pauli_count(v.q));
  long dim = 1;
  for (int c = 0; c < v.copies; ++c) dim *= d2;
  RVector flat = RVector::Zero(dim);
  int labels[8];
  for (const auto& [k, c] : v.coeff) {
    LiouvilleVec::unpack(k, v.copies, labels);
    long idx = 0;
    for (int f = 0; f < v.copies; ++f) idx = idx * d2 + labels[f];
    flat[idx] += c;
  }
  return dense_from_pauli_coefficients(v.q, v.copies, flat);
}

LiouvilleVec apply_tensor_clifford(const CliffordElement& g,
                                   const LiouvilleVec& v) {
  if (g.q != v.q)
    throw std::invalid_argument("apply_tensor_clifford: qubit mismatch");
  LiouvilleVec out;
  out.q = v.q;
  out.copies = v.copies;
  out.coeff.reserve(v.coeff.size());
  int labels[8];
  for (const auto& [key, c] : v.coeff) {
    LiouvilleVec::unpack(key, v.copies, labels);
    int sign = 1;
    std::uint32_t nk = 0;
    for (int f = 0; f < v.copies; ++f) {
      const int l = labels[f];
      int img = l;
      if (l != 0) {
        img = g.img[l - 1];
        sign *= g.sgn[l - 1];
      }
      nk = (nk << 4) | static_cast<std::uint32_t>(img);
    }
    out.coeff[nk] += sign * c;
  }
  return out;
}

std::pair<LiouvilleVec, LiouvilleVec> basis_B(int d) {
  const int q = (d == 2) ? 1 : (d == 4) ? 2 : -1;
  if (q < 0) throw std::invalid_argument("basis_B: d must be 2 or 4");
  const int n = d * d;
  LiouvilleVec b1{q, 2, {}}, b2{q, 2, {}};
  b1.coeff[LiouvilleVec::pack({0, 0})] = 1.0;
  const double c = 1.0 / std::sqrt(static_cast<double>(n - 1));
  for (int s = 1; s < n; ++s) b2.coeff[LiouvilleVec::pack({s, s})] = c;
  return {b1, b2};
}

GroupAverager::GroupAverager(int n, int q) : n_(n), q_(q) {
  if (n != 2 && n != 4)
    throw std::invalid_argument("GroupAverager: n must be 2 or 4");
  if (q == 1) {
    const auto& group = clifford_group(1);
    const int dim = (n == 2) ? 16 : 256;
    dense_ = RMatrix::Zero(dim, dim);
    for (const auto& g : group) {
      RMatrix p = ptm(g).m;
      RMatrix t = kron_r(p, p);
      if (n == 4) t = kron_r(t, t);
      dense_ += t;
    }
    dense_ /= static_cast<double>(group.size());
  } else if (q != 2) {
    throw std::invalid_argument("GroupAverager: q must be 1 or 2");
  }
}

const RMatrix& GroupAverager::dense() const {
  if (q_ != 1)
    throw std::invalid_argument(
        "GroupAverager::dense is only available at q = 1");
  return dense_;
}

RVector GroupAverager::apply(const RVector& x) const {
  if (q_ == 1) return dense_ * x;
  const auto& group = clifford_group(2);
  const long dim = x.size();
  const long expect = (n_ == 2) ? 256 : 65536;
  if (dim != expect)
    throw std::invalid_argument("GroupAverager::apply: wrong vector length");

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_chunks = std::min<std::size_t>(hw, 16);
  const std::size_t chunk = (group.size() + n_chunks - 1) / n_chunks;
  std::vector<RVector> partial(n_chunks, RVector::Zero(dim));
  std::vector<std::thread> workers;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    workers.emplace_back([&, c] {
      const std::size_t lo = c * chunk;
      const std::size_t hi = std::min(group.size(), lo + chunk);
      RVector& acc = partial[c];
      std::vector<std::uint32_t> img4(dim);
      std::vector<double> sgn4(dim);
      for (std::size_t e = lo; e < hi; ++e) {
        const auto& g = group[e];
        // image/sign per single-copy label
        std::uint32_t img1[16];
        double sgn1[16];
        img1[0] = 0;
        sgn1[0] = 1.0;
        for (int l = 1; l < 16; ++l) {
          img1[l] = g.img[l - 1];
          sgn1[l] = g.sgn[l - 1];
        }
        if (n_ == 2) {
          for (long i = 0; i < dim; ++i) {
            const std::uint32_t l1 = static_cast<std::uint32_t>(i) >> 4;
            const std::uint32_t l0 = static_cast<std::uint32_t>(i) & 0xFu;
            acc[(img1[l1] << 4) | img1[l0]] += sgn1[l1] * sgn1[l0] * x[i];
          }
        } else {
          for (long i = 0; i < dim; ++i) {
            const std::uint32_t u = static_cast<std::uint32_t>(i);
            const std::uint32_t l3 = u >> 12, l2 = (u >> 8) & 0xFu,
                                l1 = (u >> 4) & 0xFu, l0 = u & 0xFu;
            const std::uint32_t key =
                (img1[l3] << 12) | (img1[l2] << 8) | (img1[l1] << 4) | img1[l0];
            acc[key] += sgn1[l3] * sgn1[l2] * sgn1[l1] * sgn1[l0] * x[i];
          }
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  RVector out = RVector::Zero(dim);
  for (std::size_t c = 0; c < n_chunks; ++c) out += partial[c];
  return out / static_cast<double>(group.size());
}

Eigen::Matrix2d m_matrix(const TransferMatrix& lambda) {
  if (!is_trace_preserving(lambda))
    throw std::invalid_argument("m_matrix: channel not trace preserving");
  const int n = lambda.dim();
  Eigen::Matrix2d m;
  const RVector alpha = nonunitality(lambda);
  m << 1.0, 0.0, alpha.squaredNorm() / std::sqrt(static_cast<double>(n - 1)),
      unitarity(lambda);
  return m;
}

TrivialBasis trivial_basis(int d) {
  if (d != 2 && d != 4)
    throw std::invalid_argument("trivial_basis: d must be 2 or 4");
  const int q = (d == 2) ? 1 : 2;
  const int n = d * d;
  TrivialBasis tb;
  tb.d = d;
  tb.a0 = LiouvilleVec{q, 4, {}};
  tb.a12 = LiouvilleVec{q, 4, {}};
  tb.aS = LiouvilleVec{q, 4, {}};

  for (int s = 1; s < n; ++s)
    for (int t = 1; t < n; ++t)
      tb.a0.coeff[LiouvilleVec::pack({s, s, t, t})] = 1.0 / (n - 1);

  const double c12 = 1.0 / std::sqrt(static_cast<double>(n - 2));
  for (int s = 1; s < n; ++s)
    tb.a12.coeff[LiouvilleVec::pack({s, s, s, s})] += c12;
  for (const auto& [k, v] : tb.a0.coeff) tb.a12.coeff[k] -= c12 * v;

  const double cs = std::sqrt(1.0 / (2.0 * (n - 1) * (n - 2)));
  for (int s = 1; s < n; ++s)
    for (int t = 1; t < n; ++t) {
      if (s == t) continue;
      tb.aS.coeff[LiouvilleVec::pack({s, t, s, t})] += cs;
      tb.aS.coeff[LiouvilleVec::pack({s, t, t, s})] += cs;
    }

  if (d >= 4) {
    tb.has_adj = true;
    tb.a_adj = LiouvilleVec{q, 4, {}};
    const double cadj =
        1.0 / (2.0 * (n - 4) * std::sqrt(static_cast<double>(n - 1)));
    for (int tau = 1; tau < n; ++tau) {
      // v_tau = sum_{sigma in C_tau} (sigma.tau) sigma + sigma (sigma.tau)
      std::vector<std::pair<std::pair<int, int>, double>> terms;
      for (const auto& sigma :
           commutant_set(PauliIndex{q, static_cast<std::uint32_t>(tau)})) {
        const auto prod = normalized_product(
            SignedPauli{+1, sigma},
            SignedPauli{+1, PauliIndex{q, static_cast<std::uint32_t>(tau)}});
        // commuting pair, the product is Hermitian by construction
        const int st = static_cast<int>(prod.value.pauli.label);
        const double sg = prod.value.sign;
        const int s = static_cast<int>(sigma.label);
        terms.push_back({{st, s}, sg});
        terms.push_back({{s, st}, sg});
      }
      for (const auto& [p1, c1] : terms)
        for (const auto& [p2, c2] : terms)
          tb.a_adj.coeff[LiouvilleVec::pack(
              {p1.first, p1.second, p2.first, p2.second})] += cadj * c1 * c2;
    }
  }
  return tb;
}

namespace {

// <A | Lambda^(x4) | B> for sparse A, B over nonidentity 4-tuples.
double sparse_sandwich(const LiouvilleVec& a, const RMatrix& lm,
                       const LiouvilleVec& b) {
  double total = 0.0;
  int la[4], lb[4];
  for (const auto& [ka, va] : a.coeff) {
    LiouvilleVec::unpack(ka, 4, la);
    double row = 0.0;
    for (const auto& [kb, vb] : b.coeff) {
      LiouvilleVec::unpack(kb, 4, lb);
      row += vb * lm(la[0], lb[0]) * lm(la[1], lb[1]) * lm(la[2], lb[2]) *
             lm(la[3], lb[3]);
    }
    total += va * row;
  }
  return total;
}

LiouvilleVec from_vector(int q, int copies, const RVector& x) {
  LiouvilleVec v{q, copies, {}};
  for (long i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) v.coeff[static_cast<std::uint32_t>(i)] = x[i];
  return v;
}

RVector to_vector(const LiouvilleVec& v, long dim) {
  RVector x = RVector::Zero(dim);
  // pack() uses 4 bits per factor which coincides with flat indexing only at
  // q = 2; q = 1 keys must be re-based from stride 16 to stride 4.
  int labels[8];
  for (const auto& [k, c] : v.coeff) {
    LiouvilleVec::unpack(k, v.copies, labels);
    long flat = 0;
    const int d2 = static_cast<int>(pauli_count(v.q));
    for (int f = 0; f < v.copies; ++f) flat = flat * d2 + labels[f];
    x[flat] += c;
  }
  return x;
}

}  // namespace

AbCoefficients ab_coefficients(const TransferMatrix& lambda,
                               bool via_group_average) {
  const int d = 1 << lambda.q;
  if (d != 2 && d != 4)
    throw std::invalid_argument("ab_coefficients: d must be 2 or 4");
  if (d == 4) {
    // the coefficient bounds require unital noise beyond one qubit
    if (nonunitality(lambda).norm() > 1e-9)
      throw std::invalid_argument("ab_coefficients: d = 4 requires unital noise");
  }
  // Only the unital block enters any a_i / b_i, so u is taken from it
  // directly; this also admits adjoint channels (transposed PTMs) used in
  // the b_i(L) = a_i(L^T) cross-checks.
  const RMatrix lu = unital_block(lambda);
  const double u = (lu.transpose() * lu).trace() / (d * d - 1.0);
  const auto tb = trivial_basis(d);
  AbCoefficients out;
  out.has_adj = tb.has_adj;

  const RMatrix& lm = lambda.m;
  const RMatrix lmT = lm.transpose();

  if (via_group_average) {
    // N |A_0> by explicit exhaustive averaging, then the inner products.
    if (d == 2) {
      GroupAverager g4(4, 1);
      RVector a0v = to_vector(tb.a0, 256);
      RMatrix l2 = kron_r(lm, lm);
      RMatrix l4 = kron_r(l2, l2);
      RVector w = g4.dense() * (l4 * (g4.dense() * a0v));
      LiouvilleVec wv = from_vector(1, 4, w);
      // stride conversion: from_vector at q=1 uses flat stride 4; rebuild keys
      LiouvilleVec wv16{1, 4, {}};
      for (const auto& [k, c] : wv.coeff) {
        int l[4];
        long rem = k;
        for (int f = 3; f >= 0; --f) {
          l[f] = static_cast<int>(rem % 4);
          rem /= 4;
        }
        wv16.coeff[LiouvilleVec::pack({l[0], l[1], l[2], l[3]})] = c;
      }
      out.a0 = dot(tb.a0, wv16) - u * u;
      out.a12 = dot(tb.a12, wv16);
      out.aS = dot(tb.aS, wv16);
    } else {
      GroupAverager g4(4, 2);
      // G4 |A_0> = |A_0>, so N |A_0> = G4 (Lambda^(x4) |A_0>); the tensor
      // channel is applied by factorized accumulation over the sparse A_0.
      RVector w = RVector::Zero(65536);
      int lb[4];
      for (const auto& [kb, vb] : tb.a0.coeff) {
        LiouvilleVec::unpack(kb, 4, lb);
        for (int i0 = 0; i0 < 16; ++i0) {
          const double f0 = lm(i0, lb[0]);
          if (f0 == 0.0) continue;
          for (int i1 = 0; i1 < 16; ++i1) {
            const double f1 = f0 * lm(i1, lb[1]);
            if (f1 == 0.0) continue;
            for (int i2 = 0; i2 < 16; ++i2) {
              const double f2 = f1 * lm(i2, lb[2]);
              if (f2 == 0.0) continue;
              const std::uint32_t base =
                  (static_cast<std::uint32_t>(i0) << 12) |
                  (static_cast<std::uint32_t>(i1) << 8) |
                  (static_cast<std::uint32_t>(i2) << 4);
              for (int i3 = 0; i3 < 16; ++i3) {
                const double f3 = f2 * lm(i3, lb[3]);
                if (f3 != 0.0) w[base | i3] += vb * f3;
              }
            }
          }
        }
      }
      RVector nw = g4.apply(w);
      LiouvilleVec wv{2, 4, {}};
      for (long i = 0; i < nw.size(); ++i)
        if (nw[i] != 0.0) wv.coeff[static_cast<std::uint32_t>(i)] = nw[i];
      out.a0 = dot(tb.a0, wv) - u * u;
      out.a12 = dot(tb.a12, wv);
      out.aS = dot(tb.aS, wv);
      out.a_adj = dot(tb.a_adj, wv);
    }
    // b_i(Lambda) = a_i(Lambda^dag): rerun with the transposed channel.
    TransferMatrix lt{lambda.q, lmT};
    AbCoefficients bs = ab_coefficients(lt, false);
    out.b0 = bs.a0;
    out.b12 = bs.a12;
    out.bS = bs.aS;
    out.b_adj = bs.a_adj;
    return out;
  }

  // Direct route: the A_i are G^(x4)-invariant, so
  // a_i = <A_i | Lambda^(x4) | A_0> - u^2 delta_{i0}.
  out.a0 = sparse_sandwich(tb.a0, lm, tb.a0) - u * u;
  out.a12 = sparse_sandwich(tb.a12, lm, tb.a0);
  out.aS = sparse_sandwich(tb.aS, lm, tb.a0);
  out.b0 = sparse_sandwich(tb.a0, lmT, tb.a0) - u * u;
  out.b12 = sparse_sandwich(tb.a12, lmT, tb.a0);
  out.bS = sparse_sandwich(tb.aS, lmT, tb.a0);
  if (tb.has_adj) {
    out.a_adj = sparse_sandwich(tb.a_adj, lm, tb.a0);
    out.b_adj = sparse_sandwich(tb.a_adj, lmT, tb.a0);
  }
  return out;
}

namespace {

// The q = 1 averaging projectors are fixed; build them once.
const RMatrix& g2_dense_q1() {
  static const GroupAverager g(2, 1);
  return g.dense();
}
const RMatrix& g4_dense_q1() {
  static const GroupAverager g(4, 1);
  return g.dense();
}

}  // namespace

double exact_mean(const TransferMatrix& lambda, const DenseOperator& rho_bar,
                  const DenseOperator& e, int m) {
  if (lambda.q != 1)
    throw std::invalid_argument("exact_mean: q = 1 only");
  if (m < 1) throw std::invalid_argument("exact_mean: m >= 1");
  const RMatrix& g2 = g2_dense_q1();
  RMatrix l2 = kron_r(lambda.m, lambda.m);
  RVector v = pauli_coefficients(rho_bar);
  RVector w = pauli_coefficients(e);
  w[0] = 0.0;  // traceless part of E
  for (int s = 0; s < m; ++s) v = g2 * (l2 * v);
  return w.dot(v);
}

double exact_variance(const TransferMatrix& lambda,
                      const DenseOperator& rho_bar, const DenseOperator& e,
                      int m) {
  if (lambda.q != 1)
    throw std::invalid_argument("exact_variance: q = 1 only");
  if (m < 1) throw std::invalid_argument("exact_variance: m >= 1");
  const RMatrix& g4 = g4_dense_q1();
  RMatrix l2 = kron_r(lambda.m, lambda.m);
  RMatrix l4 = kron_r(l2, l2);
  RVector v2 = pauli_coefficients(rho_bar);
  RVector w2 = pauli_coefficients(e);
  w2[0] = 0.0;
  RVector v4 = kron_r(v2, v2);
  RVector w4 = kron_r(w2, w2);
  for (int s = 0; s < m; ++s) v4 = g4 * (l4 * v4);
  const double mean = exact_mean(lambda, rho_bar, e, m);
  return w4.dot(v4) - mean * mean;
}

double telescoping_residual(const TransferMatrix& lambda, int m) {
  if (lambda.q != 1)
    throw std::invalid_argument("telescoping_residual: q = 1 only");
  RMatrix l2 = kron_r(lambda.m, lambda.m);
  RMatrix l4 = kron_r(l2, l2);
  RMatrix nmat = g4_dense_q1() * l4 * g4_dense_q1();
  RMatrix m16 = g2_dense_q1() * l2 * g2_dense_q1();
  RMatrix mm = kron_r(m16, m16);

  auto mat_pow = [](const RMatrix& a, int p) {
    RMatrix r = RMatrix::Identity(a.rows(), a.cols());
    for (int i = 0; i < p; ++i) r = r * a;
    return r;
  };
  RMatrix lhs = mat_pow(nmat, m) - mat_pow(mm, m);
  RMatrix rhs = RMatrix::Zero(256, 256);
  for (int s = 1; s <= m; ++s)
    rhs += mat_pow(nmat, m - s) * (nmat - mm) * mat_pow(mm, s - 1);
  return (lhs - rhs).norm();
}

bool verify_telescoping(const TransferMatrix& lambda, int m, double tol) {
  return telescoping_residual(lambda, m) < tol;
}

IrrepDims irrep_dims(int d) {
  IrrepDims dims;
  const double n = static_cast<double>(d) * d;
  dims.v12 = n - 2;
  dims.vS = (n - 1) * (n - 2) / 2;
  dims.v_adj = n - 1;
  for (double v : {(d * (d + 1.0) - 2) / 2, (d * (d - 1.0) - 2) / 2})
    if (v > 0) dims.z12.push_back(v);
  for (double v :
       {(n - 1) * d * (d + 2.0) / 8, (n - 1) * d * (d - 2.0) / 8,
        (n - 1) * (d * (d + 2.0) / 8 - 1), (n - 1) * (d * (d - 2.0) / 8 - 1)})
    if (v > 0) dims.zS_not_adj.push_back(v);
  return dims;
}

}  // namespace urb
