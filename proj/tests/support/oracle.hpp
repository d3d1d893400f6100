#pragma once

// Independent dense linear algebra used as a reference in tests. Nothing here
// calls into the library's quantum code.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Vec = std::vector<cplx>;

/// Row-major dense matrix.
struct Mat {
  std::size_t n = 0;
  std::vector<cplx> a;

  explicit Mat(std::size_t dim = 0) : n(dim), a(dim * dim) {}
  cplx& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
  cplx operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }

  static Mat identity(std::size_t dim) {
    Mat m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Mat mul(const Mat& x, const Mat& y) {
  Mat out(x.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < x.n; ++k)
      for (std::size_t j = 0; j < x.n; ++j) out(i, j) += x(i, k) * y(k, j);
  return out;
}

inline Mat kron(const Mat& x, const Mat& y) {
  Mat out(x.n * y.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.n; ++j)
      for (std::size_t k = 0; k < y.n; ++k)
        for (std::size_t l = 0; l < y.n; ++l) out(i * y.n + k, j * y.n + l) = x(i, j) * y(k, l);
  return out;
}

inline Vec kron(const Vec& x, const Vec& y) {
  Vec out;
  for (const cplx& a : x)
    for (const cplx& b : y) out.push_back(a * b);
  return out;
}

inline Vec apply(const Mat& m, const Vec& v) {
  Vec out(m.n);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j) out[i] += m(i, j) * v[j];
  return out;
}

inline Mat gate2(cplx a, cplx b, cplx c, cplx d) {
  Mat m(2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

inline Mat I() { return Mat::identity(2); }
inline Mat X() { return gate2(0, 1, 1, 0); }
inline Mat Y() { return gate2(0, cplx(0, -1), cplx(0, 1), 0); }
inline Mat Z() { return gate2(1, 0, 0, -1); }
inline Mat H() {
  const double r = 1.0 / std::sqrt(2.0);
  return gate2(r, r, r, -r);
}
inline Mat S() { return gate2(1, 0, 0, cplx(0, 1)); }
inline Mat T() { return gate2(1, 0, 0, std::polar(1.0, M_PI / 4)); }
inline Mat P0() { return gate2(1, 0, 0, 0); }
inline Mat P1() { return gate2(0, 0, 0, 1); }

/// Full-width operator with `g` on `wire` (wire 0 leftmost in the product).
inline Mat lift(const Mat& g, std::size_t wire, std::size_t width) {
  Mat out = Mat::identity(1);
  for (std::size_t w = 0; w < width; ++w) out = kron(out, w == wire ? g : I());
  return out;
}

/// |0><0|_c (x) I + |1><1|_c (x) X_t, built from projector products.
inline Mat cnot(std::size_t c, std::size_t t, std::size_t width) {
  Mat a = Mat::identity(1), b = Mat::identity(1);
  for (std::size_t w = 0; w < width; ++w) {
    a = kron(a, w == c ? P0() : I());
    b = kron(b, w == c ? P1() : (w == t ? X() : I()));
  }
  Mat out(a.n);
  for (std::size_t i = 0; i < a.a.size(); ++i) out.a[i] = a.a[i] + b.a[i];
  return out;
}

inline Mat swap(std::size_t x, std::size_t y, std::size_t width) {
  return mul(cnot(x, y, width), mul(cnot(y, x, width), cnot(x, y, width)));
}

inline Vec random_state(std::mt19937_64& gen, std::size_t width) {
  std::normal_distribution<double> nd;
  Vec v(std::size_t{1} << width);
  double s = 0;
  for (auto& a : v) {
    a = cplx(nd(gen), nd(gen));
    s += std::norm(a);
  }
  for (auto& a : v) a /= std::sqrt(s);
  return v;
}

/// Projects wires onto `bits` and renormalizes; returns the probability.
inline double project(Vec& v, std::size_t width, const std::vector<std::size_t>& wires, const std::vector<int>& bits) {
  double p = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool keep = true;
    for (std::size_t k = 0; k < wires.size(); ++k) {
      keep = keep && static_cast<int>((i >> (width - 1 - wires[k])) & 1U) == bits[k];
    }
    if (keep) {
      p += std::norm(v[i]);
    } else {
      v[i] = 0;
    }
  }
  for (auto& a : v) a /= std::sqrt(p);
  return p;
}

/// Squared overlap of two vectors.
inline double overlap(const Vec& x, const Vec& y) {
  cplx s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return std::norm(s);
}

}  // namespace oracle
