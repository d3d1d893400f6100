#include "qpdes/quantum/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)
#include <immintrin.h>

namespace qpdes::kernels::avx2 {

bool compiled() { return true; }

// One __m256d holds two complex doubles [re0, im0, re1, im1].
// p1 = v * xr, p2 = swap(v) * xi, addsub(p1, p2) = [vr*xr - vi*xi, vi*xr + vr*xi],
// which matches the scalar reference operation for operation.

void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n) {
  auto* yd = reinterpret_cast<double*>(y);
  const std::size_t even = n & ~std::size_t{1};
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t i = 0; i < even; i += 2) _mm256_storeu_pd(yd + 2 * i, zero);
  if (even < n) y[even] = cplx(0.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const __m256d xr = _mm256_set1_pd(x[j].real());
    const __m256d xi = _mm256_set1_pd(x[j].imag());
    const auto* col = reinterpret_cast<const double*>(u + j * n);
    for (std::size_t i = 0; i < even; i += 2) {
      const __m256d v = _mm256_loadu_pd(col + 2 * i);
      const __m256d p1 = _mm256_mul_pd(v, xr);
      const __m256d p2 = _mm256_mul_pd(_mm256_permute_pd(v, 0b0101), xi);
      const __m256d prod = _mm256_addsub_pd(p1, p2);
      const __m256d acc = _mm256_loadu_pd(yd + 2 * i);
      _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(acc, prod));
    }
    if (even < n) {
      const double ur = col[2 * even];
      const double ui = col[2 * even + 1];
      const double xrs = x[j].real();
      const double xis = x[j].imag();
      y[even] = cplx(y[even].real() + (ur * xrs - ui * xis), y[even].imag() + (ui * xrs + ur * xis));
    }
  }
}

void cscale(cplx a, const cplx* b, cplx* out, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  const auto* bd = reinterpret_cast<const double*>(b);
  auto* od = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(bd + 2 * i);
    const __m256d p1 = _mm256_mul_pd(v, ar);
    const __m256d p2 = _mm256_mul_pd(_mm256_permute_pd(v, 0b0101), ai);
    _mm256_storeu_pd(od + 2 * i, _mm256_addsub_pd(p1, p2));
  }
  if (i < n) scalar::cscale(a, b + i, out + i, n - i);
}

}  // namespace qpdes::kernels::avx2

#else

namespace qpdes::kernels::avx2 {
bool compiled() { return false; }
void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n) { scalar::cmatvec(u, x, y, n); }
void cscale(cplx a, const cplx* b, cplx* out, std::size_t n) { scalar::cscale(a, b, out, n); }
}  // namespace qpdes::kernels::avx2

#endif
