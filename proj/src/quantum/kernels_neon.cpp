#include "qpdes/quantum/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace qpdes::kernels::neon {

bool compiled() { return true; }

// One float64x2_t holds one complex [re, im]. The products use separate
// multiply and add/sub so no fused operation changes the rounding.

namespace {

inline float64x2_t cmul(float64x2_t v, double xr, double xi) {
  const float64x2_t p1 = vmulq_n_f64(v, xr);                  // [vr*xr, vi*xr]
  const float64x2_t p2 = vmulq_n_f64(vextq_f64(v, v, 1), xi);  // [vi*xi, vr*xi]
  const double re = vgetq_lane_f64(p1, 0) - vgetq_lane_f64(p2, 0);
  const double im = vgetq_lane_f64(p1, 1) + vgetq_lane_f64(p2, 1);
  return vsetq_lane_f64(im, vdupq_n_f64(re), 1);
}

}  // namespace

void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n) {
  auto* yd = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < n; ++i) vst1q_f64(yd + 2 * i, vdupq_n_f64(0.0));
  for (std::size_t j = 0; j < n; ++j) {
    const double xr = x[j].real();
    const double xi = x[j].imag();
    const auto* col = reinterpret_cast<const double*>(u + j * n);
    for (std::size_t i = 0; i < n; ++i) {
      const float64x2_t prod = cmul(vld1q_f64(col + 2 * i), xr, xi);
      vst1q_f64(yd + 2 * i, vaddq_f64(vld1q_f64(yd + 2 * i), prod));
    }
  }
}

void cscale(cplx a, const cplx* b, cplx* out, std::size_t n) {
  const auto* bd = reinterpret_cast<const double*>(b);
  auto* od = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < n; ++i) vst1q_f64(od + 2 * i, cmul(vld1q_f64(bd + 2 * i), a.real(), a.imag()));
}

}  // namespace qpdes::kernels::neon

#else

namespace qpdes::kernels::neon {
bool compiled() { return false; }
void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n) { scalar::cmatvec(u, x, y, n); }
void cscale(cplx a, const cplx* b, cplx* out, std::size_t n) { scalar::cscale(a, b, out, n); }
}  // namespace qpdes::kernels::neon

#endif
