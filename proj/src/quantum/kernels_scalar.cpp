#include "qpdes/quantum/kernels.hpp"

namespace qpdes::kernels::scalar {

// Products are spelled out instead of using std::complex operator*, which may
// take a different path for non-finite inputs.

void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = cplx(0.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double xr = x[j].real();
    const double xi = x[j].imag();
    const cplx* col = u + j * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double ur = col[i].real();
      const double ui = col[i].imag();
      const double pr = ur * xr - ui * xi;
      const double pi = ui * xr + ur * xi;
      y[i] = cplx(y[i].real() + pr, y[i].imag() + pi);
    }
  }
}

void cscale(cplx a, const cplx* b, cplx* out, std::size_t n) {
  const double ar = a.real();
  const double ai = a.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double br = b[i].real();
    const double bi = b[i].imag();
    out[i] = cplx(br * ar - bi * ai, bi * ar + br * ai);
  }
}

}  // namespace qpdes::kernels::scalar
