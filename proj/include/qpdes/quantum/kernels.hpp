#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

// Dense complex kernels behind the ket math. Every variant performs the same
// IEEE operations in the same order as the scalar reference, so results are
// bit-identical regardless of which variant the dispatcher picks. The build
// compiles these sources with -ffp-contract=off to keep it that way.

namespace qpdes::kernels {

using cplx = std::complex<double>;

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);
bool available(Isa isa);

/// Variant in use. Picked once from CPU features; QPDES_SIMD=scalar|avx2|neon
/// overrides when that variant is available.
Isa active();
/// Test hook; throws if `isa` is unavailable on this host.
void force(Isa isa);

/// y[i] = sum_j u[j*n + i] * x[j], with j accumulated in ascending order.
/// `u` is column-major n x n. `y` must not alias `x`.
void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n);

/// out[i] = a * b[i]
void cscale(cplx a, const cplx* b, cplx* out, std::size_t n);

namespace scalar {
void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n);
void cscale(cplx a, const cplx* b, cplx* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool compiled();
void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n);
void cscale(cplx a, const cplx* b, cplx* out, std::size_t n);
}  // namespace avx2

namespace neon {
bool compiled();
void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n);
void cscale(cplx a, const cplx* b, cplx* out, std::size_t n);
}  // namespace neon

}  // namespace qpdes::kernels
