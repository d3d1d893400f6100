#include <atomic>
#include <cstdlib>
#include <string>

#include "qpdes/core/error.hpp"
#include "qpdes/quantum/kernels.hpp"

namespace qpdes::kernels {

namespace {

Isa detect() {
  const char* env = std::getenv("QPDES_SIMD");
  if (env != nullptr) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && available(Isa::kAvx2)) return Isa::kAvx2;
    if (want == "neon" && available(Isa::kNeon)) return Isa::kNeon;
  }
  if (available(Isa::kAvx2)) return Isa::kAvx2;
  if (available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if defined(__x86_64__)
      return avx2::compiled() && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon: return neon::compiled();
  }
  return false;
}

Isa active() { return current().load(std::memory_order_relaxed); }

void force(Isa isa) {
  if (!available(isa)) fail(ErrorCode::kPrecondition, "kernel variant unavailable: " + std::string(to_string(isa)));
  current().store(isa, std::memory_order_relaxed);
}

void cmatvec(const cplx* u, const cplx* x, cplx* y, std::size_t n) {
  switch (active()) {
    case Isa::kAvx2: avx2::cmatvec(u, x, y, n); return;
    case Isa::kNeon: neon::cmatvec(u, x, y, n); return;
    case Isa::kScalar: break;
  }
  scalar::cmatvec(u, x, y, n);
}

void cscale(cplx a, const cplx* b, cplx* out, std::size_t n) {
  switch (active()) {
    case Isa::kAvx2: avx2::cscale(a, b, out, n); return;
    case Isa::kNeon: neon::cscale(a, b, out, n); return;
    case Isa::kScalar: break;
  }
  scalar::cscale(a, b, out, n);
}

}  // namespace qpdes::kernels
