#include "qpdes/event/event.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

namespace qpdes {

Payload& Payload::set(std::string name, Value v) {
  auto it = std::lower_bound(fields_.begin(), fields_.end(), name,
                             [](const auto& f, const std::string& n) { return f.first < n; });
  if (it != fields_.end() && it->first == name) {
    it->second = std::move(v);
  } else {
    fields_.emplace(it, std::move(name), std::move(v));
  }
  return *this;
}

const Value* Payload::find(std::string_view name) const {
  auto it = std::lower_bound(fields_.begin(), fields_.end(), name,
                             [](const auto& f, std::string_view n) { return std::string_view(f.first) < n; });
  if (it == fields_.end() || it->first != name) return nullptr;
  return &it->second;
}

std::string describe(const Event& e) {
  std::ostringstream os;
  os << "event{t=" << e.key.time.str() << " src=" << e.key.source << " seq=" << e.key.seq
     << " target=" << e.target << " handler=" << e.handler << " worker=" << e.dest_worker << "}";
  return os.str();
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
};

}  // namespace

std::uint64_t digest(const Event& e) {
  Fnv f;
  f.u64(static_cast<std::uint64_t>(e.key.time.ticks()));
  f.u64(e.key.source);
  f.u64(e.key.seq);
  f.u64(e.target);
  f.str(e.handler);
  for (const auto& [name, value] : e.payload.fields()) {
    if (std::holds_alternative<Amplitudes>(value) || name.starts_with('_')) continue;
    f.str(name);
    f.u64(value.index());
    std::visit(
        [&f](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::int64_t>) {
            f.u64(static_cast<std::uint64_t>(v));
          } else if constexpr (std::is_same_v<T, double>) {
            f.u64(std::bit_cast<std::uint64_t>(v));
          } else if constexpr (std::is_same_v<T, std::string>) {
            f.str(v);
          } else if constexpr (std::is_same_v<T, QubitKey>) {
            f.u64(v.hi);
            f.u64(v.lo);
          }
        },
        value);
  }
  return f.h;
}

}  // namespace qpdes
