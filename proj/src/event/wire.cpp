#include "qpdes/event/wire.hpp"

#include <bit>
#include <cstring>

namespace qpdes::wire {

namespace {

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

void put_f64(std::string& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

void put_str16(std::string& out, std::string_view s) {
  if (s.size() > 0xFFFF) fail(ErrorCode::kTransportFailure, "string too long for wire field");
  put(out, static_cast<std::uint16_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u = static_cast<U>(u | static_cast<U>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) fail(ErrorCode::kTransportFailure, "truncated event record");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

void encode(const Event& e, std::string& out) {
  const std::size_t len_at = out.size();
  put(out, std::uint32_t{0});
  put(out, kEventFormatVersion);
  put(out, e.key.time.ticks());
  put(out, e.key.source);
  put(out, e.key.seq);
  put(out, e.target);
  put(out, e.dest_worker);
  put_str16(out, e.handler);
  put(out, static_cast<std::uint16_t>(e.payload.fields().size()));
  for (const auto& [name, value] : e.payload.fields()) {
    put_str16(out, name);
    put(out, static_cast<std::uint8_t>(value.index()));
    std::visit(
        [&out](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::int64_t>) {
            put(out, v);
          } else if constexpr (std::is_same_v<T, double>) {
            put_f64(out, v);
          } else if constexpr (std::is_same_v<T, std::string>) {
            put(out, static_cast<std::uint32_t>(v.size()));
            out.append(v);
          } else if constexpr (std::is_same_v<T, QubitKey>) {
            put(out, v.hi);
            put(out, v.lo);
          } else {
            put(out, static_cast<std::uint32_t>(v.size()));
            for (const auto& c : v) {
              put_f64(out, c.real());
              put_f64(out, c.imag());
            }
          }
        },
        value);
  }
  const auto body = static_cast<std::uint32_t>(out.size() - len_at - 4);
  for (int i = 0; i < 4; ++i) out[len_at + i] = static_cast<char>((body >> (8 * i)) & 0xFF);
}

std::string encode(const Event& e) {
  std::string out;
  encode(e, out);
  return out;
}

Event decode(std::string_view& in) {
  Reader head(in);
  const auto body_len = head.get<std::uint32_t>();
  if (in.size() < 4 + static_cast<std::size_t>(body_len)) {
    fail(ErrorCode::kTransportFailure, "truncated event record");
  }
  Reader r(in.substr(4, body_len));
  const auto version = r.get<std::uint8_t>();
  if (version != kEventFormatVersion) {
    fail(ErrorCode::kTransportFailure, "unsupported event format version " + std::to_string(version));
  }
  Event e;
  e.key.time = SimTime(r.get<std::int64_t>());
  e.key.source = r.get<std::uint32_t>();
  e.key.seq = r.get<std::uint64_t>();
  e.target = r.get<std::uint32_t>();
  e.dest_worker = r.get<std::uint32_t>();
  e.handler = r.str(r.get<std::uint16_t>());
  const auto nfields = r.get<std::uint16_t>();
  for (std::uint16_t i = 0; i < nfields; ++i) {
    std::string name = r.str(r.get<std::uint16_t>());
    const auto tag = r.get<std::uint8_t>();
    switch (tag) {
      case 0: e.payload.set(std::move(name), r.get<std::int64_t>()); break;
      case 1: e.payload.set(std::move(name), r.f64()); break;
      case 2: e.payload.set(std::move(name), r.str(r.get<std::uint32_t>())); break;
      case 3: {
        QubitKey k;
        k.hi = r.get<std::uint64_t>();
        k.lo = r.get<std::uint64_t>();
        e.payload.set(std::move(name), k);
        break;
      }
      case 4: {
        const auto n = r.get<std::uint32_t>();
        Amplitudes amps;
        amps.reserve(n);
        for (std::uint32_t j = 0; j < n; ++j) {
          const double re = r.f64();
          const double im = r.f64();
          amps.emplace_back(re, im);
        }
        e.payload.set(std::move(name), std::move(amps));
        break;
      }
      default: fail(ErrorCode::kTransportFailure, "unknown payload tag " + std::to_string(tag));
    }
  }
  if (!r.done()) fail(ErrorCode::kTransportFailure, "trailing bytes in event record");
  in.remove_prefix(4 + body_len);
  return e;
}

std::vector<Event> decode_all(std::string_view in) {
  std::vector<Event> out;
  while (!in.empty()) out.push_back(decode(in));
  return out;
}

}  // namespace qpdes::wire
