#include "lirav/quote.hpp"

#include <algorithm>
#include <limits>

namespace lirav {

Bytes canonical_quote_bytes(const Measurement& m) {
  Bytes out;
  out.reserve(kCanonicalQuoteSize);
  append_be64(out, m.config.start_addr);
  append_be64(out, m.config.end_addr);
  append_be32(out, m.config.block_size);
  append(out, m.digest);
  return out;
}

Bytes Quote::to_wire() const {
  Bytes out = canonical_quote_bytes(measurement);
  append(out, signature);
  return out;
}

std::optional<Quote> parse_quote(ByteView wire) noexcept {
  if (wire.size() != kQuoteWireSize) return std::nullopt;
  const std::uint64_t start = load_be64(wire.subspan(0, 8));
  const std::uint64_t end = load_be64(wire.subspan(8, 8));
  const std::uint32_t block = load_be32(wire.subspan(16, 4));
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (start > kMax || end > kMax || start >= end || block == 0) return std::nullopt;

  Quote q;
  q.measurement.config = AttestationConfig{static_cast<std::uint32_t>(start),
                                           static_cast<std::uint32_t>(end), block};
  std::copy_n(wire.begin() + 20, 32, q.measurement.digest.begin());
  std::copy_n(wire.begin() + kCanonicalQuoteSize, kSignatureSize, q.signature.begin());
  return q;
}

std::string_view to_string(QuoteVerdict v) noexcept {
  switch (v) {
    case QuoteVerdict::Accept: return "Accept";
    case QuoteVerdict::BadSignature: return "BadSignature";
    case QuoteVerdict::MeasurementMismatch: return "MeasurementMismatch";
  }
  return "?";
}

QuoteVerdict verify_quote(const VerifyKey& key, const Quote& quote, const Measurement& expected) noexcept {
  return verify_quote(key, quote, std::span<const Measurement>(&expected, 1));
}

QuoteVerdict verify_quote(const VerifyKey& key, const Quote& quote,
                          std::span<const Measurement> expected) noexcept {
  try {
    if (!ed25519_verify(key, canonical_quote_bytes(quote.measurement), quote.signature)) {
      return QuoteVerdict::BadSignature;
    }
  } catch (...) {
    return QuoteVerdict::BadSignature;
  }
  bool matched = false;
  for (const auto& e : expected) matched |= measurement_equals(quote.measurement, e);
  return matched ? QuoteVerdict::Accept : QuoteVerdict::MeasurementMismatch;
}

}  // namespace lirav
