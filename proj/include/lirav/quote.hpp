#pragma once

#include <optional>
#include <span>

#include "lirav/crtm.hpp"
#include "lirav/crypto.hpp"

namespace lirav {

inline constexpr std::size_t kCanonicalQuoteSize = 8 + 8 + 4 + 32;
inline constexpr std::size_t kQuoteWireSize = kCanonicalQuoteSize + kSignatureSize;  // 116

/// The signed byte string:
///   start_addr (u64 BE) || end_addr (u64 BE) || block_size (u32 BE) || digest (32 B)
Bytes canonical_quote_bytes(const Measurement& measurement);

/// A measurement signed by the device quote-signing key.
struct Quote {
  Measurement measurement;
  Signature signature{};

  /// canonical_quote_bytes || signature
  Bytes to_wire() const;
};

/// nullopt if the length is not 116 or the embedded range is not a valid
/// attestation config (32-bit addresses, start < end, block_size >= 1).
std::optional<Quote> parse_quote(ByteView wire) noexcept;

enum class QuoteVerdict { Accept, BadSignature, MeasurementMismatch };

std::string_view to_string(QuoteVerdict v) noexcept;

/// Signature first, then measurement; never throws.
QuoteVerdict verify_quote(const VerifyKey& key, const Quote& quote, const Measurement& expected) noexcept;

/// Accepts when the quote matches any one of the provisioned expectations.
QuoteVerdict verify_quote(const VerifyKey& key, const Quote& quote,
                          std::span<const Measurement> expected) noexcept;

}  // namespace lirav
