#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lirav/crtm.hpp"
#include "lirav/crypto.hpp"

namespace lirav {

inline constexpr std::size_t kMaxDeviceIdLength = 64;

struct PeerRecord {
  std::string id;
  VerifyKey verify_key{};
  std::vector<Measurement> expected;
};

/// Verification keys and expected measurements for every peer a device is
/// willing to attest with. Immutable once built: there are no mutators.
class TrustStore {
 public:
  TrustStore() = default;

  /// Throws DuplicatePeer, or InvalidConfig for an empty/oversized id, an id
  /// containing whitespace, or a record without expectations.
  static TrustStore from_records(std::vector<PeerRecord> records);

  const PeerRecord* find(std::string_view id) const noexcept;
  const std::vector<PeerRecord>& peers() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

 private:
  explicit TrustStore(std::vector<PeerRecord> records) : records_(std::move(records)) {}
  std::vector<PeerRecord> records_;
};

/// One record in file form:
///   peer <id>
///   key <64 hex>
///   expect <start-hex> <end-hex> <block-decimal> <64 hex>   (one or more)
std::string format_peer_record(const PeerRecord& record);

/// Records joined by a blank line.
std::string serialize_trust_store(const TrustStore& store);

/// Throws ParseError carrying the 1-based line, or DuplicatePeer.
TrustStore parse_trust_store(std::string_view text);

void save_trust_store(const std::filesystem::path& path, const TrustStore& store);
TrustStore load_trust_store(const std::filesystem::path& path);

}  // namespace lirav
