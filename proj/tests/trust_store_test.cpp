#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "lirav/error.hpp"
#include "lirav/trust_store.hpp"

using namespace lirav;

namespace {

PeerRecord record(const std::string& id, std::uint8_t seed, int expects = 1) {
  std::mt19937 rng(seed);
  PeerRecord r;
  r.id = id;
  for (auto& b : r.verify_key) b = static_cast<std::uint8_t>(rng());
  for (int i = 0; i < expects; ++i) {
    Measurement m{{}, {0x20000000u + 0x1000u * i, 0x20010000u + 0x1000u * i, 1024u << i}};
    for (auto& b : m.digest) b = static_cast<std::uint8_t>(rng());
    r.expected.push_back(m);
  }
  return r;
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse_trust_store(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError) << e.what();
    return e.line().value_or(0);
  }
  ADD_FAILURE() << "parsed: " << text;
  return 0;
}

const std::string kKey(64, 'a');
const std::string kDigest(64, 'b');

}  // namespace

TEST(TrustStoreFormat, ExactText) {
  PeerRecord r;
  r.id = "dev-b";
  r.verify_key.fill(0xAB);
  Measurement m{{}, {0x20000000, 0x20010000, 1024}};
  m.digest.fill(0x01);
  r.expected.push_back(m);
  const std::string want = "peer dev-b\nkey " + std::string(64, 'a').replace(0, 64, to_hex(r.verify_key)) +
                           "\nexpect 0x20000000 0x20010000 1024 " + to_hex(m.digest) + "\n";
  EXPECT_EQ(format_peer_record(r), want);
}

TEST(TrustStore, SerializeParseRoundTrip) {
  TrustStore s = TrustStore::from_records({record("dev-a", 1), record("dev-b", 2, 3), record("x", 3)});
  TrustStore back = parse_trust_store(serialize_trust_store(s));
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = s.peers()[i];
    const auto& b = back.peers()[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.verify_key, b.verify_key);
    ASSERT_EQ(a.expected.size(), b.expected.size());
    for (std::size_t j = 0; j < a.expected.size(); ++j) EXPECT_TRUE(measurement_equals(a.expected[j], b.expected[j]));
  }
  EXPECT_EQ(serialize_trust_store(back), serialize_trust_store(s));
}

TEST(TrustStore, FileRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "lirav_trust_roundtrip.txt";
  TrustStore s = TrustStore::from_records({record("dev-a", 4), record("dev-b", 5, 2)});
  save_trust_store(path, s);
  EXPECT_EQ(serialize_trust_store(load_trust_store(path)), serialize_trust_store(s));
  std::filesystem::remove(path);
  EXPECT_THROW(load_trust_store(path), Error);
}

TEST(TrustStore, DuplicatePeer) {
  EXPECT_THROW(TrustStore::from_records({record("d", 1), record("d", 2)}), Error);
  const std::string text = format_peer_record(record("d", 1)) + "\n" + format_peer_record(record("d", 2));
  try {
    parse_trust_store(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicatePeer);
  }
}

TEST(TrustStore, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("peer a\nkey " + kKey.substr(0, 63) + "\nexpect 0x0 0x10 4 " + kDigest + "\n"), 2u);
  EXPECT_EQ(parse_error_line("# c\npeer a\nkey " + kKey + "\nexpect 0x0 0x10 4 " + kDigest.substr(2) + "\n"), 4u);
  EXPECT_EQ(parse_error_line("peer a\nkey " + kKey + "\nexpect 0x0 0x10 4\n"), 3u);
  EXPECT_EQ(parse_error_line("peer a\nkey " + kKey + "\nexpect 0x10 0x0 4 " + kDigest + "\n"), 3u);
  EXPECT_EQ(parse_error_line("peer a\nkey " + kKey + "\nbogus\n"), 3u);
  EXPECT_EQ(parse_error_line("key " + kKey + "\n"), 1u);
  EXPECT_EQ(parse_error_line("peer a\nkey " + kKey + "\n"), 1u);
  EXPECT_EQ(parse_error_line("# x\npeer a\n\npeer b\nkey " + kKey + "\n"), 2u);
  EXPECT_EQ(parse_error_line("peer a\nkey zz" + kKey.substr(2) + "\nexpect 0x0 0x10 4 " + kDigest + "\n"), 2u);
}

TEST(TrustStore, CommentsAndBlankLines) {
  const std::string text = "# provisioned 2026\n\npeer a\n# note\nkey " + kKey + "\nexpect 0x0 0x10 4 " + kDigest +
                           "\n\n\npeer b\nkey " + kKey + "\nexpect 0x20 0x40 8 " + kDigest + "\n";
  TrustStore s = parse_trust_store(text);
  ASSERT_EQ(s.size(), 2u);
  ASSERT_NE(s.find("b"), nullptr);
  EXPECT_EQ(s.find("b")->expected[0].config.block_size, 8u);
  EXPECT_EQ(s.find("c"), nullptr);
}

TEST(TrustStore, RecordValidation) {
  EXPECT_THROW(TrustStore::from_records({record("", 1)}), Error);
  EXPECT_THROW(TrustStore::from_records({record(std::string(65, 'x'), 1)}), Error);
  EXPECT_THROW(TrustStore::from_records({record("has space", 1)}), Error);
  EXPECT_THROW(TrustStore::from_records({record("none", 1, 0)}), Error);
  EXPECT_NO_THROW(TrustStore::from_records({record(std::string(64, 'x'), 1)}));
}
