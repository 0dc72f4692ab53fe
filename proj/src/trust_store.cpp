#include "lirav/trust_store.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lirav {

namespace {

bool has_space(std::string_view s) {
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) return true;
  }
  return false;
}

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::uint32_t parse_u32(std::string_view text, int base, std::size_t line, const char* what) {
  if (base == 16 && (text.starts_with("0x") || text.starts_with("0X"))) text.remove_prefix(2);
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error::parse_error(line, std::string("invalid ") + what);
  }
  return value;
}

template <std::size_t N>
ByteArray<N> parse_hex_field(std::string_view text, std::size_t line, const char* what) {
  try {
    return from_hex_exact<N>(text);
  } catch (const Error&) {
    throw Error::parse_error(line, std::string("invalid ") + what);
  }
}

std::string hex32(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void validate_record(const PeerRecord& r) {
  if (r.id.empty() || r.id.size() > kMaxDeviceIdLength || has_space(r.id)) {
    throw Error(Errc::InvalidConfig, "peer id must be 1-64 bytes without whitespace");
  }
  if (r.expected.empty()) {
    throw Error(Errc::InvalidConfig, "peer '" + r.id + "' has no expected measurement");
  }
}

}  // namespace

TrustStore TrustStore::from_records(std::vector<PeerRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    validate_record(records[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (records[j].id == records[i].id) {
        throw Error(Errc::DuplicatePeer, "duplicate peer '" + records[i].id + "'");
      }
    }
  }
  return TrustStore(std::move(records));
}

const PeerRecord* TrustStore::find(std::string_view id) const noexcept {
  for (const auto& r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::string format_peer_record(const PeerRecord& record) {
  std::string out = "peer " + record.id + "\n";
  out += "key " + to_hex(record.verify_key) + "\n";
  for (const auto& m : record.expected) {
    out += "expect " + hex32(m.config.start_addr) + " " + hex32(m.config.end_addr) + " " +
           std::to_string(m.config.block_size) + " " + to_hex(m.digest) + "\n";
  }
  return out;
}

std::string serialize_trust_store(const TrustStore& store) {
  std::string out;
  for (std::size_t i = 0; i < store.peers().size(); ++i) {
    if (i > 0) out += "\n";
    out += format_peer_record(store.peers()[i]);
  }
  return out;
}

TrustStore parse_trust_store(std::string_view text) {
  std::vector<PeerRecord> records;
  std::vector<std::size_t> record_lines;
  bool in_record = false;
  bool have_key = false;
  std::size_t line_no = 0;

  auto close_record = [&]() {
    if (!in_record) return;
    if (!have_key) throw Error::parse_error(record_lines.back(), "record without key line");
    if (records.back().expected.empty()) throw Error::parse_error(record_lines.back(), "record without expect line");
    in_record = false;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::string_view body = trim(line);
    if (body.starts_with('#')) continue;
    if (body.empty()) {
      close_record();
      if (eol == text.size()) break;
      continue;
    }

    auto words = split_words(body);
    if (words[0] == "peer") {
      if (in_record) throw Error::parse_error(line_no, "missing blank line before peer");
      if (words.size() != 2) throw Error::parse_error(line_no, "expected 'peer <id>'");
      std::string id(words[1]);
      if (id.size() > kMaxDeviceIdLength) throw Error::parse_error(line_no, "peer id longer than 64 bytes");
      for (const auto& r : records) {
        if (r.id == id) {
          throw Error(Errc::DuplicatePeer,
                      "line " + std::to_string(line_no) + ": duplicate peer '" + id + "'");
        }
      }
      records.push_back(PeerRecord{std::move(id), {}, {}});
      record_lines.push_back(line_no);
      in_record = true;
      have_key = false;
    } else if (words[0] == "key") {
      if (!in_record) throw Error::parse_error(line_no, "key outside a peer record");
      if (have_key) throw Error::parse_error(line_no, "second key line in record");
      if (words.size() != 2) throw Error::parse_error(line_no, "expected 'key <64 hex>'");
      records.back().verify_key = parse_hex_field<32>(words[1], line_no, "verification key");
      have_key = true;
    } else if (words[0] == "expect") {
      if (!in_record || !have_key) throw Error::parse_error(line_no, "expect before key");
      if (words.size() != 5) {
        throw Error::parse_error(line_no, "expected 'expect <start> <end> <block> <64 hex>'");
      }
      Measurement m;
      m.config.start_addr = parse_u32(words[1], 16, line_no, "start address");
      m.config.end_addr = parse_u32(words[2], 16, line_no, "end address");
      m.config.block_size = parse_u32(words[3], 10, line_no, "block size");
      m.digest = parse_hex_field<32>(words[4], line_no, "digest");
      try {
        m.config.validate();
      } catch (const Error& e) {
        throw Error::parse_error(line_no, e.what());
      }
      records.back().expected.push_back(m);
    } else {
      throw Error::parse_error(line_no, "unknown directive '" + std::string(words[0]) + "'");
    }
    if (eol == text.size()) break;
  }
  close_record();
  return TrustStore::from_records(std::move(records));
}

void save_trust_store(const std::filesystem::path& path, const TrustStore& store) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << serialize_trust_store(store);
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

TrustStore load_trust_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trust_store(buf.str());
}

}  // namespace lirav
