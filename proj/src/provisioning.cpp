#include "lirav/provisioning.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lirav/rom.hpp"
#include "lirav/sha3.hpp"

namespace lirav {

namespace {

constexpr std::string_view kQskLabel = "LIRA-V/1/QSK";

std::string hex32(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
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

std::uint32_t parse_number(std::string_view text, int base, std::size_t line) {
  if (base == 16 && (text.starts_with("0x") || text.starts_with("0X"))) text.remove_prefix(2);
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error::parse_error(line, "invalid number '" + std::string(text) + "'");
  }
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

QuoteSigningKey gen_identity(ByteView entropy) {
  if (entropy.size() < 32) throw Error(Errc::InsufficientEntropy, "need at least 32 bytes of entropy");
  QuoteSigningKey key;
  key.secret = SigningSeed(sha3_256({view(std::string(kQskLabel)), entropy}));
  key.public_key = ed25519_public_from_seed(key.secret);
  return key;
}

QuoteSigningKey gen_identity(RandomSource& rng) {
  Secret<32> entropy;
  rng.fill(entropy.mutable_bytes());
  return gen_identity(entropy.bytes());
}

Measurement compute_expected(ByteView firmware, std::uint32_t load_base, const AttestationConfig& config) {
  config.validate();
  if (config.start_addr < load_base || std::uint64_t{config.end_addr} > std::uint64_t{load_base} + firmware.size()) {
    throw Error(Errc::InvalidRange, "firmware image does not cover the attested range");
  }
  return Measurement{chained_digest(firmware.subspan(config.start_addr - load_base, config.length()),
                                    config.block_size),
                     config};
}

std::string serialize_profile(const DeviceProfile& p) {
  auto region = [](const char* name, const RegionSpec& r) {
    return std::string(name) + " " + hex32(r.base) + " " + std::to_string(r.size) + "\n";
  };
  std::string out = "# lirav device profile; contains the quote-signing key\n";
  out += "device " + p.id + "\n";
  out += "qsk " + to_hex(p.qsk.bytes()) + "\n";
  out += region("rom", p.layout.rom);
  out += region("flash", p.layout.flash);
  out += region("sram", p.layout.sram);
  out += region("key-region", p.layout.key_region);
  out += "attest " + hex32(p.attestation.start_addr) + " " + hex32(p.attestation.end_addr) + " " +
         std::to_string(p.attestation.block_size) + "\n";
  out += "firmware " + p.firmware.string() + "\n";
  return out;
}

DeviceProfile parse_profile(std::string_view text) {
  DeviceProfile p;
  bool have_id = false;
  bool have_qsk = false;
  bool have_attest = false;
  bool have_firmware = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto words = split_words(line);
    if (words.empty() || words[0].starts_with('#')) continue;
    const auto key = words[0];
    auto need = [&](std::size_t n) {
      if (words.size() != n) throw Error::parse_error(line_no, "wrong field count for '" + std::string(key) + "'");
    };
    if (key == "device") {
      need(2);
      p.id = std::string(words[1]);
      have_id = true;
    } else if (key == "qsk") {
      need(2);
      try {
        p.qsk = SigningSeed(from_hex_exact<32>(words[1]));
      } catch (const Error&) {
        throw Error::parse_error(line_no, "invalid qsk");
      }
      have_qsk = true;
    } else if (key == "rom" || key == "flash" || key == "sram" || key == "key-region") {
      need(3);
      RegionSpec r{parse_number(words[1], 16, line_no), parse_number(words[2], 10, line_no)};
      if (key == "rom") p.layout.rom = r;
      else if (key == "flash") p.layout.flash = r;
      else if (key == "sram") p.layout.sram = r;
      else p.layout.key_region = r;
    } else if (key == "attest") {
      need(4);
      p.attestation = AttestationConfig{parse_number(words[1], 16, line_no), parse_number(words[2], 16, line_no),
                                        parse_number(words[3], 10, line_no)};
      have_attest = true;
    } else if (key == "firmware") {
      // Paths may contain spaces; take the remainder of the line.
      auto pos = line.find("firmware") + 8;
      std::string_view rest(line);
      rest.remove_prefix(pos);
      while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
      while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);
      p.firmware = std::string(rest);
      have_firmware = true;
    } else {
      throw Error::parse_error(line_no, "unknown directive '" + std::string(key) + "'");
    }
  }
  if (!have_id || !have_qsk || !have_attest || !have_firmware) {
    throw Error::parse_error(line_no, "profile needs device, qsk, attest and firmware lines");
  }
  p.layout.validate();
  p.attestation.validate();
  return p;
}

void save_profile(const std::filesystem::path& path, const DeviceProfile& profile) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << serialize_profile(profile);
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

DeviceProfile load_profile(const std::filesystem::path& path) {
  DeviceProfile p = parse_profile(read_file(path));
  if (p.firmware.is_relative()) p.firmware = path.parent_path() / p.firmware;
  return p;
}

Bytes load_firmware(const std::filesystem::path& path) {
  std::string raw = read_file(path);
  return Bytes(raw.begin(), raw.end());
}

PeerRecord peer_record(const DeviceProfile& profile, ByteView firmware) {
  // The device maps firmware at the flash base and zero-fills the rest,
  // so the verifier measures the same zero-extended image.
  const MemoryLayout& lay = profile.layout;
  const AttestationConfig& cfg = profile.attestation;
  Measurement expected;
  if (cfg.start_addr >= lay.flash.base && std::uint64_t{cfg.end_addr} <= lay.flash.end()) {
    Bytes image(firmware.begin(), firmware.end());
    if (std::uint64_t{cfg.end_addr} > lay.flash.base + image.size()) image.resize(cfg.end_addr - lay.flash.base, 0);
    expected = compute_expected(image, lay.flash.base, cfg);
  } else {
    TrustStore empty;
    auto dev = make_device(profile, firmware, empty);
    expected = rom::measure_device(*dev);
  }
  return PeerRecord{profile.id, ed25519_public_from_seed(profile.qsk), {expected}};
}

std::unique_ptr<Device> make_device(const DeviceProfile& profile, ByteView firmware, const TrustStore& trust,
                                    BootOptions boot, std::unique_ptr<RandomSource> rng) {
  return std::make_unique<Device>(DeviceSpec{profile.id, profile.layout, profile.attestation}, profile.qsk,
                                  firmware, trust, boot, std::move(rng));
}

}  // namespace lirav
