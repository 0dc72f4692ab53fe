// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include "lirav/attack.hpp"
#include "lirav/bench.hpp"
#include "lirav/log.hpp"
#include "lirav/pmp.hpp"
#include "lirav/testbed.hpp"
#include "oracle.hpp"

using namespace lirav;
using namespace std::chrono_literals;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      note = what;
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Shell {
  int status = -1;
  std::string text;
};

Shell shell(const std::string& cmd) {
  Shell out;
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.text.append(buf, n);
  const int raw = pclose(p);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

// Everything the CLI printed during the run, for the secrecy check.
std::string g_cli_output;
std::vector<Bytes> g_cli_secrets;

void write_file(const fs::path& p, const Bytes& data) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

// Provisions two devices with `size`-byte images, serves one session and
// attests against it. Returns {client, server} output.
std::pair<Shell, Shell> cli_session(const fs::path& dir, std::size_t size) {
  const std::string cli = LIRAV_CLI;
  fs::create_directories(dir);
  for (int i = 0; i < 2; ++i) {
    Bytes img(size);
    DeterministicRandom(ByteArray<32>{static_cast<std::uint8_t>(i + 1)}).fill(img);
    write_file(dir / (i == 0 ? "a.bin" : "b.bin"), img);
  }
  auto prov = [&](const std::string& id, const std::string& tag) {
    Shell s = shell(cli + " provision --id " + id + " --image " + (dir / (tag + ".bin")).string() + " --profile " +
                    (dir / (tag + ".prof")).string());
    g_cli_output += s.text;
    return s.text;
  };
  const std::string rec_a = prov("device-a", "a");
  const std::string rec_b = prov("device-b", "b");
  std::ofstream(dir / "a.trust") << rec_b;
  std::ofstream(dir / "b.trust") << rec_a;
  for (const char* p : {"a.prof", "b.prof"}) {
    const auto seed = load_profile(dir / p).qsk;
    g_cli_secrets.emplace_back(seed.bytes().begin(), seed.bytes().end());
  }

  FILE* server = popen((cli + " -v serve --addr 127.0.0.1:0 --timeout 5 --profile " + (dir / "b.prof").string() +
                        " --trust " + (dir / "b.trust").string() + " 2>&1")
                           .c_str(),
                       "r");
  Shell srv;
  char line[256];
  std::string addr;
  if (server && fgets(line, sizeof line, server)) {
    srv.text = line;
    std::string l(line);
    if (l.starts_with("listening ")) addr = l.substr(10, l.find('\n') - 10);
  }
  Shell client = shell(cli + " -v attest --timeout 5 --peer device-b --addr " + addr + " --profile " +
                       (dir / "a.prof").string() + " --trust " + (dir / "a.trust").string());
  if (server) {
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, server)) > 0) srv.text.append(buf, n);
    const int raw = pclose(server);
    srv.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }
  g_cli_output += srv.text + client.text;
  return {client, srv};
}

std::string fingerprint_in(const std::string& s) {
  auto at = s.find("key-fp=");
  return at == std::string::npos ? std::string() : s.substr(at + 7, 8);
}

Outcome honest_run() {
  Outcome o;
  // Library agents over a loopback socket, where both keys can be compared.
  TestbedOptions opts;
  opts.seed.fill(0x01);
  opts.attested_bytes = 256 * 1024;
  opts.deterministic = false;
  Testbed tb = Testbed::create(opts);
  const auto t0 = Clock::now();
  TcpListener listener("127.0.0.1", 0);
  SessionResult rb;
  std::thread t([&] {
    try {
      rb = run_responder(*tb.b, *listener.accept(5s));
    } catch (const Error& e) {
      rb.detail = e.what();
    }
  });
  auto ep = tcp_connect("127.0.0.1", listener.port(), 5s);
  SessionResult ra = run_initiator(*tb.a, *ep, "device-b");
  t.join();
  const double lib_s = seconds_since(t0);
  o.require(ra.established() && rb.established(), "library session not established: " + ra.detail + rb.detail);
  o.require(ra.key && rb.key && *ra.key == *rb.key, "session keys differ");
  o.require(lib_s < 5.0, "library session took " + fixed(lib_s) + " s");

  // The same through the command-line tool.
  const fs::path dir = fs::temp_directory_path() / "lirav_acceptance_cli";
  fs::remove_all(dir);
  const auto t1 = Clock::now();
  auto [client, server] = cli_session(dir, 256 * 1024);
  const double cli_s = seconds_since(t1);
  fs::remove_all(dir);
  o.require(client.status == 0 && server.status == 0,
            "cli exit " + std::to_string(client.status) + "/" + std::to_string(server.status) + ": " + client.text);
  o.require(client.text.find("session Established peer=device-b") != std::string::npos, "cli client not established");
  o.require(server.text.find("session Established peer=device-a") != std::string::npos, "cli server not established");
  o.require(!fingerprint_in(client.text).empty() && fingerprint_in(client.text) == fingerprint_in(server.text),
            "cli key fingerprints differ");
  o.require(cli_s < 5.0, "cli session took " + fixed(cli_s) + " s");
  if (o.pass) o.note = "256 KB, library " + fixed(lib_s) + " s, cli " + fixed(cli_s) + " s, keys identical";
  return o;
}

Outcome linearity() {
  Outcome o;
  const std::vector<std::uint64_t> sizes{64 * 1024, 128 * 1024, 256 * 1024};
  const std::vector<std::uint32_t> blocks{1024};
  const auto rows = bench::crtm(sizes, blocks, 40);
  auto row = [&](std::uint64_t size) {
    return *std::find_if(rows.begin(), rows.end(), [&](const bench::CrtmRow& r) { return r.total_bytes == size; });
  };
  const auto r64 = row(sizes[0]), r128 = row(sizes[1]), r256 = row(sizes[2]);
  const double t1 = r128.mean_seconds / r64.mean_seconds;
  const double t2 = r256.mean_seconds / r128.mean_seconds;
  o.require(r64.iterations >= 20, "fewer than 20 iterations");
  o.require(t1 >= 1.8 && t1 <= 2.2, "128/64 time ratio " + fixed(t1));
  o.require(t2 >= 1.8 && t2 <= 2.2, "256/128 time ratio " + fixed(t2));
  o.require(r128.work_bytes == 2 * r64.work_bytes && r256.work_bytes == 2 * r128.work_bytes, "work ratio not 2.0");
  o.note = "time ratios " + fixed(t1) + ", " + fixed(t2) + " over " + std::to_string(r64.iterations) +
           " iterations; work ratio " + fixed(double(r128.work_bytes) / r64.work_bytes, 1) + o.note;
  return o;
}

Outcome block_size_effect() {
  Outcome o;
  const std::vector<std::uint64_t> sizes{4 * 1024 * 1024};
  const std::vector<std::uint32_t> blocks{1024, 4096};
  const auto rows = bench::crtm(sizes, blocks, 30);
  const double t1k = rows[0].block_size == 1024 ? rows[0].mean_seconds : rows[1].mean_seconds;
  const double t4k = rows[0].block_size == 4096 ? rows[0].mean_seconds : rows[1].mean_seconds;
  const double rel = std::abs(t1k - t4k) / t1k;
  o.require(rel <= 0.10, "relative difference " + fixed(rel * 100, 1) + "%");
  if (o.pass) o.note = "4 MB: b=1K " + fixed(t1k * 1e3, 2) + " ms, b=4K " + fixed(t4k * 1e3, 2) + " ms, " +
                       fixed(rel * 100, 1) + "% apart";
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  Bytes mem(8192);
  DeterministicRandom(ByteArray<32>{0x44}).fill(mem);
  std::size_t checked = 0;
  for (std::uint32_t b : {32u, 1024u, 4096u}) {
    for (std::uint32_t size = 1; size <= mem.size(); ++size) {
      const ByteView range = ByteView(mem).first(size);
      if (chained_digest(range, b) != oracle::chained_recursive(range, b)) {
        o.require(false, "mismatch at size " + std::to_string(size) + " b=" + std::to_string(b));
        return o;
      }
      ++checked;
    }
  }
  o.note = std::to_string(checked) + " (size, b) pairs, sizes 1..8192, b in {32, 1024, 4096}";
  return o;
}

Outcome pmp_semantics() {
  Outcome o;
  constexpr auto M = ExecutionContext::UntrustedM;
  const PmpConfig none{false, false, false, AddrMode::Napot, true};
  std::size_t agreements = 0;
  for (std::uint32_t reg = 0; reg < 0x10000 && o.pass; ++reg) {
    PmpBank napot;
    napot.configure(0, none, reg);
    auto [lo, hi] = oracle::napot_bounds(reg);
    o.require(napot.match_range(0) == AddressRange{lo, hi}, "NAPOT range " + std::to_string(reg));
    for (std::uint64_t a : {lo, hi, lo + (hi - lo) / 2, hi + 1, lo == 0 ? hi + 5 : lo - 1})
      o.require((napot.check(Access::Read, a, M) == AccessVerdict::Deny) == oracle::napot_match(reg, a),
                "NAPOT membership " + std::to_string(reg));

    for (std::uint32_t prev : {0u, 0x100u, 0xFFFFu}) {
      PmpBank tor;
      tor.configure(0, PmpConfig{}, prev);
      tor.configure(1, PmpConfig{false, false, false, AddrMode::Tor, true}, reg);
      auto want = oracle::tor_bounds(prev, reg);
      auto got = tor.match_range(1);
      o.require(got.has_value() == want.has_value(), "TOR emptiness " + std::to_string(reg));
      if (want && got) {
        o.require(*got == AddressRange{want->first, want->second}, "TOR range " + std::to_string(reg));
        o.require(tor.check(Access::Read, want->second, M) == AccessVerdict::Deny &&
                      tor.check(Access::Read, want->second + 1, M) == AccessVerdict::Allow,
                  "TOR membership " + std::to_string(reg));
      }
    }
    PmpBank na4;
    na4.configure(0, none, reg);
    na4.configure(1, PmpConfig{false, false, false, AddrMode::Na4, false}, reg);
    o.require(na4.match_range(1) == AddressRange{std::uint64_t{reg} << 2, (std::uint64_t{reg} << 2) + 3},
              "NA4 range " + std::to_string(reg));
    ++agreements;
  }

  // Lock until reset.
  PmpBank bank;
  bank.configure(0, PmpConfig::execute_only(AddrMode::Napot, true), napot_encode(0x4000, 0x1000));
  bool refused = false;
  try {
    bank.configure(0, PmpConfig{true, true, true, AddrMode::Napot, false}, napot_encode(0x4000, 0x1000));
  } catch (const Error& e) {
    refused = e.code() == Errc::LockedEntry;
  }
  o.require(refused, "locked entry rewritten");
  // X-only read denial.
  o.require(bank.check(Access::Read, 0x4040, M) == AccessVerdict::Deny &&
                bank.check(Access::Execute, 0x4040, M) == AccessVerdict::Allow,
            "execute-only region readable");
  // Lowest index wins.
  bank.configure(1, PmpConfig{true, true, true, AddrMode::Napot, true}, napot_encode(0x4000, 0x1000));
  o.require(bank.check(Access::Read, 0x4040, M) == AccessVerdict::Deny, "higher entry overrode lower");
  bank.reset();
  try {
    bank.configure(0, PmpConfig{true, true, true, AddrMode::Napot, false}, napot_encode(0x4000, 0x1000));
  } catch (const Error&) {
    o.require(false, "lock survived reset");
  }
  if (o.pass) o.note = std::to_string(agreements) + " addr_reg values agree for NAPOT, TOR and NA4";
  return o;
}

Outcome attack_catalog() {
  Outcome o;
  attack::ScenarioOptions opts;
  opts.seed.fill(0xA7);
  const auto first = attack::run_catalog(opts);
  const auto second = attack::run_catalog(opts, {}, true);
  std::size_t passed = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].passed) ++passed;
    o.require(first[i].passed, first[i].name + " observed " + first[i].observed.summary());
    o.require(first[i].observed.kind != attack::VerdictKind::Established, first[i].name + " established");
    o.require(i < second.size() && second[i].observed == first[i].observed, first[i].name + " not deterministic");
  }
  o.require(first.size() >= 10, "catalog has only " + std::to_string(first.size()) + " scenarios");
  if (o.pass) o.note = std::to_string(passed) + "/" + std::to_string(first.size()) + " detected, identical on rerun";
  return o;
}

Outcome secrecy() {
  Outcome o;
  std::mutex m;
  std::string logs;
  log::set_level(log::Level::Debug);
  log::set_sink([&](log::Level, std::string_view msg) {
    std::lock_guard lock(m);
    logs.append(msg).push_back('\n');
  });

  std::vector<Bytes> secrets = g_cli_secrets;
  auto keep = [&](ByteView b) { secrets.emplace_back(b.begin(), b.end()); };
  std::string state;
  auto frames = std::make_shared<std::vector<Bytes>>();

  TestbedOptions opts;
  opts.seed.fill(0x5E);
  opts.attested_bytes = 16 * 1024;
  Testbed tb = Testbed::create(opts);
  keep(tb.profile_a.qsk.bytes());
  keep(tb.profile_b.qsk.bytes());

  // Honest and aborted sessions through the agents.
  for (int i = 0; i < 4; ++i) {
    ChannelHooks hooks{hooks::record(frames), hooks::record(frames)};
    if (i % 2) hooks.b_to_a = hooks::chain(hooks::mutate_nth(0, [](Bytes& f) { f.back() ^= 1; }), hooks::record(frames));
    AgentOptions ao;
    ao.timeout = 2s;
    PairResult r = run_pair(*tb.a, *tb.b, hooks, ao, ao);
    if (r.a.key) keep(r.a.key->bytes());
    if (r.b.key) keep(r.b.key->bytes());
    state += std::string(to_string(r.a.outcome)) + r.a.detail + r.b.detail;
  }
  // Every intermediate protocol state, dumped.
  auto [sa, m1] = initiate(*tb.a, "device-b");
  state += sa.describe();
  SessionState sb = SessionState::responder();
  WireM2 m2 = respond_m1(*tb.b, sb, m1);
  state += sb.describe();
  WireM3 m3 = process_m2(*tb.a, sa, m2);
  state += sa.describe();
  process_m3(*tb.b, sb, m3);
  state += sa.describe() + sb.describe();
  keep(sa.key->bytes());
  for (const Bytes& b : {m1.encode(), m2.encode(), m3.encode()}) frames->push_back(b);
  state += serialize_trust_store(tb.a->trust_store()) + serialize_trust_store(tb.b->trust_store());

  // What untrusted code can read back from each device.
  Bytes dumps;
  for (Device* d : {tb.a.get(), tb.b.get()}) {
    const MemoryLayout& l = d->layout();
    // The key region is carved out of ROM; read around it.
    const std::uint32_t key_end = l.key_region.base + l.key_region.size;
    append(dumps, d->read(l.rom.base, l.key_region.base - l.rom.base));
    if (l.rom.base + l.rom.size > key_end) append(dumps, d->read(key_end, l.rom.base + l.rom.size - key_end));
    for (const RegionSpec& r : {l.flash, l.sram}) append(dumps, d->read(r.base, r.size));
    try {
      d->read(d->key_address(), 32);
      o.require(false, "key region readable");
    } catch (const Error&) {
    }
  }

  // The attack catalog also logs.
  attack::ScenarioOptions so;
  attack::run_catalog(so);

  log::set_sink({});
  log::set_level(log::Level::Info);

  std::size_t hits = 0;
  for (const Bytes& s : secrets) {
    hits += oracle::contains_secret(logs, s);
    hits += oracle::contains_secret(state, s);
    hits += oracle::contains_secret(g_cli_output, s);
    hits += oracle::contains_secret(ByteView(dumps), s);
    for (const Bytes& f : *frames) hits += oracle::contains_secret(ByteView(f), s);
  }
  // The grep itself must be able to see a planted secret.
  const bool control = oracle::contains_secret(logs + to_hex(secrets.front()), secrets.front());
  o.require(control, "positive control not detected");
  o.require(hits == 0, std::to_string(hits) + " occurrences of secrets");
  o.require(!g_cli_output.empty() && !g_cli_secrets.empty(), "no CLI output captured");
  if (o.pass)
    o.note = std::to_string(secrets.size()) + " secrets, 0 hits across " + std::to_string(logs.size()) +
             " B of logs, " + std::to_string(frames->size()) + " frames, state dumps, memory dumps, " +
             std::to_string(g_cli_output.size()) + " B of CLI output";
  return o;
}

Outcome fuzz() {
  Outcome o;
  std::mt19937_64 rng(2024);
  const Bytes valid = encode_frame(FrameType::M3, Bytes(196, 0x77));
  std::size_t counts[5] = {};
  for (int i = 0; i < 100000; ++i) {
    Bytes in;
    if (i % 2) {
      in.resize(rng() % 256);
      for (auto& b : in) b = static_cast<std::uint8_t>(rng());
      if (i % 4 == 1 && in.size() >= 4) std::copy(kFrameMagic.begin(), kFrameMagic.end(), in.begin());
    } else {
      in = valid;
      in[rng() % in.size()] ^= static_cast<std::uint8_t>(rng() | 1);
      in.resize(rng() % (in.size() + 8), 0);
    }
    auto buf = std::make_unique<std::uint8_t[]>(in.size() + 1);
    std::copy(in.begin(), in.end(), buf.get());
    const DecodeResult r = decode_frame(ByteView(buf.get(), in.size()));
    const auto s = static_cast<unsigned>(r.status);
    if (s > 4) {
      o.require(false, "unknown status");
      break;
    }
    ++counts[s];
    if (r.status == DecodeStatus::Ok)
      o.require(r.consumed == kFrameHeaderSize + r.frame.payload.size() && r.consumed <= in.size(),
                "valid frame with bad length");
    else
      o.require(r.consumed == 0, "error consumed input");
  }
  o.note = "10^5 inputs: ok=" + std::to_string(counts[0]) + " bad-magic=" + std::to_string(counts[1]) +
           " bad-version=" + std::to_string(counts[2]) + " oversize=" + std::to_string(counts[3]) +
           " truncated=" + std::to_string(counts[4]) + (o.pass ? "" : "; " + o.note);
  return o;
}

}  // namespace

int main() {
  log::set_level(log::Level::Error);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"honest loopback session", honest_run},
      {"CRTM linearity", linearity},
      {"block size effect", block_size_effect},
      {"recursive oracle equivalence", oracle_equivalence},
      {"PMP semantics", pmp_semantics},
      {"attack catalog", attack_catalog},
      {"secrecy hygiene", secrecy},
      {"transport fuzz", fuzz},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = std::string("exception: ") + e.what();
    }
    all = all && o.pass;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << "  ("
              << o.note << ")" << std::endl;
  }
  return all ? 0 : 1;
}
