// lirav: provision simulated devices, run attestation sessions over TCP,
// benchmark the CRTM and replay the attack catalog.
//
// Exit status: 0 success, 1 session aborted or check failed, 2 usage or
// configuration error, 3 transport failure.

#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "lirav/agent.hpp"
#include "lirav/attack.hpp"
#include "lirav/bench.hpp"
#include "lirav/log.hpp"
#include "lirav/provisioning.hpp"
#include "lirav/transport.hpp"

using namespace lirav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAbort = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTransport = 3;

struct Options {
  std::string profile;
  std::string trust;
  std::string addr = "127.0.0.1:7450";
  std::string image;
  std::string id;
  std::string peer;
  std::string seed;
  std::string format = "text";
  std::string suite = "crtm";
  std::optional<std::uint32_t> start;
  std::optional<std::uint32_t> end;
  std::uint32_t block = 1024;
  std::optional<std::uint32_t> load_addr;
  int iters = 20;
  int sessions = 1;
  double timeout_s = std::chrono::duration<double>(kDefaultTimeout).count();
  std::vector<std::string> only;
  bool parallel = false;
  bool list = false;
};

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::Timeout:
    case Errc::ChannelClosed:
    case Errc::FrameError:
      return kExitTransport;
    default:
      return kExitUsage;
  }
}

int exit_code_for(const SessionResult& r) {
  switch (r.outcome) {
    case SessionOutcome::Established: return kExitOk;
    case SessionOutcome::Aborted:
    case SessionOutcome::PeerAborted: return kExitAbort;
    case SessionOutcome::Timeout:
    case SessionOutcome::TransportError: return kExitTransport;
  }
  return kExitAbort;
}

void print_result(const SessionResult& r) {
  std::string line = "session " + std::string(to_string(r.outcome));
  if (r.reason) line += " reason=" + std::string(to_string(*r.reason));
  if (r.established()) line += " peer=" + r.peer_id + " key-fp=" + key_fingerprint(*r.key);
  else if (!r.detail.empty()) line += " detail=\"" + r.detail + "\"";
  std::cout << line << std::endl;
}

std::chrono::milliseconds timeout_of(const Options& o) {
  return std::chrono::milliseconds(static_cast<long long>(o.timeout_s * 1000.0));
}

ByteArray<32> seed_or_zero(const std::string& hex) {
  if (hex.empty()) return {};
  return from_hex_exact<32>(hex);
}

std::unique_ptr<Device> load_device(const Options& o) {
  DeviceProfile profile = load_profile(o.profile);
  Bytes firmware = load_firmware(profile.firmware);
  TrustStore trust = o.trust.empty() ? TrustStore{} : load_trust_store(o.trust);
  return make_device(profile, firmware, trust);
}

int cmd_provision(const Options& o) {
  DeviceProfile p;
  p.id = o.id;
  Bytes firmware = load_firmware(o.image);
  QuoteSigningKey key = [&] {
    if (o.seed.empty()) {
      SystemRandom rng;
      return gen_identity(rng);
    }
    return gen_identity(from_hex(o.seed));
  }();
  p.qsk = key.secret;
  const std::uint32_t start = o.start.value_or(p.layout.flash.base);
  const std::uint32_t end = o.end.value_or(start + static_cast<std::uint32_t>(firmware.size()));
  p.attestation = AttestationConfig{start, end, o.block};
  p.firmware = std::filesystem::absolute(o.image);
  p.layout.validate();
  // Building the device checks the layout and range the same way boot will.
  make_device(p, firmware, TrustStore{});
  save_profile(o.profile, p);
  std::cout << format_peer_record(peer_record(p, firmware));
  return kExitOk;
}

int cmd_measure(const Options& o) {
  Measurement m;
  if (!o.profile.empty()) {
    DeviceProfile profile = load_profile(o.profile);
    m = peer_record(profile, load_firmware(profile.firmware)).expected.front();
  } else {
    if (o.image.empty() || !o.start || !o.end) {
      std::cerr << "measure needs --profile, or --image with --start and --end\n";
      return kExitUsage;
    }
    const std::uint32_t base = o.load_addr.value_or(MemoryLayout{}.flash.base);
    m = compute_expected(load_firmware(o.image), base, AttestationConfig{*o.start, *o.end, o.block});
  }
  char range[64];
  std::snprintf(range, sizeof range, "0x%08x 0x%08x %u", m.config.start_addr, m.config.end_addr,
                m.config.block_size);
  std::cout << "expect " << range << " " << to_hex(m.digest) << "\n";
  return kExitOk;
}

int cmd_serve(const Options& o) {
  auto device = load_device(o);
  auto [host, port] = parse_host_port(o.addr);
  TcpListener listener(host, port);
  std::cout << "listening " << host << ":" << listener.port() << std::endl;
  AgentOptions agent;
  agent.timeout = timeout_of(o);
  std::mutex mutex;
  int worst = kExitOk;
  auto serve_one = [&](std::unique_ptr<Endpoint> ep) {
    SessionResult r = run_responder(*device, *ep, agent);
    std::lock_guard lock(mutex);
    print_result(r);
    worst = std::max(worst, exit_code_for(r));
  };
  std::vector<std::thread> workers;
  for (int i = 0; o.sessions == 0 || i < o.sessions; ++i) {
    auto ep = listener.accept(o.sessions == 0 ? std::chrono::hours(24 * 365) : agent.timeout);
    if (o.parallel) workers.emplace_back(serve_one, std::move(ep));
    else serve_one(std::move(ep));
  }
  for (auto& w : workers) w.join();
  return worst;
}

int cmd_attest(const Options& o) {
  auto device = load_device(o);
  auto [host, port] = parse_host_port(o.addr);
  AgentOptions agent;
  agent.timeout = timeout_of(o);
  auto ep = tcp_connect(host, port, agent.timeout);
  SessionResult r = run_initiator(*device, *ep, o.peer, agent);
  print_result(r);
  return exit_code_for(r);
}

int cmd_bench(const Options& o) {
  const auto fmt = o.format == "csv" ? bench::Format::Csv : bench::Format::Text;
  if (o.suite == "crtm" || o.suite == "all") {
    auto sizes = bench::default_sizes();
    auto blocks = bench::default_blocks();
    std::cout << bench::format(bench::crtm(sizes, blocks, o.iters), fmt);
  }
  if (o.suite == "protocol" || o.suite == "all") {
    const std::vector<std::uint64_t> sizes{64 * 1024, 128 * 1024, 256 * 1024};
    std::cout << bench::format(bench::protocol(sizes, o.iters), fmt);
  }
  return kExitOk;
}

int cmd_attack(const Options& o) {
  if (o.list) {
    for (const auto& s : attack::catalog()) {
      std::cout << s.name << "  " << s.expected.summary() << "  " << s.description << "\n";
    }
    return kExitOk;
  }
  attack::ScenarioOptions so;
  so.seed = seed_or_zero(o.seed);
  so.timeout = timeout_of(o);
  const bool csv = o.format == "csv";
  if (csv) std::cout << "scenario,expected,observed,result\n";
  bool all = true;
  for (const auto& r : attack::run_catalog(so, o.only, o.parallel)) {
    const char* result = r.passed ? "PASS" : "FAIL";
    if (csv) {
      std::cout << r.name << "," << r.expected.summary() << "," << r.observed.summary() << "," << result << "\n";
    } else {
      std::cout << result << " " << r.name << " expected=" << r.expected.summary()
                << " observed=" << r.observed.summary();
      if (!r.passed && !r.observed.detail.empty()) std::cout << " detail=\"" << r.observed.detail << "\"";
      std::cout << "\n";
    }
    all = all && r.passed;
  }
  return all ? kExitOk : kExitAbort;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutual remote attestation between simulated RISC-V devices"};
  app.require_subcommand(1);
  Options o;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log protocol progress to stderr");

  auto* provision = app.add_subcommand("provision", "Create a device profile and print its trust-store record");
  provision->add_option("--id", o.id, "Device identifier")->required();
  provision->add_option("--image", o.image, "Firmware image loaded at the flash base")->required();
  provision->add_option("--profile", o.profile, "Profile file to write")->required();
  provision->add_option("--start", o.start, "Attested range start (default: flash base)");
  provision->add_option("--end", o.end, "Attested range end, exclusive (default: end of image)");
  provision->add_option("--block", o.block, "CRTM block size in bytes")->check(CLI::PositiveNumber);
  provision->add_option("--seed", o.seed, "Entropy as hex (>= 32 bytes); default: system RNG");

  auto* measure = app.add_subcommand("measure", "Print the expected measurement of a profile or image");
  measure->add_option("--profile", o.profile, "Device profile");
  measure->add_option("--image", o.image, "Firmware image");
  measure->add_option("--addr", o.load_addr, "Load address of the image (default: flash base)");
  measure->add_option("--start", o.start, "Attested range start");
  measure->add_option("--end", o.end, "Attested range end, exclusive");
  measure->add_option("--block", o.block, "CRTM block size in bytes")->check(CLI::PositiveNumber);

  auto* serve = app.add_subcommand("serve", "Accept sessions as responder");
  serve->add_option("--profile", o.profile, "Device profile")->required();
  serve->add_option("--trust", o.trust, "Trust store")->required();
  serve->add_option("--addr", o.addr, "host:port to listen on (port 0 picks one)");
  serve->add_option("--sessions", o.sessions, "Sessions to serve; 0 runs until killed");
  serve->add_option("--timeout", o.timeout_s, "Per-session timeout in seconds");
  serve->add_flag("--parallel", o.parallel, "Run sessions concurrently");

  auto* attest = app.add_subcommand("attest", "Run one session as initiator");
  attest->add_option("--profile", o.profile, "Device profile")->required();
  attest->add_option("--trust", o.trust, "Trust store")->required();
  attest->add_option("--addr", o.addr, "Responder host:port");
  attest->add_option("--peer", o.peer, "Responder id in the trust store")->required();
  attest->add_option("--timeout", o.timeout_s, "Connect and session timeout in seconds");

  auto* bench = app.add_subcommand("bench", "Time the CRTM and full sessions");
  bench->add_option("--suite", o.suite, "crtm, protocol or all")
      ->check(CLI::IsMember({"crtm", "protocol", "all"}));
  bench->add_option("--iters", o.iters, "Timed iterations per configuration")->check(CLI::PositiveNumber);
  bench->add_option("--format", o.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

  auto* attack_cmd = app.add_subcommand("attack", "Run the adversary scenario catalog");
  attack_cmd->add_option("--only", o.only, "Run only the named scenario (repeatable)");
  attack_cmd->add_option("--seed", o.seed, "32-byte seed as hex");
  attack_cmd->add_option("--timeout", o.timeout_s, "Session timeout in seconds");
  attack_cmd->add_option("--format", o.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  attack_cmd->add_flag("--parallel", o.parallel, "Run scenarios concurrently");
  attack_cmd->add_flag("--list", o.list, "List scenarios and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  log::set_level(verbose ? log::Level::Debug : log::Level::Error);
  try {
    if (*provision) return cmd_provision(o);
    if (*measure) return cmd_measure(o);
    if (*serve) return cmd_serve(o);
    if (*attest) return cmd_attest(o);
    if (*bench) return cmd_bench(o);
    if (*attack_cmd) return cmd_attack(o);
  } catch (const Error& e) {
    std::cerr << "lirav: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "lirav: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
