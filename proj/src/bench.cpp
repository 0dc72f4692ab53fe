#include "lirav/bench.hpp"

#include <chrono>
#include <cstdio>
#include <map>

#include "lirav/crtm.hpp"
#include "lirav/crypto.hpp"
#include "lirav/error.hpp"
#include "lirav/testbed.hpp"

namespace lirav::bench {

namespace {

using Clock = std::chrono::steady_clock;

volatile std::uint8_t g_sink;  // keeps timed digests observable

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string row(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace

std::vector<std::uint64_t> default_sizes() {
  std::vector<std::uint64_t> sizes;
  for (std::uint64_t s = 1024; s <= 4 * 1024 * 1024; s *= 2) sizes.push_back(s);
  return sizes;
}

std::vector<std::uint32_t> default_blocks() { return {1024, 2048, 4096}; }

std::vector<CrtmRow> crtm(std::span<const std::uint64_t> sizes, std::span<const std::uint32_t> blocks,
                          int iterations) {
  if (iterations < 1) throw Error(Errc::InvalidConfig, "iterations must be positive");
  std::uint64_t largest = 0;
  for (auto s : sizes) largest = std::max(largest, s);
  Bytes memory(largest);
  DeterministicRandom(ByteArray<32>{}).fill(memory);

  std::vector<CrtmRow> rows;
  for (auto s : sizes) {
    for (auto b : blocks) {
      if (b == 0 || b > s) continue;
      rows.push_back(CrtmRow{s, b, 0, 0, 0, iterations});
    }
  }
  std::vector<double> totals(rows.size(), 0.0);
  for (int it = -1; it < iterations; ++it) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      MeasureStats stats;
      const auto t0 = Clock::now();
      Digest d = chained_digest(ByteView(memory).first(rows[i].total_bytes), rows[i].block_size, &stats);
      const double dt = seconds_since(t0);
      g_sink = d[0];
      if (it < 0) continue;
      totals[i] += dt;
      rows[i].blocks = stats.blocks;
      rows[i].work_bytes = stats.memory_bytes;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].mean_seconds = totals[i] / iterations;
  return rows;
}

std::vector<ProtocolRow> protocol(std::span<const std::uint64_t> attested_sizes, int iterations) {
  if (iterations < 1) throw Error(Errc::InvalidConfig, "iterations must be positive");
  std::vector<ProtocolRow> rows;
  for (auto size : attested_sizes) {
    TestbedOptions opts;
    opts.attested_bytes = static_cast<std::uint32_t>(size);
    Testbed t = Testbed::create(opts);
    double total = 0;
    for (int it = -1; it < iterations; ++it) {
      const auto t0 = Clock::now();
      PairResult r = run_pair(*t.a, *t.b);
      const double dt = seconds_since(t0);
      if (!r.a.established() || !r.b.established()) throw Error(Errc::InvalidConfig, "benchmark session failed");
      if (it >= 0) total += dt;
    }
    rows.push_back(ProtocolRow{size, total / iterations, iterations});
  }
  return rows;
}

std::string format(const std::vector<CrtmRow>& rows, Format f) {
  std::string out;
  if (f == Format::Csv) {
    out = "total_bytes,block_size,blocks,work_bytes,mean_seconds,iterations\n";
    for (const auto& r : rows) {
      out += row("%llu,%u,%llu,%llu,%.9f,%d\n", static_cast<unsigned long long>(r.total_bytes), r.block_size,
                 static_cast<unsigned long long>(r.blocks), static_cast<unsigned long long>(r.work_bytes),
                 r.mean_seconds, r.iterations);
    }
    return out;
  }
  out = row("%12s %8s %8s %12s %12s %10s\n", "bytes", "block", "blocks", "work", "mean_ms", "MB/s");
  for (const auto& r : rows) {
    const double mbps = r.mean_seconds > 0 ? static_cast<double>(r.total_bytes) / r.mean_seconds / 1e6 : 0.0;
    out += row("%12llu %8u %8llu %12llu %12.4f %10.1f\n", static_cast<unsigned long long>(r.total_bytes),
               r.block_size, static_cast<unsigned long long>(r.blocks),
               static_cast<unsigned long long>(r.work_bytes), r.mean_seconds * 1e3, mbps);
  }
  return out;
}

std::string format(const std::vector<ProtocolRow>& rows, Format f) {
  std::string out;
  if (f == Format::Csv) {
    out = "attested_bytes,mean_seconds,iterations\n";
    for (const auto& r : rows) {
      out += row("%llu,%.9f,%d\n", static_cast<unsigned long long>(r.attested_bytes), r.mean_seconds, r.iterations);
    }
    return out;
  }
  out = row("%14s %12s\n", "attested", "session_ms");
  for (const auto& r : rows) {
    out += row("%14llu %12.3f\n", static_cast<unsigned long long>(r.attested_bytes), r.mean_seconds * 1e3);
  }
  return out;
}

}  // namespace lirav::bench
