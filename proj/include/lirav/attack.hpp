#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lirav/bytes.hpp"
#include "lirav/error.hpp"

// Adversary scenarios. The harness acts as network attacker and as
// malicious firmware on a device, so it is limited to what those can reach:
// the channel, the public protocol functions, and the Device's untrusted
// surface (memory access, PMP writes, ROM entry points).

namespace lirav::attack {

enum class VerdictKind {
  /// A party aborted the session with `reason`.
  Aborted,
  AccessFault,
  LockedEntry,
  Timeout,
  /// The attack went through; always a failure.
  Established,
  Other,
};

std::string_view to_string(VerdictKind kind) noexcept;

struct Verdict {
  VerdictKind kind = VerdictKind::Other;
  std::optional<AbortReason> reason;
  std::string detail;

  friend bool operator==(const Verdict& a, const Verdict& b) noexcept {
    return a.kind == b.kind && a.reason == b.reason;
  }
  std::string summary() const;
};

struct ScenarioOptions {
  ByteArray<32> seed{};
  /// Used where the expected outcome is a timeout.
  std::chrono::milliseconds short_timeout{300};
  std::chrono::milliseconds timeout{5000};
};

struct Scenario {
  std::string name;
  std::string description;
  Verdict expected;
  std::function<Verdict(const ScenarioOptions&)> run;
};

const std::vector<Scenario>& catalog();

struct ScenarioReport {
  std::string name;
  Verdict expected;
  Verdict observed;
  bool passed = false;
};

/// Runs one scenario with a seed derived from the base seed and the
/// scenario name. Exceptions inside a scenario become an Other verdict.
ScenarioReport run_scenario(const Scenario& scenario, const ScenarioOptions& options);

/// Runs the catalog (or the named subset) and reports in catalog order.
/// Throws Error(InvalidConfig) for an unknown name.
std::vector<ScenarioReport> run_catalog(const ScenarioOptions& options, const std::vector<std::string>& only = {},
                                        bool parallel = false);

}  // namespace lirav::attack
