#pragma once

// Trusted boot-ROM routines. Only the attestation flow and its tests
// include this header; adversary code goes through the public Device
// surface instead.

#include "lirav/device.hpp"
#include "lirav/quote.hpp"

namespace lirav::rom {

/// CRTM over the device's configured attested range (no PMP checks).
Measurement measure_device(const Device& device);

/// Signs `measurement` with the quote-signing key. Before touching the key
/// the gate confirms the key bytes are execute-only to untrusted code
/// (Execute allowed, Read denied) and throws GateViolation otherwise. The
/// gate's working buffer is wiped before returning.
Quote sign_quote_gated(Device& device, const Measurement& measurement);

/// Same gate, signing a 32-byte transcript digest.
Signature sign_transcript_gated(Device& device, const Digest& transcript);

}  // namespace lirav::rom
