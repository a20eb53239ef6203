#pragma once

#include <array>
#include <optional>

#include "mcquic/bytes.hpp"
#include "mcquic/wire.hpp"

namespace mcquic {

inline constexpr size_t kAeadKeyLen = 16;   // AES-128-GCM
inline constexpr size_t kAeadIvLen = 12;
inline constexpr size_t kAeadTagLen = 16;
inline constexpr size_t kGroupSecretLen = 32;
inline constexpr size_t kSignatureLen = 64;  // Ed25519

struct AeadKeys {
  std::array<uint8_t, kAeadKeyLen> key{};
  std::array<uint8_t, kAeadIvLen> iv{};
  auto operator<=>(const AeadKeys&) const = default;
};

/// HKDF-SHA256 over the 32-byte group secret with fixed labels
/// "mcquic key" / "mcquic iv". Deterministic.
/// Throws std::invalid_argument on a wrong secret length.
AeadKeys derive_group_keys(ByteSpan secret);

/// Directional unicast keys from the stub handshake's shared secret.
AeadKeys derive_unicast_keys(ByteSpan secret, bool server_to_client);

struct UnicastKeys {
  uint64_t client_id = 0;
  AeadKeys keys;  // server-to-client direction, used by the tag scheme
};

/// AES-128-GCM with nonce = iv XOR pn (pn left-padded to 12 bytes),
/// with the path kind folded into the top nonce byte so the two
/// multicast channels sharing the group key never reuse a nonce.
/// header_bytes are the associated data; the 16-byte tag is appended.
Bytes seal_packet(const AeadKeys& keys, ByteSpan header_bytes,
                  ByteSpan plaintext, uint64_t pn, PathKind path);

/// nullopt on any authentication failure.
std::optional<Bytes> open_packet(const AeadKeys& keys, ByteSpan header_bytes,
                                 ByteSpan ciphertext, uint64_t pn,
                                 PathKind path);

struct SigningKeys {
  std::array<uint8_t, 32> private_seed{};
  std::array<uint8_t, 32> public_key{};

  static SigningKeys from_seed(ByteSpan seed32);
};

std::array<uint8_t, kSignatureLen> sign_datagram(const SigningKeys& sk,
                                                 ByteSpan udp_payload);
bool verify_datagram(ByteSpan public_key, ByteSpan udp_payload,
                     ByteSpan signature);

/// Per-stream signature; the message binds the stream id (8-byte
/// big-endian) ahead of the reassembled bytes.
std::array<uint8_t, kSignatureLen> sign_stream(const SigningKeys& sk,
                                               uint64_t stream_id,
                                               ByteSpan stream_bytes);
bool verify_stream(ByteSpan public_key, uint64_t stream_id,
                   ByteSpan stream_bytes, ByteSpan signature);

/// GCM tag of re-encrypting the sealed multicast data packet under the
/// client's unicast key, nonce uc.iv XOR pn in the McData nonce domain,
/// empty associated data. The ciphertext is discarded.
std::array<uint8_t, kAeadTagLen> compute_sym_tag(const AeadKeys& uc,
                                                 ByteSpan mc_ciphertext,
                                                 uint64_t pn);

}  // namespace mcquic
