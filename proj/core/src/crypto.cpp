#include "mcquic/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <cstring>
#include <memory>
#include <stdexcept>

namespace mcquic {

namespace {

struct CtxFree {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
  void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
  void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxFree>;
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, CtxFree>;
using Pkey = std::unique_ptr<EVP_PKEY, CtxFree>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, CtxFree>;

[[noreturn]] void crypto_abort(const char* what) {
  throw std::runtime_error(std::string("crypto: ") + what);
}

void hkdf_sha256(ByteSpan ikm, const char* label, uint8_t* out,
                 size_t out_len) {
  PkeyCtx ctx{EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr)};
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(),
                                  reinterpret_cast<const unsigned char*>(""),
                                  0) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), int(ikm.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(
          ctx.get(), reinterpret_cast<const unsigned char*>(label),
          int(std::strlen(label))) <= 0) {
    crypto_abort("hkdf setup failed");
  }
  size_t len = out_len;
  if (EVP_PKEY_derive(ctx.get(), out, &len) <= 0 || len != out_len) {
    crypto_abort("hkdf derive failed");
  }
}

std::array<uint8_t, kAeadIvLen> make_nonce(const AeadKeys& keys, uint64_t pn,
                                           PathKind path) {
  std::array<uint8_t, kAeadIvLen> nonce = keys.iv;
  nonce[0] ^= uint8_t(path);
  for (int i = 0; i < 8; ++i) {
    nonce[kAeadIvLen - 1 - i] ^= uint8_t(pn >> (8 * i));
  }
  return nonce;
}

// One GCM pass; when `out` is null only the tag is kept.
void gcm_encrypt(const AeadKeys& keys,
                 const std::array<uint8_t, kAeadIvLen>& nonce, ByteSpan aad,
                 ByteSpan plaintext, uint8_t* out, uint8_t* tag_out) {
  CipherCtx ctx{EVP_CIPHER_CTX_new()};
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr,
                         keys.key.data(), nonce.data()) != 1) {
    crypto_abort("gcm init failed");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                        int(aad.size())) != 1) {
    crypto_abort("gcm aad failed");
  }
  Bytes scratch;
  uint8_t* dst = out;
  if (dst == nullptr) {
    scratch.resize(plaintext.size());
    dst = scratch.data();
  }
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), dst, &len, plaintext.data(),
                        int(plaintext.size())) != 1) {
    crypto_abort("gcm encrypt failed");
  }
  if (EVP_EncryptFinal_ex(ctx.get(), dst + plaintext.size(), &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagLen,
                          tag_out) != 1) {
    crypto_abort("gcm finalize failed");
  }
}

}  // namespace

AeadKeys derive_group_keys(ByteSpan secret) {
  if (secret.size() != kGroupSecretLen) {
    throw std::invalid_argument("derive_group_keys: secret must be 32 bytes");
  }
  AeadKeys out;
  hkdf_sha256(secret, "mcquic key", out.key.data(), out.key.size());
  hkdf_sha256(secret, "mcquic iv", out.iv.data(), out.iv.size());
  return out;
}

AeadKeys derive_unicast_keys(ByteSpan secret, bool server_to_client) {
  if (secret.size() != kGroupSecretLen) {
    throw std::invalid_argument("derive_unicast_keys: secret must be 32 bytes");
  }
  AeadKeys out;
  if (server_to_client) {
    hkdf_sha256(secret, "mcquic uc server key", out.key.data(), out.key.size());
    hkdf_sha256(secret, "mcquic uc server iv", out.iv.data(), out.iv.size());
  } else {
    hkdf_sha256(secret, "mcquic uc client key", out.key.data(), out.key.size());
    hkdf_sha256(secret, "mcquic uc client iv", out.iv.data(), out.iv.size());
  }
  return out;
}

Bytes seal_packet(const AeadKeys& keys, ByteSpan header_bytes,
                  ByteSpan plaintext, uint64_t pn, PathKind path) {
  Bytes out(plaintext.size() + kAeadTagLen);
  auto nonce = make_nonce(keys, pn, path);
  gcm_encrypt(keys, nonce, header_bytes, plaintext, out.data(),
              out.data() + plaintext.size());
  return out;
}

std::optional<Bytes> open_packet(const AeadKeys& keys, ByteSpan header_bytes,
                                 ByteSpan ciphertext, uint64_t pn,
                                 PathKind path) {
  if (ciphertext.size() < kAeadTagLen) return std::nullopt;
  size_t body_len = ciphertext.size() - kAeadTagLen;
  auto nonce = make_nonce(keys, pn, path);
  CipherCtx ctx{EVP_CIPHER_CTX_new()};
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr,
                         keys.key.data(), nonce.data()) != 1) {
    crypto_abort("gcm init failed");
  }
  int len = 0;
  if (!header_bytes.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, header_bytes.data(),
                        int(header_bytes.size())) != 1) {
    crypto_abort("gcm aad failed");
  }
  Bytes out(body_len);
  if (body_len > 0 &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext.data(),
                        int(body_len)) != 1) {
    return std::nullopt;
  }
  uint8_t tag[kAeadTagLen];
  std::memcpy(tag, ciphertext.data() + body_len, kAeadTagLen);
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagLen,
                          tag) != 1) {
    crypto_abort("gcm set tag failed");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + body_len, &len) != 1) {
    return std::nullopt;  // authentication failure
  }
  return out;
}

SigningKeys SigningKeys::from_seed(ByteSpan seed32) {
  if (seed32.size() != 32) {
    throw std::invalid_argument("SigningKeys: seed must be 32 bytes");
  }
  SigningKeys out;
  std::copy(seed32.begin(), seed32.end(), out.private_seed.begin());
  Pkey pkey{EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                         seed32.data(), seed32.size())};
  if (!pkey) crypto_abort("ed25519 key load failed");
  size_t len = out.public_key.size();
  if (EVP_PKEY_get_raw_public_key(pkey.get(), out.public_key.data(), &len) !=
          1 ||
      len != out.public_key.size()) {
    crypto_abort("ed25519 public key extraction failed");
  }
  return out;
}

namespace {

std::array<uint8_t, kSignatureLen> ed25519_sign(const SigningKeys& sk,
                                                ByteSpan msg) {
  Pkey pkey{EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                         sk.private_seed.data(),
                                         sk.private_seed.size())};
  MdCtx ctx{EVP_MD_CTX_new()};
  std::array<uint8_t, kSignatureLen> sig{};
  size_t sig_len = sig.size();
  if (!pkey || !ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) !=
          1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &sig_len, msg.data(),
                     msg.size()) != 1 ||
      sig_len != kSignatureLen) {
    crypto_abort("ed25519 sign failed");
  }
  return sig;
}

bool ed25519_verify(ByteSpan public_key, ByteSpan msg, ByteSpan sig) {
  if (public_key.size() != 32 || sig.size() != kSignatureLen) return false;
  Pkey pkey{EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                        public_key.data(), public_key.size())};
  if (!pkey) return false;
  MdCtx ctx{EVP_MD_CTX_new()};
  if (!ctx ||
      EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr,
                           pkey.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(),
                          msg.size()) == 1;
}

}  // namespace

std::array<uint8_t, kSignatureLen> sign_datagram(const SigningKeys& sk,
                                                 ByteSpan udp_payload) {
  return ed25519_sign(sk, udp_payload);
}

bool verify_datagram(ByteSpan public_key, ByteSpan udp_payload,
                     ByteSpan signature) {
  return ed25519_verify(public_key, udp_payload, signature);
}

std::array<uint8_t, kSignatureLen> sign_stream(const SigningKeys& sk,
                                               uint64_t stream_id,
                                               ByteSpan stream_bytes) {
  Bytes msg(8 + stream_bytes.size());
  for (int i = 0; i < 8; ++i) msg[i] = uint8_t(stream_id >> (8 * (7 - i)));
  std::copy(stream_bytes.begin(), stream_bytes.end(), msg.begin() + 8);
  return ed25519_sign(sk, as_span(msg));
}

bool verify_stream(ByteSpan public_key, uint64_t stream_id,
                   ByteSpan stream_bytes, ByteSpan signature) {
  Bytes msg(8 + stream_bytes.size());
  for (int i = 0; i < 8; ++i) msg[i] = uint8_t(stream_id >> (8 * (7 - i)));
  std::copy(stream_bytes.begin(), stream_bytes.end(), msg.begin() + 8);
  return ed25519_verify(public_key, as_span(msg), signature);
}

std::array<uint8_t, kAeadTagLen> compute_sym_tag(const AeadKeys& uc,
                                                 ByteSpan mc_ciphertext,
                                                 uint64_t pn) {
  std::array<uint8_t, kAeadTagLen> tag{};
  auto nonce = make_nonce(uc, pn, PathKind::McData);
  gcm_encrypt(uc, nonce, {}, mc_ciphertext, nullptr, tag.data());
  return tag;
}

}  // namespace mcquic
