/*
 * Copyright 2026 The fedmdl Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "fedmdl/answer_crypto.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <sstream>

#include "fedmdl/digest.h"
#include "fedmdl/error.h"

namespace fedmdl {
namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

CipherCtx NewCtx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error("cipher context allocation failed");
  return ctx;
}

}  // namespace

UserKey KeyFromSeed(std::uint64_t seed) {
  return Sha256("fedmdl-user-key\n" + std::to_string(seed));
}

std::string FormatKey(const UserKey& key) { return ToHex(key); }

UserKey ParseKey(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  auto d = DigestFromHex(text);
  if (!d) throw ParseError("key must be 64 hex characters", 0);
  return *d;
}

UserKey LoadKeyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read key file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseKey(ss.str());
}

Nonce DeriveNonce(std::uint64_t seed, std::string_view plaintext) {
  const Digest body = Sha256(plaintext);
  const Digest d = Sha256("fedmdl-nonce\n" + std::to_string(seed) + "\n" + ToHex(body));
  Nonce n{};
  std::copy_n(d.begin(), n.size(), n.begin());
  return n;
}

std::vector<std::uint8_t> SealedAnswer::ToWire() const {
  std::vector<std::uint8_t> out;
  out.reserve(nonce.size() + tag.size() + ciphertext.size());
  out.insert(out.end(), nonce.begin(), nonce.end());
  out.insert(out.end(), tag.begin(), tag.end());
  out.insert(out.end(), ciphertext.begin(), ciphertext.end());
  return out;
}

SealedAnswer SealedAnswer::FromWire(const std::vector<std::uint8_t>& wire) {
  SealedAnswer s;
  if (wire.size() < s.nonce.size() + s.tag.size()) {
    throw AuthError("answer is shorter than its nonce and tag");
  }
  auto it = wire.begin();
  std::copy_n(it, s.nonce.size(), s.nonce.begin());
  it += static_cast<std::ptrdiff_t>(s.nonce.size());
  std::copy_n(it, s.tag.size(), s.tag.begin());
  it += static_cast<std::ptrdiff_t>(s.tag.size());
  s.ciphertext.assign(it, wire.end());
  return s;
}

std::string SealedAnswer::ToBase64() const { return Base64Encode(ToWire()); }

SealedAnswer SealedAnswer::FromBase64(std::string_view text) {
  std::vector<std::uint8_t> wire;
  try {
    wire = Base64Decode(text);
  } catch (const ParseError& e) {
    throw AuthError(std::string("answer is not valid base64: ") + e.what());
  }
  return FromWire(wire);
}

SealedAnswer Seal(std::string_view plaintext, const UserKey& key, const Nonce& nonce) {
  SealedAnswer out;
  out.nonce = nonce;
  out.ciphertext.resize(plaintext.size());
  auto ctx = NewCtx();
  int len = 0;
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                          nullptr) != 1 ||
      EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &len,
                        reinterpret_cast<const unsigned char*>(plaintext.data()),
                        static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + len, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(out.tag.size()),
                          out.tag.data()) != 1) {
    throw Error("AES-GCM encryption failed");
  }
  return out;
}

std::string Open(const SealedAnswer& sealed, const UserKey& key) {
  std::string plain(sealed.ciphertext.size(), '\0');
  auto* dst = reinterpret_cast<unsigned char*>(plain.data());
  auto ctx = NewCtx();
  int len = 0;
  Tag tag = sealed.tag;
  bool ok =
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN,
                          static_cast<int>(sealed.nonce.size()), nullptr) == 1 &&
      EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), sealed.nonce.data()) == 1 &&
      EVP_DecryptUpdate(ctx.get(), dst, &len, sealed.ciphertext.data(),
                        static_cast<int>(sealed.ciphertext.size())) == 1 &&
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(tag.size()),
                          tag.data()) == 1 &&
      EVP_DecryptFinal_ex(ctx.get(), dst + len, &len) == 1;
  if (!ok) {
    std::fill(plain.begin(), plain.end(), '\0');
    throw AuthError("answer failed authentication (wrong key or modified data)");
  }
  return plain;
}

std::string Base64Encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> Base64Decode(std::string_view text) {
  std::string clean;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  }
  if (clean.size() % 4 != 0) throw ParseError("base64 length is not a multiple of 4", 0);
  for (char c : clean) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '/' && c != '=') {
      throw ParseError("invalid base64 character", 0);
    }
  }
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw ParseError("invalid base64", 0);
  std::size_t size = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the zero bytes standing in for padding.
  if (!clean.empty() && clean.back() == '=') --size;
  if (clean.size() >= 2 && clean[clean.size() - 2] == '=') --size;
  out.resize(size);
  return out;
}

}  // namespace fedmdl
