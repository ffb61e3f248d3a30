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
#ifndef FEDMDL_ANSWER_CRYPTO_H_
#define FEDMDL_ANSWER_CRYPTO_H_

// Authenticated envelope for query answers: AES-256-GCM, wire layout
// nonce(12) || tag(16) || ciphertext, base64 in text transports.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fedmdl {

using UserKey = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, 12>;
using Tag = std::array<std::uint8_t, 16>;

UserKey KeyFromSeed(std::uint64_t seed);
std::string FormatKey(const UserKey& key);  // 64 hex chars
UserKey ParseKey(std::string_view text);    // surrounding whitespace ignored
UserKey LoadKeyFile(const std::string& path);

// Deterministic per-answer nonce. The plaintext digest takes part, so two
// different answers never share a nonce under one seed.
Nonce DeriveNonce(std::uint64_t seed, std::string_view plaintext);

struct SealedAnswer {
  Nonce nonce{};
  Tag tag{};
  std::vector<std::uint8_t> ciphertext;

  std::vector<std::uint8_t> ToWire() const;
  static SealedAnswer FromWire(const std::vector<std::uint8_t>& wire);  // AuthError if short
  std::string ToBase64() const;
  static SealedAnswer FromBase64(std::string_view text);  // AuthError if malformed
};

SealedAnswer Seal(std::string_view plaintext, const UserKey& key, const Nonce& nonce);
// Throws AuthError on a wrong key or any modification; no plaintext is
// returned in that case.
std::string Open(const SealedAnswer& sealed, const UserKey& key);

std::string Base64Encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> Base64Decode(std::string_view text);  // ParseError if malformed

}  // namespace fedmdl

#endif  // FEDMDL_ANSWER_CRYPTO_H_
