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
#ifndef FEDMDL_DIGEST_H_
#define FEDMDL_DIGEST_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace fedmdl {

using Digest = std::array<std::uint8_t, 32>;

Digest Sha256(std::string_view data);

std::string ToHex(std::span<const std::uint8_t> bytes);
// Lowercase or uppercase hex of exactly 2 * N digits.
std::optional<Digest> DigestFromHex(std::string_view hex);

}  // namespace fedmdl

#endif  // FEDMDL_DIGEST_H_
