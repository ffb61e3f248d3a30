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
#ifndef FEDMDL_PROTOCOL_H_
#define FEDMDL_PROTOCOL_H_

// Ring protocol for intersection cardinality across parties.
//
// Every party's set is masked by every party's key: elements are hashed into
// the multiplicative group modulo the Mersenne prime 2^61 - 1 and each key is
// an exponent coprime to p - 1, so masking is a permutation of the group and
// masks commute, (h^a)^b == (h^b)^a. Each hop re-masks and shuffles the
// tokens, so positions carry no information. Once a set carries all keys it
// is compared token-for-token; the intersection travels the ring shrinking at
// every party, and its final size is the answer.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedmdl/fragment.h"

namespace fedmdl {

inline constexpr std::uint64_t kGroupPrime = (std::uint64_t{1} << 61) - 1;

std::uint64_t MulMod(std::uint64_t a, std::uint64_t b);
std::uint64_t PowMod(std::uint64_t base, std::uint64_t exponent);

// Deterministic 64-bit mixer (splitmix64 finaliser).
std::uint64_t Mix64(std::uint64_t x);

struct PartyKey {
  PartyId party;
  std::uint64_t exponent = 1;  // coprime to kGroupPrime - 1, never sent
};

// Key derived from (seed, party); identical inputs give identical keys.
PartyKey DerivePartyKey(PartyId party, std::uint64_t seed);

// Public per-run parameters of the element-to-group hash.
struct SessionParams {
  std::uint64_t salt = 0;
  // Size of the hash image. Shrinking it forces collisions in tests.
  std::uint64_t hash_domain = kGroupPrime - 1;
};

std::uint64_t HashToGroup(std::uint64_t element, const SessionParams& session);

struct MaskedSet {
  std::vector<std::uint64_t> tokens;
  std::size_t origin_position = 0;  // ring position of the owning party
  std::size_t keys_applied = 0;
  bool permuted = false;
};

// Hash, mask under key, shuffle with rng_seed.
MaskedSet MaskSet(std::span<const std::uint64_t> elements, const PartyKey& key,
                  const SessionParams& session, std::uint64_t rng_seed,
                  std::size_t origin_position = 0);
// Add one more key to an already masked set, then reshuffle.
MaskedSet Remask(const MaskedSet& in, const PartyKey& key, std::uint64_t rng_seed);

struct ProtocolMessage {
  std::size_t round = 0;
  PartyId from;
  PartyId to;
  std::vector<std::uint64_t> tokens;
};

struct ProtocolTranscript {
  std::vector<ProtocolMessage> messages;
  std::uint64_t count = 0;
  // Audit fields filled by the simulation, which sees every plaintext:
  // distinct plaintext elements (over the union of all sets) whose fully
  // masked tokens coincide with another element's token.
  std::uint64_t collisions = 0;
  std::uint64_t total_tokens = 0;  // |union of all sets|
  bool accepted = false;

  // "round=<r> from=<p> to=<q> tokens=<hex,...>" per message, then
  // "count=<n> collisions=<c> accepted=<bool>".
  std::string ToLog() const;
  std::uint64_t TokenBytes() const;
};

struct PartySet {
  PartyId party;
  std::vector<std::uint64_t> elements;
};

struct ProtocolOptions {
  double tau = 0.01;
  std::uint64_t hash_domain = kGroupPrime - 1;
};

// Ring = parties in ascending id order, wrapping around; each party sends
// only to its left neighbour, the next position in the ring. Throws
// InvalidArgument for fewer than two parties or a repeated party id.
// The returned transcript has collision audit fields filled and accepted
// set per CollisionCheck(options.tau).
ProtocolTranscript RingIntersectionCount(std::vector<PartySet> sets,
                                         std::uint64_t seed,
                                         const ProtocolOptions& options = {});

// Accept iff collisions / total_tokens <= tau (an empty run is accepted).
bool CollisionCheck(const ProtocolTranscript& transcript, double tau);

}  // namespace fedmdl

#endif  // FEDMDL_PROTOCOL_H_
