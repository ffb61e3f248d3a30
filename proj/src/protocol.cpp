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
#include "fedmdl/protocol.h"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <numeric>
#include <set>

#include "fedmdl/error.h"

namespace fedmdl {
namespace {

// Fisher-Yates with our own index draw so the order does not depend on the
// standard library's shuffle.
void Shuffle(std::vector<std::uint64_t>& v, std::uint64_t seed) {
  std::uint64_t state = seed;
  for (std::size_t i = v.size(); i > 1; --i) {
    state = Mix64(state + 0x9e3779b97f4a7c15ULL);
    std::swap(v[i - 1], v[state % i]);
  }
}

std::uint64_t HopSeed(std::uint64_t seed, std::size_t round, std::size_t position) {
  return Mix64(seed ^ Mix64(round * 0x100000001b3ULL + position + 1));
}

}  // namespace

std::uint64_t MulMod(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 x = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(x) & kGroupPrime;
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  if (r >= kGroupPrime) r -= kGroupPrime;
  return r;
}

std::uint64_t PowMod(std::uint64_t base, std::uint64_t exponent) {
  std::uint64_t result = 1;
  base %= kGroupPrime;
  while (exponent) {
    if (exponent & 1) result = MulMod(result, base);
    base = MulMod(base, base);
    exponent >>= 1;
  }
  return result;
}

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

PartyKey DerivePartyKey(PartyId party, std::uint64_t seed) {
  std::uint64_t state = Mix64(seed ^ (0xa0761d6478bd642fULL * (party.value + 1)));
  while (true) {
    std::uint64_t e = state % (kGroupPrime - 1);
    if (e > 1 && std::gcd(e, kGroupPrime - 1) == 1) return {party, e};
    state = Mix64(state);
  }
}

std::uint64_t HashToGroup(std::uint64_t element, const SessionParams& session) {
  const std::uint64_t domain =
      std::clamp<std::uint64_t>(session.hash_domain, 1, kGroupPrime - 1);
  return 1 + Mix64(element ^ Mix64(session.salt)) % domain;
}

MaskedSet MaskSet(std::span<const std::uint64_t> elements, const PartyKey& key,
                  const SessionParams& session, std::uint64_t rng_seed,
                  std::size_t origin_position) {
  MaskedSet out;
  out.origin_position = origin_position;
  out.tokens.reserve(elements.size());
  for (std::uint64_t e : elements) {
    out.tokens.push_back(PowMod(HashToGroup(e, session), key.exponent));
  }
  Shuffle(out.tokens, rng_seed);
  out.keys_applied = 1;
  out.permuted = true;
  return out;
}

MaskedSet Remask(const MaskedSet& in, const PartyKey& key, std::uint64_t rng_seed) {
  MaskedSet out = in;
  for (auto& t : out.tokens) t = PowMod(t, key.exponent);
  Shuffle(out.tokens, rng_seed);
  ++out.keys_applied;
  out.permuted = true;
  return out;
}

std::string ProtocolTranscript::ToLog() const {
  std::string out;
  char hex[17];
  for (const auto& m : messages) {
    out += "round=" + std::to_string(m.round) + " from=" +
           std::to_string(m.from.value) + " to=" + std::to_string(m.to.value) +
           " tokens=";
    for (std::size_t i = 0; i < m.tokens.size(); ++i) {
      if (i) out += ',';
      std::snprintf(hex, sizeof hex, "%016llx",
                    static_cast<unsigned long long>(m.tokens[i]));
      out += hex;
    }
    out += '\n';
  }
  out += "count=" + std::to_string(count) + " collisions=" +
         std::to_string(collisions) + " accepted=" + (accepted ? "true" : "false") +
         "\n";
  return out;
}

std::uint64_t ProtocolTranscript::TokenBytes() const {
  std::uint64_t total = 0;
  for (const auto& m : messages) total += m.tokens.size() * sizeof(std::uint64_t);
  return total;
}

ProtocolTranscript RingIntersectionCount(std::vector<PartySet> sets,
                                         std::uint64_t seed,
                                         const ProtocolOptions& options) {
  if (sets.size() < 2) throw InvalidArgument("ring needs at least two parties");
  std::sort(sets.begin(), sets.end(),
            [](const PartySet& a, const PartySet& b) { return a.party < b.party; });
  for (std::size_t i = 1; i < sets.size(); ++i) {
    if (sets[i].party == sets[i - 1].party) {
      throw InvalidArgument("party " + std::to_string(sets[i].party.value) +
                            " appears twice in the ring");
    }
  }
  const std::size_t n = sets.size();
  auto left = [n](std::size_t pos) { return (pos + 1) % n; };

  const SessionParams session{Mix64(seed ^ 0x5e55104e5a17ULL), options.hash_domain};
  std::vector<PartyKey> keys;
  for (const auto& s : sets) keys.push_back(DerivePartyKey(s.party, seed));

  ProtocolTranscript transcript;

  // Masking phase: after round r every in-flight set carries r + 1 keys.
  std::vector<MaskedSet> held(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    held[pos] = MaskSet(sets[pos].elements, keys[pos], session,
                        HopSeed(seed, 0, pos), pos);
  }
  std::size_t round = 0;
  for (; round + 1 < n; ++round) {
    std::vector<MaskedSet> received(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
      transcript.messages.push_back(
          {round, sets[pos].party, sets[left(pos)].party, held[pos].tokens});
      received[left(pos)] = std::move(held[pos]);
    }
    for (std::size_t pos = 0; pos < n; ++pos) {
      held[pos] = Remask(received[pos], keys[pos], HopSeed(seed, round + 1, pos));
    }
  }

  // Intersection phase: the remaining tokens walk the ring once.
  std::vector<std::uint64_t> remaining = held[0].tokens;
  std::sort(remaining.begin(), remaining.end());
  for (std::size_t pos = 0; pos + 1 < n; ++pos, ++round) {
    transcript.messages.push_back(
        {round, sets[pos].party, sets[left(pos)].party, remaining});
    std::vector<std::uint64_t> own = held[left(pos)].tokens;
    std::sort(own.begin(), own.end());
    std::vector<std::uint64_t> next;
    std::set_intersection(remaining.begin(), remaining.end(), own.begin(),
                          own.end(), std::back_inserter(next));
    remaining = std::move(next);
  }
  transcript.count = remaining.size();

  // Simulation-side audit: fully mask the plaintext union directly.
  std::set<std::uint64_t> universe;
  for (const auto& s : sets) universe.insert(s.elements.begin(), s.elements.end());
  std::set<std::uint64_t> tokens;
  for (std::uint64_t e : universe) {
    std::uint64_t t = HashToGroup(e, session);
    for (const auto& k : keys) t = PowMod(t, k.exponent);
    tokens.insert(t);
  }
  transcript.total_tokens = universe.size();
  transcript.collisions = universe.size() - tokens.size();
  transcript.accepted = CollisionCheck(transcript, options.tau);
  return transcript;
}

bool CollisionCheck(const ProtocolTranscript& transcript, double tau) {
  if (transcript.total_tokens == 0) return transcript.collisions == 0;
  return static_cast<double>(transcript.collisions) /
             static_cast<double>(transcript.total_tokens) <=
         tau;
}

}  // namespace fedmdl
