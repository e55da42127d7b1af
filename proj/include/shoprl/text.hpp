#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace shoprl {

using Tokens = std::vector<std::string>;

/// 64-bit FNV-1a. Offset basis 0xcbf29ce484222325, prime 0x100000001b3.
/// Used wherever a hash must be stable across runs and platforms.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// Lowercases and splits on whitespace.
Tokens tokenize(std::string_view text);

std::string join(const Tokens& tokens, std::string_view sep = " ");

/// Fixed two-decimal rendering used for prices and budgets.
std::string format_price(double value);

/// Rounds to whole cents.
double round_cents(double value);

}  // namespace shoprl
