#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cec {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

std::string sha256_file(const std::filesystem::path& path);

/// 64-bit FNV-1a; only used for seeding, never as a content digest.
std::uint64_t fnv1a64(std::string_view data);

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform integer in [0, bound) by rejection. std::uniform_int_distribution
/// is implementation-defined, so it is avoided wherever results are persisted.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Fisher-Yates over `values`, portable across standard libraries.
template <typename T>
void portable_shuffle(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace cec
