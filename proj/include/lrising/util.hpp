#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lrising {

uint64_t splitmix64(uint64_t x);

uint64_t fnv1a(const void* data, size_t len);
uint64_t fnv1a(const std::string& s);

/// Child seed for a named substream; stable across runs and platforms.
uint64_t derive_seed(uint64_t base, const std::string& tag, uint64_t index);

/// Round-trip decimal form of a double ("%.17g"), used for all CSV output.
std::string format_double(double v);

std::string join_csv_row(const std::vector<std::string>& cells);

}  // namespace lrising
