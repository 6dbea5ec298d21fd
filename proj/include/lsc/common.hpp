#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lsc {

// Error taxonomy, mapped to CLI exit codes in tools/.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or unusable input data (exit code 3).
struct DataError : Error {
  using Error::Error;
};

// Non-finite values or other numeric breakdown (exit code 4).
struct NumericError : Error {
  using Error::Error;
};

// Shape mismatch between tensors; a configuration problem in practice.
struct DimensionError : ConfigError {
  using ConfigError::ConfigError;
};

// Target sequence cannot be aligned to the available time steps.
struct InfeasibleTargetError : DataError {
  using DataError::DataError;
};

std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Deterministic RNG with hand-rolled distributions so that results do not
// depend on the standard library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream keyed by (seed, label, index).
  static Rng derive(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

  std::uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  int uniform_int(int lo, int hi);         // inclusive on both ends
  double normal();                         // standard normal, Box-Muller
  std::uint64_t state_word() const { return s_; }

 private:
  std::uint64_t s_;
};

std::string format_double(double v);  // %.17g, round-trip exact

}  // namespace lsc
