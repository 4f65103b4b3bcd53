// util.h -- small shared helpers: tokenization, UTF-8, RNG, formatting.
#ifndef PREMT_UTIL_H
#define PREMT_UTIL_H

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace premt {

// Split on runs of ASCII whitespace; never returns empty tokens.
std::vector<std::string> split_tokens(const std::string& line);

std::string join_tokens(const std::vector<std::string>& tokens,
                        const std::string& sep = " ");

// Splits a UTF-8 string into code points. Throws std::runtime_error on
// malformed byte sequences.
std::vector<std::string> utf8_codepoints(const std::string& s);

bool is_valid_utf8(const std::string& s);

// Fixed-width decimal rendering so that repeated runs emit identical bytes.
std::string fmt_double(double x, int precision = 6);

// Exact textual round trip for doubles (hexfloat).
std::string fmt_double_exact(double x);
double parse_double_exact(const std::string& s);

// Deterministic 64-bit generator (xoshiro-style splitmix init over
// std::mt19937_64 would do, but we keep the distribution code our own so
// results do not depend on the standard library implementation).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double next_double();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::size_t next_index(std::size_t n);
  // Standard normal via Box-Muller.
  double normal();

  // Derive an independent stream (for per-stage seeding).
  Rng fork(std::uint64_t salt) const;

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

template <typename T>
void shuffle_indices(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.next_index(i);
    std::swap(v[i - 1], v[j]);
  }
}

// Reads a whole file, throwing with the path on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Splits file content into lines; a single trailing newline does not
// produce an extra empty line.
std::vector<std::string> split_lines(const std::string& content);

}  // namespace premt

#endif  // PREMT_UTIL_H
