#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pihc {

enum class Dir : std::uint8_t { Forward = 0, Backward = 1 };

inline Dir flip(Dir d) { return d == Dir::Forward ? Dir::Backward : Dir::Forward; }

// Cyclic arrow pattern; index arithmetic wraps mod length.
struct Pattern {
  std::vector<Dir> dirs;

  static constexpr std::size_t max_length = 64;

  std::size_t length() const { return dirs.size(); }
  Dir at(std::size_t i) const { return dirs[i % dirs.size()]; }
  bool operator==(const Pattern&) const = default;
};

struct PatternParseError : std::invalid_argument {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t position;  // offending glyph; npos when the input was empty

  PatternParseError(const std::string& what, std::size_t pos)
      : std::invalid_argument(what), position(pos) {}
};

// Text form: '>' forward, '<' backward, e.g. ">><".
Pattern parse_pattern(std::string_view text);
std::string to_string(const Pattern& p);

// Lexicographic minimum over all rotations and reflections, with forward
// sorting before backward. A reflection reverses the order and flips every
// arrow (traversing the cycle the other way).
Pattern canonical_form(const Pattern& p);

bool are_equivalent(const Pattern& a, const Pattern& b);

// No proper divisor d of the length repeats the prefix of length d.
bool is_primitive(const Pattern& p);

enum class PatternClass { Trivial, Alternating, NonAlternating, NonPrimitive };

PatternClass classify(const Pattern& p);

const char* to_string(PatternClass c);

// True iff p.length() divides orientations.size() and
// orientations[i] == p.dirs[i mod k] for all i (zero-offset alignment).
bool follows(std::span<const Dir> orientations, const Pattern& p);

}  // namespace pihc
