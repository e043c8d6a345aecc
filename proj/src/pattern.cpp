#include "pihc/pattern.hpp"

#include <cassert>

namespace pihc {

Pattern parse_pattern(std::string_view text) {
  if (text.empty()) throw PatternParseError("empty pattern", PatternParseError::npos);
  if (text.size() > Pattern::max_length)
    throw PatternParseError("pattern longer than 64 arrows", Pattern::max_length);
  Pattern p;
  p.dirs.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    switch (text[i]) {
      case '>': p.dirs.push_back(Dir::Forward); break;
      case '<': p.dirs.push_back(Dir::Backward); break;
      default:
        throw PatternParseError("bad glyph '" + std::string(1, text[i]) + "' at position " +
                                    std::to_string(i),
                                i);
    }
  }
  return p;
}

std::string to_string(const Pattern& p) {
  std::string s;
  s.reserve(p.length());
  for (Dir d : p.dirs) s.push_back(d == Dir::Forward ? '>' : '<');
  return s;
}

Pattern canonical_form(const Pattern& p) {
  const std::size_t k = p.length();
  assert(k >= 1);
  std::vector<Dir> reflected(p.dirs.rbegin(), p.dirs.rend());
  for (Dir& d : reflected) d = flip(d);

  std::vector<Dir> best;
  std::vector<Dir> cand(k);
  auto consider = [&](const std::vector<Dir>& base, std::size_t r) {
    for (std::size_t i = 0; i < k; ++i) cand[i] = base[(i + r) % k];
    if (best.empty() || cand < best) best = cand;
  };
  for (std::size_t r = 0; r < k; ++r) {
    consider(p.dirs, r);
    consider(reflected, r);
  }
  return Pattern{std::move(best)};
}

bool are_equivalent(const Pattern& a, const Pattern& b) {
  return canonical_form(a) == canonical_form(b);
}

bool is_primitive(const Pattern& p) {
  const std::size_t k = p.length();
  for (std::size_t d = 1; d < k; ++d) {
    if (k % d != 0) continue;
    bool periodic = true;
    for (std::size_t i = d; i < k && periodic; ++i) periodic = p.dirs[i] == p.dirs[i - d];
    if (periodic) return false;
  }
  return true;
}

PatternClass classify(const Pattern& p) {
  if (p.length() == 1) return PatternClass::Trivial;
  if (!is_primitive(p)) return PatternClass::NonPrimitive;
  return p.length() == 2 ? PatternClass::Alternating : PatternClass::NonAlternating;
}

const char* to_string(PatternClass c) {
  switch (c) {
    case PatternClass::Trivial: return "trivial";
    case PatternClass::Alternating: return "alternating";
    case PatternClass::NonAlternating: return "non-alternating";
    case PatternClass::NonPrimitive: return "non-primitive";
  }
  return "?";
}

bool follows(std::span<const Dir> orientations, const Pattern& p) {
  const std::size_t n = orientations.size();
  const std::size_t k = p.length();
  if (n == 0 || n % k != 0) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (orientations[i] != p.dirs[i % k]) return false;
  return true;
}

}  // namespace pihc
