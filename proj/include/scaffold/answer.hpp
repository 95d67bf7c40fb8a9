#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace scaffold {

using BigInt = boost::multiprecision::cpp_int;

enum class AnswerKind { Integer, Rational, Decimal, SymbolicText };

// Canonical form of an answer string. Integers, finite decimals, \frac{a}{b}
// and a/b reduce to an exact rational; everything else degrades to normalized
// text compared by whitespace/brace-insensitive equality. Canonicalization is
// total: no input is rejected.
struct CanonicalAnswer {
  AnswerKind kind = AnswerKind::SymbolicText;
  BigInt numerator = 0;       // numeric kinds; fully reduced
  BigInt denominator = 1;     // numeric kinds; always > 0
  std::string decimal_value;  // Decimal kind: canonical decimal rendering
  std::string normalized;     // SymbolicText kind: comparison key
  std::string raw;

  bool numeric() const { return kind != AnswerKind::SymbolicText; }
};

// Contents of the last \boxed{...} with balanced braces, or nullopt if the
// completion has no \boxed or the last one never closes.
// Shortest faithful rendering of an exact rational: integer when whole,
// terminating decimal when the reduced denominator is 2^a * 5^b, else "p/q".
std::string render_rational(const BigInt& numerator, const BigInt& denominator);

std::optional<std::string> extract_boxed(std::string_view completion);

CanonicalAnswer canonicalize(std::string_view answer);

// Text normalization used for the symbolic fallback: drops \left, \right and
// \, tokens, removes whitespace, strips outer brace pairs, lowercases.
std::string normalize_symbolic(std::string_view s);

bool equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b);
bool equivalent(std::string_view a, std::string_view b);

}  // namespace scaffold
