#include "scaffold/answer.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <stdexcept>

namespace scaffold {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Index of the '}' matching the '{' at `open`, or npos.
std::size_t matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    if (s[i] == '}') {
      --depth;
      if (depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  bool consume(std::string_view token) {
    if (s.substr(pos, token.size()) == token) {
      pos += token.size();
      return true;
    }
    return false;
  }
};

// Leading '+'/'-' run; returns the combined sign.
int parse_sign(Cursor& c) {
  int sign = 1;
  while (!c.done() && (c.peek() == '+' || c.peek() == '-')) {
    if (c.peek() == '-') sign = -sign;
    ++c.pos;
  }
  return sign;
}

std::optional<BigInt> parse_digits(Cursor& c) {
  std::size_t start = c.pos;
  while (!c.done() && is_digit(c.peek())) ++c.pos;
  if (c.pos == start) return std::nullopt;
  std::string digits(c.s.substr(start, c.pos - start));
  // cpp_int's string constructor reads a leading zero as an octal prefix;
  // digit runs here are always decimal, so strip the zeros up front.
  std::size_t nonzero = digits.find_first_not_of('0');
  if (nonzero == std::string::npos) return BigInt(0);
  return BigInt(digits.substr(nonzero));
}

struct Rational {
  BigInt num;
  BigInt den;  // > 0
  bool from_decimal = false;
};

void reduce(Rational& r) {
  if (r.den < 0) {
    r.num = -r.num;
    r.den = -r.den;
  }
  BigInt g = boost::multiprecision::gcd(r.num < 0 ? BigInt(-r.num) : r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  if (r.num == 0) r.den = 1;
}

// {A}{B} with optionally signed integer contents; nullopt on anything else.
std::optional<Rational> parse_frac_args(Cursor& c) {
  auto arg = [&c]() -> std::optional<BigInt> {
    if (c.done() || c.peek() != '{') return std::nullopt;
    ++c.pos;
    int sign = parse_sign(c);
    auto digits = parse_digits(c);
    if (!digits || c.done() || c.peek() != '}') return std::nullopt;
    ++c.pos;
    return sign * *digits;
  };
  auto a = arg();
  if (!a) return std::nullopt;
  auto b = arg();
  if (!b || *b == 0) return std::nullopt;
  return Rational{*a, *b};
}

// Number forms: 123, 12.5, .5, 5., 3/4. Signs inside the fraction tail are
// accepted so "-4/-8" reduces like the \frac form.
std::optional<Rational> parse_number(Cursor& c) {
  auto ipart = parse_digits(c);
  if (!c.done() && c.peek() == '.') {
    ++c.pos;
    std::size_t fstart = c.pos;
    auto fpart = parse_digits(c);
    if (!ipart && !fpart) return std::nullopt;
    std::size_t fdigits = c.pos - fstart;
    BigInt scale = 1;
    for (std::size_t i = 0; i < fdigits; ++i) scale *= 10;
    BigInt num = (ipart ? *ipart : BigInt(0)) * scale + (fpart ? *fpart : BigInt(0));
    return Rational{num, scale, true};
  }
  if (!ipart) return std::nullopt;
  if (!c.done() && c.peek() == '/') {
    ++c.pos;
    int dsign = parse_sign(c);
    auto den = parse_digits(c);
    if (!den || *den == 0) return std::nullopt;
    return Rational{*ipart, dsign * *den};
  }
  return Rational{*ipart, 1};
}

std::optional<Rational> parse_numeric(std::string_view text) {
  Cursor c{text};
  int sign = parse_sign(c);
  std::optional<Rational> r;
  if (c.consume("\\frac") || c.consume("\\dfrac") || c.consume("\\tfrac")) {
    r = parse_frac_args(c);
  } else {
    r = parse_number(c);
  }
  if (!r || !c.done()) return std::nullopt;
  r->num *= sign;
  reduce(*r);
  return r;
}

// Canonical decimal string for num/den where den divides a power of ten.
std::string render_decimal(const BigInt& num, const BigInt& den) {
  BigInt n = num < 0 ? BigInt(-num) : num;
  BigInt whole = n / den;
  BigInt rem = n % den;
  std::string out = (num < 0 && n != 0) ? "-" : "";
  out += whole.str();
  if (rem != 0) {
    std::string frac;
    BigInt r = rem;
    while (r != 0) {
      r *= 10;
      frac += static_cast<char>('0' + static_cast<int>(r / den));
      r %= den;
    }
    out += "." + frac;
  }
  return out;
}

}  // namespace

std::string render_rational(const BigInt& numerator, const BigInt& denominator) {
  if (denominator == 0) throw std::invalid_argument("render_rational: zero denominator");
  Rational r{numerator, denominator};
  if (r.den < 0) {
    r.num = -r.num;
    r.den = -r.den;
  }
  reduce(r);
  if (r.den == 1) return r.num.str();
  BigInt d = r.den;
  while (d % 2 == 0) d /= 2;
  while (d % 5 == 0) d /= 5;
  if (d == 1) return render_decimal(r.num, r.den);
  return r.num.str() + "/" + r.den.str();
}

std::optional<std::string> extract_boxed(std::string_view completion) {
  const std::string_view marker = "\\boxed{";
  std::size_t at = completion.rfind(marker);
  if (at == std::string_view::npos) return std::nullopt;
  std::size_t open = at + marker.size() - 1;
  std::size_t close = matching_brace(completion, open);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(completion.substr(open + 1, close - open - 1));
}

std::string normalize_symbolic(std::string_view s) {
  std::string t(s);
  for (std::string_view token : {"\\left", "\\right", "\\,"}) {
    std::size_t at;
    while ((at = t.find(token)) != std::string::npos) t.erase(at, token.size());
  }
  t.erase(std::remove_if(t.begin(), t.end(),
                         [](unsigned char c) { return std::isspace(c); }),
          t.end());
  // Strip outer brace pairs that span the whole string.
  while (t.size() >= 2 && t.front() == '{' &&
         matching_brace(t, 0) == t.size() - 1) {
    t = t.substr(1, t.size() - 2);
  }
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return t;
}

CanonicalAnswer canonicalize(std::string_view answer) {
  CanonicalAnswer out;
  out.raw = std::string(answer);
  std::string_view text = trim(answer);
  if (auto r = parse_numeric(text)) {
    out.numerator = r->num;
    out.denominator = r->den;
    if (r->from_decimal) {
      out.kind = AnswerKind::Decimal;
      out.decimal_value = render_decimal(r->num, r->den);
    } else {
      out.kind = r->den == 1 ? AnswerKind::Integer : AnswerKind::Rational;
    }
    return out;
  }
  out.kind = AnswerKind::SymbolicText;
  out.normalized = normalize_symbolic(text);
  return out;
}

bool equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b) {
  if (a.numeric() && b.numeric()) {
    return a.numerator * b.denominator == b.numerator * a.denominator;
  }
  if (!a.numeric() && !b.numeric()) {
    return a.normalized == b.normalized;
  }
  return false;
}

bool equivalent(std::string_view a, std::string_view b) {
  return equivalent(canonicalize(a), canonicalize(b));
}

}  // namespace scaffold
