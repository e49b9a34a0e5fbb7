#include "qp/rational.hpp"

#include <cctype>
#include <cmath>

#include "qp/error.hpp"

namespace qp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::RankDeficientInput: return "RankDeficientInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateQuasimonomial: return "DuplicateQuasimonomial";
    case ErrorCode::NonPositiveState: return "NonPositiveState";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NotSameClass: return "NotSameClass";
    case ErrorCode::NotNonRedundant: return "NotNonRedundant";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::OrbitEscaped: return "OrbitEscaped";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

[[noreturn]] void bad(std::string_view text, const char* why) {
  throw Error(ErrorCode::ParseError,
              "invalid rational \"" + std::string(text) + "\": " + why);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }

  Rational result;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) bad(text, "expected p/q");
    mpz_class d(std::string(den), 10);
    if (d == 0) bad(text, "zero denominator");
    result = Rational(mpz_class(std::string(num), 10), d);
    result.canonicalize();
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto whole = body.substr(0, dot);
    auto frac = body.substr(dot + 1);
    if ((whole.empty() && frac.empty()) ||
        (!whole.empty() && !all_digits(whole)) ||
        (!frac.empty() && !all_digits(frac)))
      bad(text, "expected decimal digits");
    std::string digits = std::string(whole) + std::string(frac);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    result = Rational(mpz_class(digits, 10), scale);
    result.canonicalize();
  } else {
    if (!all_digits(body)) bad(text, "expected integer");
    result = Rational(mpz_class(std::string(body), 10));
  }
  return negative ? Rational(-result) : result;
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value))
    throw Error(ErrorCode::Internal, "cannot represent non-finite value exactly");
  return Rational(value);
}

std::string to_string(const Rational& value) {
  Rational v = value;
  v.canonicalize();
  return v.get_str();
}

double to_double(const Rational& value) {
  Rational v = value;
  v.canonicalize();
  const double t = v.get_d();
  if (!std::isfinite(t)) return t;
  const double away = std::nextafter(t, v < 0 ? -HUGE_VAL : HUGE_VAL);
  if (!std::isfinite(away)) return t;
  const Rational below = abs(v - Rational(t));
  const Rational above = abs(Rational(away) - v);
  if (below < above) return t;
  if (above < below) return away;
  // Tie: the candidate with an even last mantissa bit.
  int exp = 0;
  const auto mantissa = static_cast<long long>(std::ldexp(std::frexp(t, &exp), 53));
  return mantissa % 2 == 0 ? t : away;
}

std::vector<double> to_doubles(const RationalVector& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(to_double(v));
  return out;
}

}  // namespace qp
