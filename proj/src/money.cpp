#include "clawtrace/money.hpp"

#include <cctype>
#include <cstdlib>

#include "clawtrace/errors.hpp"

namespace clawtrace {

Money Money::parse(std::string_view text) {
  if (text.empty()) throw ConfigError("empty money literal");
  size_t i = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  int64_t whole = 0;
  size_t digits = 0;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]));
       ++i, ++digits) {
    whole = whole * 10 + (text[i] - '0');
    if (whole > 9'000'000) throw ConfigError("money literal out of range");
  }
  if (digits == 0) throw ConfigError("malformed money literal: " + std::string(text));
  int64_t frac = 0;
  size_t frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]));
         ++i) {
      if (++frac_digits > 12)
        throw ConfigError("money literal finer than 1e-12: " + std::string(text));
      frac = frac * 10 + (text[i] - '0');
    }
    if (frac_digits == 0)
      throw ConfigError("malformed money literal: " + std::string(text));
  }
  if (i != text.size())
    throw ConfigError("malformed money literal: " + std::string(text));
  for (size_t d = frac_digits; d < 12; ++d) frac *= 10;
  int64_t pico = whole * kPicoPerUsd + frac;
  return Money(negative ? -pico : pico);
}

std::string Money::to_string() const {
  int64_t v = pico_;
  std::string sign;
  if (v < 0) {
    sign = "-";
    v = -v;
  }
  int64_t whole = v / kPicoPerUsd;
  int64_t frac = v % kPicoPerUsd;
  char buf[13];
  std::snprintf(buf, sizeof(buf), "%012lld", static_cast<long long>(frac));
  std::string frac_str(buf);
  while (frac_str.size() > 1 && frac_str.back() == '0') frac_str.pop_back();
  return sign + std::to_string(whole) + "." + frac_str;
}

std::string Money::to_fixed6() const {
  int64_t v = pico_;
  std::string sign;
  if (v < 0) {
    sign = "-";
    v = -v;
  }
  // round half away from zero at the micro boundary
  int64_t micro = (v + kPicoPerMicro / 2) / kPicoPerMicro;
  int64_t whole = micro / 1'000'000;
  int64_t frac = micro % 1'000'000;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%06lld", static_cast<long long>(frac));
  return sign + std::to_string(whole) + "." + buf;
}

int64_t Money::pico_per_token_from_per_million() const {
  if (pico_ % kPicoPerMicro != 0)
    throw ConfigError("pricing rate finer than 1e-6 USD per million tokens");
  return pico_ / kPicoPerMicro;
}

Money token_cost(int64_t rate_pico_per_token, int64_t tokens) {
  __int128 wide = static_cast<__int128>(rate_pico_per_token) * tokens;
  if (wide > INT64_MAX || wide < INT64_MIN)
    throw ConfigError("token cost overflows exact money range");
  return Money::from_pico(static_cast<int64_t>(wide));
}

}  // namespace clawtrace
