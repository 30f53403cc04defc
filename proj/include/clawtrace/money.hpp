#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace clawtrace {

// Exact USD amounts held as integer picodollars (1e-12 USD). Sums are
// associative and reproducible across platforms; per-million-token rates
// with up to six decimal digits convert to an exact per-token pico rate.
class Money {
 public:
  static constexpr int64_t kPicoPerUsd = 1'000'000'000'000LL;
  static constexpr int64_t kPicoPerMicro = 1'000'000LL;

  constexpr Money() = default;

  static constexpr Money from_pico(int64_t pico) { return Money(pico); }
  static constexpr Money from_micro(int64_t micro) {
    return Money(micro * kPicoPerMicro);
  }
  // Parses a plain decimal like "2.00", "0.057985" or "-0.5".
  // Throws ConfigError on malformed input or more than 12 fraction digits.
  static Money parse(std::string_view text);

  constexpr int64_t pico() const { return pico_; }
  double usd() const { return static_cast<double>(pico_) / kPicoPerUsd; }

  // Minimal decimal rendering preserving the exact value: "0.068", "2.0".
  std::string to_string() const;
  // Fixed six fraction digits, rounding half away from zero: "0.068000".
  std::string to_fixed6() const;

  // Exact per-token rate from a per-million-token rate. Throws ConfigError
  // when the rate is finer than 1e-6 USD per million tokens.
  int64_t pico_per_token_from_per_million() const;

  constexpr Money operator+(Money o) const { return Money(pico_ + o.pico_); }
  constexpr Money operator-(Money o) const { return Money(pico_ - o.pico_); }
  constexpr Money& operator+=(Money o) {
    pico_ += o.pico_;
    return *this;
  }
  constexpr Money operator*(int64_t k) const { return Money(pico_ * k); }
  constexpr auto operator<=>(const Money&) const = default;

 private:
  constexpr explicit Money(int64_t pico) : pico_(pico) {}
  int64_t pico_ = 0;
};

// rate_pico_per_token * tokens with overflow checking.
Money token_cost(int64_t rate_pico_per_token, int64_t tokens);

}  // namespace clawtrace
