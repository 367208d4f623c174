#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace spatialkit {

/// 128-bit intermediate for exact products of areas and ratio terms.
__extension__ typedef __int128 WideInt;

/// Exact non-negative decimal ratio, e.g. a threshold written as "0.2" is
/// held as 2/10 so that comparisons against integer areas never round.
class Fraction {
 public:
  constexpr Fraction() = default;
  Fraction(std::int64_t num, std::int64_t den);

  /// Parses a plain decimal ("0.3", "2", "2.50", "1e-1").
  static Fraction parse(std::string_view text);
  /// Shortest round-trip decimal of `value`, then parse(); 0.2 becomes 2/10.
  static Fraction from_double(double value);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  // Is q_num / q_den strictly above (below) this ratio? q_den > 0.
  bool ratio_above(WideInt q_num, WideInt q_den) const { return q_num * den_ > num_ * q_den; }
  bool ratio_below(WideInt q_num, WideInt q_den) const { return q_num * den_ < num_ * q_den; }

  friend bool operator==(const Fraction& a, const Fraction& b) {
    return static_cast<WideInt>(a.num_) * b.den_ == static_cast<WideInt>(b.num_) * a.den_;
  }
  friend bool operator<(const Fraction& a, const Fraction& b) {
    return static_cast<WideInt>(a.num_) * b.den_ < static_cast<WideInt>(b.num_) * a.den_;
  }
  friend bool operator>(const Fraction& a, const Fraction& b) { return b < a; }
  friend bool operator<=(const Fraction& a, const Fraction& b) { return !(b < a); }
  friend bool operator>=(const Fraction& a, const Fraction& b) { return !(a < b); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace spatialkit
