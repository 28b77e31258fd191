#pragma once

// Sign + log-magnitude scalar arithmetic. Factorial ratios, determinant
// prefactors and series coefficients in this library span thousands of orders
// of magnitude; composing them as (sign, ln|value|) pairs keeps every
// intermediate representable. Multiplication is a sign product and a log sum;
// addition re-exponentiates after shifting by the larger magnitude.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace sfmax {

struct LogScaled {
    int sign = 0;          // -1, 0, +1;  sign == 0 <=> exact zero
    double log_mag = 0.0;  // ln|value|, ignored when sign == 0

    constexpr LogScaled() = default;
    constexpr LogScaled(int s, double lm) : sign(s), log_mag(s == 0 ? 0.0 : lm) {}

    static constexpr LogScaled zero() { return {}; }
    static constexpr LogScaled one() { return {1, 0.0}; }

    static LogScaled from_value(double v) {
        if (v == 0.0) return zero();
        return {v > 0 ? 1 : -1, std::log(std::fabs(v))};
    }

    // Round-trips exactly for finite representable values; overflows to
    // +-inf and underflows to (signed) 0 like ordinary doubles would.
    double value() const {
        if (sign == 0) return 0.0;
        return sign * std::exp(log_mag);
    }

    bool is_zero() const { return sign == 0; }

    LogScaled operator*(const LogScaled& o) const {
        if (sign == 0 || o.sign == 0) return zero();
        return {sign * o.sign, log_mag + o.log_mag};
    }
    LogScaled operator/(const LogScaled& o) const {
        // division by exact zero is a contract violation; surface it as inf
        if (sign == 0) return zero();
        if (o.sign == 0) return {sign, std::numeric_limits<double>::infinity()};
        return {sign * o.sign, log_mag - o.log_mag};
    }
    LogScaled operator-() const { return {-sign, log_mag}; }

    LogScaled operator+(const LogScaled& o) const {
        if (sign == 0) return o;
        if (o.sign == 0) return *this;
        // shift by the larger magnitude so the exponentials stay in [0, 1]
        const LogScaled& big = (log_mag >= o.log_mag) ? *this : o;
        const LogScaled& small = (log_mag >= o.log_mag) ? o : *this;
        long double s = static_cast<long double>(big.sign) +
                        static_cast<long double>(small.sign) *
                            std::exp(static_cast<long double>(small.log_mag - big.log_mag));
        if (s == 0.0L) return zero();
        return {s > 0 ? 1 : -1, big.log_mag + static_cast<double>(std::log(std::fabs(s)))};
    }
    LogScaled operator-(const LogScaled& o) const { return *this + (-o); }

    LogScaled& operator*=(const LogScaled& o) { return *this = *this * o; }
    LogScaled& operator/=(const LogScaled& o) { return *this = *this / o; }
    LogScaled& operator+=(const LogScaled& o) { return *this = *this + o; }
    LogScaled& operator-=(const LogScaled& o) { return *this = *this - o; }

    // |value| of this relative to other, as log10; used by cancellation monitors
    double log10_ratio(const LogScaled& o) const {
        constexpr double ln10 = 2.302585092994045684;
        return (log_mag - o.log_mag) / ln10;
    }
};

// natural log of n! for integer n >= 0, exact-table small range then lgamma
double log_factorial(long n);
// same in long double; term-log assembly uses this so that casting to the
// (sign, double) representation happens once, after accumulation
long double log_factorial_l(long n);

// ln Gamma(x) for positive real x (thin wrapper, long-double internally)
double log_gamma(double x);

// Signed compensated reduction of a term list. Terms are shifted by the
// largest magnitude and Kahan-summed in long double, which is the accuracy
// limit for alternating series here. cancellation_digits() reports
// log10(max term / |sum|), the monitor the evaluation strategies key off.
class SignedLogSum {
  public:
    void add(const LogScaled& t) { if (t.sign != 0) terms_.push_back(t); }
    std::size_t size() const { return terms_.size(); }

    LogScaled result() const;
    // log10(largest term magnitude / result magnitude); 0 when empty/zero-free
    double cancellation_digits() const;

  private:
    std::vector<LogScaled> terms_;
};

}  // namespace sfmax
