#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace bbmlab {

/**
 * Exact dyadic rational num * 2^-exp, kept normalized (odd numerator or zero).
 * Arithmetic throws std::overflow_error instead of rounding.
 */
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(std::int64_t num, int exp);

    static Dyadic integer(std::int64_t n) { return Dyadic(n, 0); }
    /// 2^e for any integer e.
    static Dyadic pow2(int e);

    std::int64_t numerator() const { return num_; }
    int exponent() const { return exp_; }
    double to_double() const;
    std::string str() const;
    bool is_zero() const { return num_ == 0; }

    /// this * 2^e.
    Dyadic scaled(int e) const;

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
    Dyadic operator-() const { return Dyadic(-num_, exp_); }
    Dyadic& operator+=(const Dyadic& b) { return *this = *this + b; }
    Dyadic& operator-=(const Dyadic& b) { return *this = *this - b; }

    friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.num_ == b.num_ && a.exp_ == b.exp_; }
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

private:
    std::int64_t num_ = 0;
    int exp_ = 0;
};

Dyadic abs(const Dyadic& a);

}  // namespace bbmlab
