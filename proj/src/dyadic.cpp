#include "bbmlab/dyadic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bbmlab {

namespace {

using i128 = __int128;

Dyadic from_wide(i128 num, int exp) {
    if (num == 0) return Dyadic();
    while ((num & 1) == 0) {
        num /= 2;
        --exp;
    }
    if (num > std::numeric_limits<std::int64_t>::max() || num < std::numeric_limits<std::int64_t>::min())
        throw std::overflow_error("Dyadic: numerator overflow");
    return Dyadic(static_cast<std::int64_t>(num), exp);
}

// Brings both operands to the larger exponent.
void align(const Dyadic& a, const Dyadic& b, i128& na, i128& nb, int& exp) {
    exp = std::max(a.exponent(), b.exponent());
    const int sa = exp - a.exponent(), sb = exp - b.exponent();
    if (sa > 62 || sb > 62) throw std::overflow_error("Dyadic: exponent gap too large");
    na = static_cast<i128>(a.numerator()) << sa;
    nb = static_cast<i128>(b.numerator()) << sb;
}

}  // namespace

Dyadic::Dyadic(std::int64_t num, int exp) : num_(num), exp_(exp) {
    if (num_ == 0) {
        exp_ = 0;
        return;
    }
    while ((num_ & 1) == 0) {
        num_ /= 2;
        --exp_;
    }
}

Dyadic Dyadic::pow2(int e) { return Dyadic(1, -e); }

Dyadic Dyadic::scaled(int e) const { return num_ == 0 ? Dyadic() : Dyadic(num_, exp_ - e); }

double Dyadic::to_double() const { return std::ldexp(static_cast<double>(num_), -exp_); }

std::string Dyadic::str() const { return std::to_string(num_) + "*2^" + std::to_string(-exp_); }

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    i128 na, nb;
    int exp;
    align(a, b, na, nb, exp);
    return from_wide(na + nb, exp);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    return from_wide(static_cast<i128>(a.num_) * static_cast<i128>(b.num_), a.exp_ + b.exp_);
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    const Dyadic d = a - b;
    return d.num_ <=> 0;
}

Dyadic abs(const Dyadic& a) { return a.numerator() < 0 ? -a : a; }

}  // namespace bbmlab
