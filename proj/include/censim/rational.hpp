#pragma once

// Exact rational arithmetic for payoff and threshold computations.
// Equilibrium verification compares utilities at tolerance zero, so every
// quantity that feeds a comparison is kept as a normalized num/den pair.
// Intermediates go through __int128; narrowing back to int64 is checked.

#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace censim {

class Rat {
public:
    constexpr Rat() = default;
    Rat(std::int64_t value) : num_(value), den_(1) {}
    Rat(std::int64_t num, std::int64_t den) {
        if (den == 0) throw std::domain_error("Rat: zero denominator");
        __int128 n = num;
        __int128 d = den;
        if (d < 0) { n = -n; d = -d; }
        reduce_and_set(n, d);
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                    i128(a.den_) * b.den_);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                    i128(a.den_) * b.den_);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw std::domain_error("Rat: division by zero");
        __int128 n = i128(a.num_) * b.den_;
        __int128 d = i128(a.den_) * b.num_;
        if (d < 0) { n = -n; d = -d; }
        return make(n, d);
    }
    Rat operator-() const { Rat r; r.num_ = -num_; r.den_ = den_; return r; }

    Rat& operator+=(const Rat& o) { *this = *this + o; return *this; }
    Rat& operator-=(const Rat& o) { *this = *this - o; return *this; }
    Rat& operator*=(const Rat& o) { *this = *this * o; return *this; }
    Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
        __int128 lhs = i128(a.num_) * b.den_;
        __int128 rhs = i128(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    // Accepts "3", "-2/5" and decimal literals like "0.65".
    static Rat parse(const std::string& text);

private:
    static __int128 i128(std::int64_t v) { return static_cast<__int128>(v); }

    static Rat make(__int128 n, __int128 d) {
        Rat r;
        r.reduce_and_set(n, d);
        return r;
    }

    void reduce_and_set(__int128 n, __int128 d) {
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        num_ = narrow(n);
        den_ = narrow(d);
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    static std::int64_t narrow(__int128 v) {
        if (v > std::numeric_limits<std::int64_t>::max() ||
            v < std::numeric_limits<std::int64_t>::min())
            throw std::overflow_error("Rat: value exceeds 64-bit range");
        return static_cast<std::int64_t>(v);
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rat Rat::parse(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("Rat::parse: empty string");
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            std::int64_t n = std::stoll(text.substr(0, slash));
            std::int64_t d = std::stoll(text.substr(slash + 1));
            return Rat(n, d);
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rat(std::stoll(text));
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        std::size_t frac_len = text.size() - dot - 1;
        if (frac_len > 18) throw std::invalid_argument("Rat::parse: too many decimal places");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
        return Rat(std::stoll(digits), den);
    } catch (const std::overflow_error&) {
        throw;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("Rat::parse: bad rational literal '" + text + "'");
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("Rat::parse: rational literal out of range '" + text + "'");
    }
}

} // namespace censim
