#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Core>

#include "specgap/common.hpp"

namespace specgap {

// Exact rational scalar for Eigen matrices.
//
// cpp_rational cannot be used as an Eigen scalar directly: its greedy
// byte-container constructor template matches Eigen expression types and
// fails to instantiate. This wrapper exposes only a controlled constructor
// set, so overload resolution never walks into the backend.
class Rat {
public:
    using rep = boost::multiprecision::cpp_rational;

    Rat() : v_(0) {}
    template <typename I, typename = std::enable_if_t<std::is_integral_v<I>>>
    Rat(I n) : v_(n) {}
    Rat(long long num, long long den) : v_(rep(num) / rep(den)) {
        if (den == 0) throw validation_error("Rat: zero denominator");
    }
    explicit Rat(rep v) : v_(std::move(v)) {}

    const rep& raw() const { return v_; }

    friend Rat operator+(const Rat& a, const Rat& b) { return Rat(a.v_ + b.v_); }
    friend Rat operator-(const Rat& a, const Rat& b) { return Rat(a.v_ - b.v_); }
    friend Rat operator*(const Rat& a, const Rat& b) { return Rat(a.v_ * b.v_); }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.v_.is_zero()) throw validation_error("Rat: division by zero");
        return Rat(a.v_ / b.v_);
    }
    Rat operator-() const { return Rat(-v_); }
    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
    Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

    friend Rat abs(const Rat& a) { return Rat(boost::multiprecision::abs(a.v_)); }

    double to_double() const { return v_.template convert_to<double>(); }
    std::string str() const { return v_.str(); }

    friend std::ostream& operator<<(std::ostream& os, const Rat& a) { return os << a.v_; }

private:
    rep v_;
};

// Exact conversion: every finite double is a dyadic rational.
inline Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw validation_error("rat_from_double: non-finite input");
    if (x == 0.0) return Rat(0);
    int e = 0;
    double m = std::frexp(x, &e); // x = m * 2^e, 0.5 <= |m| < 1
    boost::multiprecision::cpp_int num(static_cast<long long>(std::ldexp(m, 53)));
    int shift = e - 53;
    if (shift >= 0) return Rat(Rat::rep(num << shift));
    return Rat(Rat::rep(num) / Rat::rep(boost::multiprecision::cpp_int(1) << (-shift)));
}

} // namespace specgap

namespace Eigen {

template <>
struct NumTraits<specgap::Rat> : GenericNumTraits<specgap::Rat> {
    typedef specgap::Rat Real;
    typedef specgap::Rat NonInteger;
    typedef specgap::Rat Nested;

    static inline Real epsilon() { return specgap::Rat(0); }
    static inline Real dummy_precision() { return specgap::Rat(0); }
    static inline int digits10() { return 0; }

    enum {
        IsInteger = 0,
        IsSigned = 1,
        IsComplex = 0,
        RequireInitialization = 1,
        ReadCost = 8,
        AddCost = 60,
        MulCost = 60
    };
};

} // namespace Eigen
