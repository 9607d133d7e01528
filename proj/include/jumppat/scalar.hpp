#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>

#include <gmpxx.h>

#include "jumppat/common.hpp"

namespace jumppat {

// Complex number with arbitrary-precision rational parts (a Gaussian rational).
// Arithmetic is closed in the field and never rounds; mpq_class keeps each part
// in lowest terms with positive denominator.
struct ExactComplex {
    mpq_class re, im;

    ExactComplex() : re(0), im(0) {}
    ExactComplex(int v) : re(v), im(0) {}  // NOLINT: implicit for scalar literals
    ExactComplex(const mpq_class& r) : re(r), im(0) {}
    ExactComplex(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}

    static ExactComplex imag_unit() { return {mpq_class(0), mpq_class(1)}; }

    bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }

    ExactComplex& operator+=(const ExactComplex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    ExactComplex& operator-=(const ExactComplex& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    ExactComplex& operator*=(const ExactComplex& o) {
        mpq_class r = re * o.re - im * o.im;
        im = re * o.im + im * o.re;
        re = std::move(r);
        return *this;
    }
    ExactComplex& operator/=(const ExactComplex& o) {
        mpq_class n = o.re * o.re + o.im * o.im;
        if (sgn(n) == 0) throw NumericError("exact division by zero");
        mpq_class r = (re * o.re + im * o.im) / n;
        im = (im * o.re - re * o.im) / n;
        re = std::move(r);
        return *this;
    }
};

inline ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
inline ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }
inline ExactComplex operator*(ExactComplex a, const ExactComplex& b) { return a *= b; }
inline ExactComplex operator/(ExactComplex a, const ExactComplex& b) { return a /= b; }
inline ExactComplex operator-(const ExactComplex& a) { return {-a.re, -a.im}; }
inline bool operator==(const ExactComplex& a, const ExactComplex& b) {
    return a.re == b.re && a.im == b.im;
}
inline bool operator!=(const ExactComplex& a, const ExactComplex& b) { return !(a == b); }

inline ExactComplex conj(const ExactComplex& z) { return {z.re, -z.im}; }

inline std::complex<double> to_std_complex(const ExactComplex& z) {
    return {z.re.get_d(), z.im.get_d()};
}
inline std::complex<double> to_std_complex(const std::complex<double>& z) { return z; }

// Every finite double is a dyadic rational, so this conversion is exact.
inline mpq_class rational_from_double(double x) {
    mpq_class q;
    mpq_set_d(q.get_mpq_t(), x);
    return q;
}

// Accepts "p/q", integers, and plain decimals ("-3", "0.25"); all are exact.
inline mpq_class parse_rational(const std::string& text) {
    if (text.empty()) throw ConfigError("empty rational literal");
    std::string s = text;
    auto bad = [&]() -> ConfigError { return ConfigError("cannot parse rational '" + text + "'"); };
    std::size_t dot = s.find('.');
    if (dot != std::string::npos) {
        if (s.find('/') != std::string::npos) throw bad();
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        std::size_t frac_len = s.size() - dot - 1;
        if (digits.empty() || frac_len == 0) throw bad();
        mpq_class q;
        std::string den = "1" + std::string(frac_len, '0');
        if (mpq_set_str(q.get_mpq_t(), (digits + "/" + den).c_str(), 10) != 0) throw bad();
        mpq_canonicalize(q.get_mpq_t());
        return q;
    }
    mpq_class q;
    if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0) throw bad();
    if (sgn(mpq_class(q.get_den())) == 0) throw ConfigError("zero denominator in '" + text + "'");
    mpq_canonicalize(q.get_mpq_t());
    return q;
}

inline std::string to_string(const mpq_class& q) { return q.get_str(); }

// mpq_class(p, q) does not reduce to lowest terms; all rationals entering the
// library must be canonical or GMP comparisons misbehave.
inline mpq_class make_rational(long num, long den = 1) {
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

// Uniform access to the two scalar fields used throughout the library.
template <class S>
struct FieldTraits;

template <>
struct FieldTraits<std::complex<double>> {
    static constexpr bool is_exact = false;
    using Real = double;
    static std::complex<double> conjugate(const std::complex<double>& z) { return std::conj(z); }
    static Real real(const std::complex<double>& z) { return z.real(); }
    static bool is_zero(const std::complex<double>& z) { return z == std::complex<double>(0.0); }
    static std::complex<double> imag_unit() { return {0.0, 1.0}; }
    static std::complex<double> from_real(const Real& r) { return {r, 0.0}; }
    static double real_to_double(const Real& r) { return r; }
};

template <>
struct FieldTraits<ExactComplex> {
    static constexpr bool is_exact = true;
    using Real = mpq_class;
    static ExactComplex conjugate(const ExactComplex& z) { return conj(z); }
    static Real real(const ExactComplex& z) { return z.re; }
    static bool is_zero(const ExactComplex& z) { return z.is_zero(); }
    static ExactComplex imag_unit() { return ExactComplex::imag_unit(); }
    static ExactComplex from_real(const Real& r) { return {r, mpq_class(0)}; }
    static double real_to_double(const Real& r) { return r.get_d(); }
};

template <class S>
using RealOf = typename FieldTraits<S>::Real;

using Complex = std::complex<double>;

}  // namespace jumppat
