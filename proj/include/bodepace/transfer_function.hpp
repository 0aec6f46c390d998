#pragma once

#include <complex>
#include <limits>
#include <string>

#include "bodepace/errors.hpp"
#include "bodepace/polynomial.hpp"

namespace bodepace {

/**
 * Rational function num(s)/den(s) in the Laplace variable.
 *
 * The representation is never reduced: products keep every factor, including
 * ones that would cancel. Evaluation fails with singular_evaluation when the
 * denominator vanishes to within rounding of its own terms.
 */
class TransferFunction {
public:
    TransferFunction() : num_(Polynomial::constant(1.0)), den_(Polynomial::constant(1.0)) {}

    TransferFunction(Polynomial numerator, Polynomial denominator)
        : num_(std::move(numerator)), den_(std::move(denominator)) {
        detail::require(!den_.is_zero(), "transfer function denominator is the zero polynomial");
    }

    static TransferFunction gain(double k) {
        return {Polynomial::constant(k), Polynomial::constant(1.0)};
    }

    [[nodiscard]] const Polynomial& numerator() const { return num_; }
    [[nodiscard]] const Polynomial& denominator() const { return den_; }

    /// Numerator degree does not exceed denominator degree.
    [[nodiscard]] bool is_proper() const { return num_.degree() <= den_.degree(); }

    [[nodiscard]] std::complex<double> operator()(std::complex<double> s) const {
        const std::complex<double> d = den_(s);
        const double scale = den_.magnitude_bound(s);
        if (std::abs(d) <= 16.0 * std::numeric_limits<double>::epsilon() * scale) {
            throw singular_evaluation("transfer function evaluated at a pole (s = " +
                                      std::to_string(s.real()) + " + " +
                                      std::to_string(s.imag()) + "j)");
        }
        return num_(s) / d;
    }

    /// Value at s = 0; throws singular_evaluation for a pole at the origin.
    [[nodiscard]] double dc_gain() const { return (*this)(std::complex<double>{0.0, 0.0}).real(); }

private:
    Polynomial num_;
    Polynomial den_;
};

/// a(s)·b(s), no cancellation.
inline TransferFunction tf_series(const TransferFunction& a, const TransferFunction& b) {
    return {a.numerator() * b.numerator(), a.denominator() * b.denominator()};
}

inline TransferFunction operator*(const TransferFunction& a, const TransferFunction& b) {
    return tf_series(a, b);
}

/// a(s) + b(s) over the common denominator a.den·b.den.
inline TransferFunction tf_parallel(const TransferFunction& a, const TransferFunction& b) {
    return {a.numerator() * b.denominator() + b.numerator() * a.denominator(),
            a.denominator() * b.denominator()};
}

/// forward/(1 + forward·feedback_path) as one rational function.
inline TransferFunction tf_feedback(const TransferFunction& forward,
                                    const TransferFunction& feedback_path) {
    const Polynomial num = forward.numerator() * feedback_path.denominator();
    const Polynomial den = forward.denominator() * feedback_path.denominator() +
                           forward.numerator() * feedback_path.numerator();
    if (den.is_zero()) {
        throw invalid_configuration("degenerate feedback loop: 1 + L(s) is identically zero");
    }
    return {num, den};
}

}  // namespace bodepace
