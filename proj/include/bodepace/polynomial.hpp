#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace bodepace {

/**
 * Real polynomial in s with coefficients stored in ascending powers.
 *
 * Exact trailing zeros are dropped on construction so that degree() is the
 * true degree. The zero polynomial is stored as an empty coefficient list and
 * reports degree -1. No other normalization is ever applied.
 */
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) { trim(); }
    explicit Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { trim(); }

    static Polynomial constant(double c) { return Polynomial({c}); }
    /// The monomial s^power.
    static Polynomial monomial(std::size_t power, double c = 1.0) {
        std::vector<double> v(power + 1, 0.0);
        v[power] = c;
        return Polynomial(std::move(v));
    }

    [[nodiscard]] std::span<const double> coeffs() const { return coeffs_; }
    [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
    [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

    /// Coefficient of s^power; zero beyond the degree.
    [[nodiscard]] double operator[](std::size_t power) const {
        return power < coeffs_.size() ? coeffs_[power] : 0.0;
    }

    [[nodiscard]] std::complex<double> operator()(std::complex<double> s) const {
        std::complex<double> acc{0.0, 0.0};
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * s + *it;
        }
        return acc;
    }

    [[nodiscard]] double operator()(double x) const {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * x + *it;
        }
        return acc;
    }

    /// Sum of |c_k|·|s|^k: the scale against which cancellation in operator() is judged.
    [[nodiscard]] double magnitude_bound(std::complex<double> s) const {
        const double r = std::abs(s);
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * r + std::abs(*it);
        }
        return acc;
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == 0.0) {
            coeffs_.pop_back();
        }
    }

    std::vector<double> coeffs_;
};

/// Coefficient convolution.
inline Polynomial poly_mul(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) {
        return {};
    }
    const auto ac = a.coeffs();
    const auto bc = b.coeffs();
    std::vector<double> out(ac.size() + bc.size() - 1, 0.0);
    for (std::size_t i = 0; i < ac.size(); ++i) {
        for (std::size_t j = 0; j < bc.size(); ++j) {
            out[i + j] += ac[i] * bc[j];
        }
    }
    return Polynomial(std::move(out));
}

inline Polynomial poly_add(const Polynomial& a, const Polynomial& b) {
    const std::size_t n = std::max(a.coeffs().size(), b.coeffs().size());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] + b[i];
    }
    return Polynomial(std::move(out));
}

inline Polynomial poly_scale(const Polynomial& a, double c) {
    std::vector<double> out(a.coeffs().begin(), a.coeffs().end());
    for (auto& v : out) {
        v *= c;
    }
    return Polynomial(std::move(out));
}

/// p^n by repeated convolution; p^0 = 1.
inline Polynomial poly_pow(const Polynomial& p, std::size_t n) {
    Polynomial out = Polynomial::constant(1.0);
    for (std::size_t i = 0; i < n; ++i) {
        out = poly_mul(out, p);
    }
    return out;
}

inline Polynomial operator*(const Polynomial& a, const Polynomial& b) { return poly_mul(a, b); }
inline Polynomial operator+(const Polynomial& a, const Polynomial& b) { return poly_add(a, b); }
inline Polynomial operator*(double c, const Polynomial& a) { return poly_scale(a, c); }

}  // namespace bodepace
