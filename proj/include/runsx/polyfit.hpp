#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "runsx/dataset.hpp"

// Least-squares fitting of polynomial-basis curves (any set of distinct
// integer exponents, e.g. {0,1} for a straight line or {3} for a single
// cubic term) by Householder QR, and residual extraction.

namespace runsx {

struct ModelSpec {
    std::vector<unsigned> exponents;

    void validate() const;

    /// Parse "poly:0,1" or "0,1". Throws on malformed text.
    static ModelSpec parse(std::string_view text);
};

struct FitResult {
    std::vector<double> coefficients;  // aligned with ModelSpec::exponents
    std::vector<double> residuals;     // y_i - f(t_i)
    double sse = 0.0;
};

/// QR factorization of the design matrix for a fixed set of abscissas,
/// reusable across many response vectors. Solving goes through the
/// orthogonal factor, never the normal equations.
class PolynomialDesign {
public:
    PolynomialDesign(std::vector<double> abscissas, ModelSpec model);

    std::size_t observations() const { return n_; }
    std::size_t terms() const { return k_; }

    /// out = y - X beta(y); out may alias y.
    void residuals_into(std::span<const double> y, std::span<double> out) const;

    std::vector<double> coefficients(std::span<const double> y) const;

private:
    void apply_q_transpose(std::span<double> v) const;
    void apply_q(std::span<double> v) const;

    std::size_t n_ = 0;
    std::size_t k_ = 0;
    ModelSpec model_;
    std::vector<double> abscissas_;
    std::vector<double> qr_;   // n x k column-major; reflectors below the diagonal
    std::vector<double> tau_;  // reflector scalars
};

FitResult least_squares_fit(std::span<const double> t, std::span<const double> y,
                            const ModelSpec& model);
FitResult least_squares_fit(std::span<const Observation> data, const ModelSpec& model);

}  // namespace runsx
