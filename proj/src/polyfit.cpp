#include "runsx/polyfit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace runsx {

void ModelSpec::validate() const {
    if (exponents.empty()) {
        throw std::invalid_argument("model: at least one basis term required");
    }
    std::set<unsigned> seen(exponents.begin(), exponents.end());
    if (seen.size() != exponents.size()) {
        throw std::invalid_argument("model: duplicate exponent in basis");
    }
}

ModelSpec ModelSpec::parse(std::string_view text) {
    if (text.starts_with("poly:")) text.remove_prefix(5);
    ModelSpec model;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view field = text.substr(pos, comma - pos);
        unsigned value = 0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc{} || ptr != field.data() + field.size()) {
            throw std::invalid_argument("model: malformed exponent list '" + std::string(text) +
                                        "'");
        }
        model.exponents.push_back(value);
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    model.validate();
    return model;
}

namespace {

double power(double t, unsigned e) {
    double r = 1.0;
    while (e > 0) {
        if (e & 1u) r *= t;
        t *= t;
        e >>= 1u;
    }
    return r;
}

}  // namespace

PolynomialDesign::PolynomialDesign(std::vector<double> abscissas, ModelSpec model)
    : n_(abscissas.size()),
      k_(model.exponents.size()),
      model_(std::move(model)),
      abscissas_(std::move(abscissas)) {
    model_.validate();
    if (n_ == 0) throw std::invalid_argument("fit: no observations");
    std::set<double> distinct;
    for (std::size_t i = 0; i < n_; ++i) {
        if (!std::isfinite(abscissas_[i])) {
            throw std::invalid_argument("fit: non-finite abscissa at index " + std::to_string(i));
        }
        distinct.insert(abscissas_[i]);
    }
    if (distinct.size() < k_) {
        throw std::invalid_argument("fit: rank-deficient design, only " +
                                    std::to_string(distinct.size()) +
                                    " distinct abscissas for " + std::to_string(k_) +
                                    " basis terms");
    }

    qr_.resize(n_ * k_);
    tau_.assign(k_, 0.0);
    for (std::size_t j = 0; j < k_; ++j) {
        for (std::size_t i = 0; i < n_; ++i) {
            qr_[j * n_ + i] = power(abscissas_[i], model_.exponents[j]);
        }
    }

    // Householder QR, one reflector per column.
    for (std::size_t j = 0; j < k_; ++j) {
        double* col = qr_.data() + j * n_;
        double norm2 = 0.0;
        for (std::size_t i = j; i < n_; ++i) norm2 += col[i] * col[i];
        const double norm = std::sqrt(norm2);
        if (norm <= 1e-12 * static_cast<double>(n_)) {
            throw std::invalid_argument("fit: rank-deficient design at basis term t^" +
                                        std::to_string(model_.exponents[j]));
        }
        double sigma = norm2 - col[j] * col[j];
        if (sigma == 0.0) {
            tau_[j] = 0.0;  // column already aligned with the axis
            if (col[j] < 0.0) {
                // flip to keep R's diagonal positive
                tau_[j] = 2.0;
                for (std::size_t c = j; c < k_; ++c) {
                    qr_[c * n_ + j] = -qr_[c * n_ + j];
                }
            }
            continue;
        }
        const double alpha = col[j] <= 0.0 ? norm : -norm;
        const double v0 = col[j] - alpha;
        tau_[j] = -v0 / alpha;  // = 2 v0^2 / (sigma + v0^2) after normalization
        const double inv_v0 = 1.0 / v0;
        for (std::size_t i = j + 1; i < n_; ++i) col[i] *= inv_v0;
        col[j] = alpha;
        for (std::size_t c = j + 1; c < k_; ++c) {
            double* trail = qr_.data() + c * n_;
            double dot = trail[j];
            for (std::size_t i = j + 1; i < n_; ++i) dot += col[i] * trail[i];
            dot *= tau_[j];
            trail[j] -= dot;
            for (std::size_t i = j + 1; i < n_; ++i) trail[i] -= dot * col[i];
        }
    }
}

void PolynomialDesign::apply_q_transpose(std::span<double> v) const {
    for (std::size_t j = 0; j < k_; ++j) {
        if (tau_[j] == 0.0) continue;
        const double* col = qr_.data() + j * n_;
        double dot = v[j];
        for (std::size_t i = j + 1; i < n_; ++i) dot += col[i] * v[i];
        dot *= tau_[j];
        v[j] -= dot;
        for (std::size_t i = j + 1; i < n_; ++i) v[i] -= dot * col[i];
    }
}

void PolynomialDesign::apply_q(std::span<double> v) const {
    for (std::size_t j = k_; j-- > 0;) {
        if (tau_[j] == 0.0) continue;
        const double* col = qr_.data() + j * n_;
        double dot = v[j];
        for (std::size_t i = j + 1; i < n_; ++i) dot += col[i] * v[i];
        dot *= tau_[j];
        v[j] -= dot;
        for (std::size_t i = j + 1; i < n_; ++i) v[i] -= dot * col[i];
    }
}

void PolynomialDesign::residuals_into(std::span<const double> y, std::span<double> out) const {
    if (y.size() != n_ || out.size() != n_) {
        throw std::invalid_argument("fit: response length does not match the design");
    }
    if (out.data() != y.data()) std::copy(y.begin(), y.end(), out.begin());
    apply_q_transpose(out);
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k_), 0.0);
    apply_q(out);
}

std::vector<double> PolynomialDesign::coefficients(std::span<const double> y) const {
    if (y.size() != n_) {
        throw std::invalid_argument("fit: response length does not match the design");
    }
    std::vector<double> work(y.begin(), y.end());
    apply_q_transpose(work);
    std::vector<double> beta(k_, 0.0);
    for (std::size_t j = k_; j-- > 0;) {
        double s = work[j];
        for (std::size_t c = j + 1; c < k_; ++c) s -= qr_[c * n_ + j] * beta[c];
        beta[j] = s / qr_[j * n_ + j];
    }
    return beta;
}

FitResult least_squares_fit(std::span<const double> t, std::span<const double> y,
                            const ModelSpec& model) {
    if (t.size() != y.size()) {
        throw std::invalid_argument("fit: abscissa and response lengths differ");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) {
            throw std::invalid_argument("fit: non-finite response at index " + std::to_string(i));
        }
    }
    const PolynomialDesign design(std::vector<double>(t.begin(), t.end()), model);
    FitResult fit;
    fit.coefficients = design.coefficients(y);
    fit.residuals.resize(y.size());
    design.residuals_into(y, fit.residuals);
    fit.sse = 0.0;
    for (double e : fit.residuals) fit.sse += e * e;
    return fit;
}

FitResult least_squares_fit(std::span<const Observation> data, const ModelSpec& model) {
    std::vector<double> t(data.size());
    std::vector<double> y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        t[i] = data[i].t;
        y[i] = data[i].y;
    }
    return least_squares_fit(t, y, model);
}

}  // namespace runsx
