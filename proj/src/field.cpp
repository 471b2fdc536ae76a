#include "speq/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace speq {

namespace {

void check_axis(const std::vector<double>& a, const char* what) {
    if (a.size() < 2) throw std::invalid_argument(std::string(what) + ": need >= 2 samples");
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        if (!(a[i] < a[i + 1]))
            throw std::invalid_argument(std::string(what) + ": axis not strictly increasing");
    for (double v : a)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite axis");
}

// Index of the cell containing q after clamping to [a.front(), a.back()].
std::size_t cell(const std::vector<double>& a, double& q) {
    if (q <= a.front()) {
        q = a.front();
        return 0;
    }
    if (q >= a.back()) {
        q = a.back();
        return a.size() - 2;
    }
    auto it = std::upper_bound(a.begin(), a.end(), q);
    return static_cast<std::size_t>(it - a.begin()) - 1;
}

}  // namespace

CoefficientField CoefficientField::constant(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("constant field: non-finite value");
    CoefficientField f;
    f.kind_ = FieldKind::constant;
    f.intercept_ = value;
    return f;
}

CoefficientField CoefficientField::affine(double intercept, double slope) {
    if (!std::isfinite(intercept) || !std::isfinite(slope))
        throw std::invalid_argument("affine field: non-finite parameter");
    CoefficientField f;
    f.kind_ = FieldKind::affine;
    f.intercept_ = intercept;
    f.slope_ = slope;
    return f;
}

CoefficientField CoefficientField::table(std::vector<double> ts, std::vector<double> xs,
                                         std::vector<std::vector<double>> values) {
    check_axis(ts, "table field ts");
    check_axis(xs, "table field xs");
    if (values.size() != ts.size())
        throw std::invalid_argument("table field: values rows != ts size");
    for (const auto& row : values) {
        if (row.size() != xs.size())
            throw std::invalid_argument("table field: values cols != xs size");
        for (double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("table field: non-finite sample");
    }
    CoefficientField f;
    f.kind_ = FieldKind::table;
    f.ts_ = std::move(ts);
    f.xs_ = std::move(xs);
    f.values_ = std::move(values);
    return f;
}

double CoefficientField::operator()(double t, double x) const {
    switch (kind_) {
        case FieldKind::constant:
            return intercept_;
        case FieldKind::affine:
            return intercept_ + slope_ * x;
        case FieldKind::table: {
            double tq = t, xq = x;
            std::size_t it = cell(ts_, tq);
            std::size_t ix = cell(xs_, xq);
            double u = (tq - ts_[it]) / (ts_[it + 1] - ts_[it]);
            double w = (xq - xs_[ix]) / (xs_[ix + 1] - xs_[ix]);
            double a = values_[it][ix], b = values_[it][ix + 1];
            double c = values_[it + 1][ix], d = values_[it + 1][ix + 1];
            return (1 - u) * ((1 - w) * a + w * b) + u * ((1 - w) * c + w * d);
        }
    }
    return 0.0;
}

bool CoefficientField::is_constant_value() const {
    switch (kind_) {
        case FieldKind::constant:
            return true;
        case FieldKind::affine:
            return slope_ == 0.0;
        case FieldKind::table: {
            double v0 = values_[0][0];
            for (const auto& row : values_)
                for (double v : row)
                    if (v != v0) return false;
            return true;
        }
    }
    return false;
}

CoefficientField::Bounds CoefficientField::bounds(double T, double x_lo, double x_hi) const {
    Bounds b{};
    switch (kind_) {
        case FieldKind::constant:
            b = {intercept_, intercept_, 0, x_lo, 0, x_lo};
            break;
        case FieldKind::affine: {
            double vlo = intercept_ + slope_ * x_lo;
            double vhi = intercept_ + slope_ * x_hi;
            if (vlo <= vhi)
                b = {vlo, vhi, 0, x_lo, 0, x_hi};
            else
                b = {vhi, vlo, 0, x_hi, 0, x_lo};
            break;
        }
        case FieldKind::table: {
            // Interpolation with clamping never exits the sample hull, so the
            // extrema sit on sample nodes.
            b.lo = b.hi = values_[0][0];
            b.lo_t = b.hi_t = ts_[0];
            b.lo_x = b.hi_x = xs_[0];
            for (std::size_t i = 0; i < ts_.size(); ++i)
                for (std::size_t j = 0; j < xs_.size(); ++j) {
                    double v = values_[i][j];
                    if (v < b.lo) b = {v, b.hi, ts_[i], xs_[j], b.hi_t, b.hi_x};
                    if (v > b.hi) {
                        b.hi = v;
                        b.hi_t = ts_[i];
                        b.hi_x = xs_[j];
                    }
                }
            break;
        }
    }
    (void)T;
    return b;
}

CoefficientField CoefficientField::scaled(double factor) const {
    CoefficientField f = *this;
    f.intercept_ *= factor;
    f.slope_ *= factor;
    for (auto& row : f.values_)
        for (double& v : row) v *= factor;
    return f;
}

PayoffField PayoffField::constant(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("constant payoff: non-finite value");
    PayoffField f;
    f.kind_ = PayoffKind::constant;
    f.intercept_ = value;
    return f;
}

PayoffField PayoffField::quadratic() {
    PayoffField f;
    f.kind_ = PayoffKind::quadratic;
    return f;
}

PayoffField PayoffField::affine(double intercept, double slope) {
    if (!std::isfinite(intercept) || !std::isfinite(slope))
        throw std::invalid_argument("affine payoff: non-finite parameter");
    PayoffField f;
    f.kind_ = PayoffKind::affine;
    f.intercept_ = intercept;
    f.slope_ = slope;
    return f;
}

PayoffField PayoffField::table(std::vector<double> xs, std::vector<double> values) {
    check_axis(xs, "table payoff xs");
    if (values.size() != xs.size())
        throw std::invalid_argument("table payoff: values size != xs size");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("table payoff: non-finite sample");
    PayoffField f;
    f.kind_ = PayoffKind::table;
    f.xs_ = std::move(xs);
    f.values_ = std::move(values);
    return f;
}

double PayoffField::operator()(double x) const {
    switch (kind_) {
        case PayoffKind::constant:
            return intercept_;
        case PayoffKind::quadratic:
            return x * x;
        case PayoffKind::affine:
            return intercept_ + slope_ * x;
        case PayoffKind::table: {
            double q = x;
            std::size_t i = cell(xs_, q);
            double w = (q - xs_[i]) / (xs_[i + 1] - xs_[i]);
            return (1 - w) * values_[i] + w * values_[i + 1];
        }
    }
    return 0.0;
}

}  // namespace speq
