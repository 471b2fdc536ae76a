#pragma once

#include <string>
#include <vector>

namespace speq {

enum class FieldKind { constant, affine, table };

/// Scalar coefficient on [0,T] x R: constant, affine in x, or a rectangular
/// sample table with bilinear interpolation. Lookups outside the table hull
/// clamp to the nearest edge, so the exact range of the field equals the
/// range of its samples. Evaluation is a pure function of the inputs.
class CoefficientField {
  public:
    static CoefficientField constant(double value);
    static CoefficientField affine(double intercept, double slope);
    static CoefficientField table(std::vector<double> ts, std::vector<double> xs,
                                  std::vector<std::vector<double>> values);

    double operator()(double t, double x) const;

    FieldKind kind() const { return kind_; }
    /// True when the field takes a single value everywhere.
    bool is_constant_value() const;

    struct Bounds {
        double lo, hi;
        double lo_t, lo_x;  // a point attaining lo
        double hi_t, hi_x;
    };
    /// Exact range over [0,T] x [x_lo,x_hi]; linear pieces attain extrema at
    /// corners / sample nodes, so no sampling error.
    Bounds bounds(double T, double x_lo, double x_hi) const;

    CoefficientField scaled(double factor) const;

    // Structural accessors used by serialization and exact comparison.
    double value() const { return intercept_; }
    double intercept() const { return intercept_; }
    double slope() const { return slope_; }
    const std::vector<double>& ts() const { return ts_; }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<std::vector<double>>& samples() const { return values_; }

    bool operator==(const CoefficientField&) const = default;

  private:
    FieldKind kind_ = FieldKind::constant;
    double intercept_ = 0.0;
    double slope_ = 0.0;
    std::vector<double> ts_, xs_;
    std::vector<std::vector<double>> values_;  // values_[it][ix]
};

enum class PayoffKind { constant, quadratic, affine, table };

/// Terminal payoff f(x): constant, y^2, affine, or 1-D sample table with
/// linear interpolation and edge clamping.
class PayoffField {
  public:
    static PayoffField constant(double value);
    static PayoffField quadratic();
    static PayoffField affine(double intercept, double slope);
    static PayoffField table(std::vector<double> xs, std::vector<double> values);

    double operator()(double x) const;
    PayoffKind kind() const { return kind_; }

    double value() const { return intercept_; }
    double intercept() const { return intercept_; }
    double slope() const { return slope_; }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& samples() const { return values_; }

    bool operator==(const PayoffField&) const = default;

  private:
    PayoffKind kind_ = PayoffKind::quadratic;
    double intercept_ = 0.0;
    double slope_ = 0.0;
    std::vector<double> xs_, values_;
};

}  // namespace speq
