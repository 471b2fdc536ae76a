#pragma once

#include <vector>

namespace speq {

// Closed-form benchmark instances, written straight from the model
// primitives; nothing here calls the solvers or the clearing kernel.

/// Two zero-volatility agents with opposing unit drifts, costless longs,
/// unit-cost shorts, constant supply s: trading happens in waves that start
/// only once the state is close enough to the disagreement point.
struct DelayOracle {
    double s = 8.0;
    double T = 1.0;

    double value(double t, double x) const;     // dynamic value surface
    double p_dyn(double x) const { return value(0.0, x); }
    /// Static price; vol_sq shifts it by vol_sq * T exactly.
    double p_sta(double x, double vol_sq = 0.0) const;
    double gap(double x) const { return p_sta(x) - p_dyn(x); }
    /// Dynamic position of agent i (0 = optimist, drift +1).
    double phi(double t, double x, int agent) const;
    /// Static position of agent i.
    double q(double x, int agent) const;
    /// Position along agent i's own almost-sure path started at x.
    double path_position(double t, double x, int agent) const;
};

/// Two agents with equal unit quadratic costs, zero supply, any drifts and
/// vols; everything is a polynomial in the state.
struct SymmetricOracle {
    double b1 = 1.0, b2 = 0.0;
    double sigma1_sq = 1.0, sigma2_sq = 1.0;
    double T = 1.0;

    double value(double t, double x) const;
    double p_dyn(double x) const { return value(0.0, x); }
    double e(double x, int agent) const;        // E_i[f(X_T)], f = y^2
    double p_sta(double x) const;
    double gap(double x) const { return p_sta(x) - p_dyn(x); }
    double phi(double t, double x, int agent) const;
    double q(double x, int agent) const;
};

/// Costless-long limit with a unit-cost short side: optimist (drift +1) and
/// martingale pessimist (drift 0), zero vol, zero supply, started at x = 0.
struct NoCostOracle {
    double T = 1.0;

    double value(double t, double x) const;     // max(x^2, (x + T - t)^2)
    double p() const { return T * T; }
    std::vector<double> q() const { return {T, -T}; }  // optimist absorbs the short
    double phi2(double t, double x) const { return -2.0 * (x + T - t); }
    double path_position2(double t) const { return -2.0 * (T - t); }
};

}  // namespace speq
