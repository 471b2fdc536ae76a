#include "speq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace speq {

// Delay instance. With zero volatility each agent's state path is
// deterministic, so the dynamic problem reduces to choosing when the market
// switches from both sides resting on the supply (cost s/2 per unit time for
// the marginal holder) to the optimist carrying everything (cost s). The
// value is the better of the two regimes from (t, x) on.

namespace {

void require_delay(const DelayOracle& o) {
    if (!(o.s > 0.0) || !(o.T > 0.0))
        throw std::invalid_argument("delay oracle: needs s > 0 and T > 0");
}

}  // namespace

double DelayOracle::value(double t, double x) const {
    require_delay(*this);
    double tau = T - t;
    double rest = x * x - 0.5 * s * tau;
    double move = (std::abs(x) + tau) * (std::abs(x) + tau) - s * tau;
    return std::max(rest, move);
}

double DelayOracle::p_sta(double x, double vol_sq) const {
    require_delay(*this);
    double e1 = (x + T) * (x + T) + vol_sq * T;
    double e2 = (x - T) * (x - T) + vol_sq * T;
    return std::max({e1 - s * T, e2 - s * T, 0.5 * (e1 + e2) - 0.5 * s * T});
}

double DelayOracle::phi(double t, double x, int agent) const {
    require_delay(*this);
    if (agent != 0 && agent != 1) throw std::invalid_argument("delay oracle: agent in {0,1}");
    double tau = T - t;
    double sgn = agent == 0 ? 1.0 : -1.0;
    if (std::abs(x) < 0.25 * s - 0.5 * tau)
        return 0.5 * s + sgn * 2.0 * x;            // both sides share the supply
    bool upwind_agent = (x >= 0.0) == (agent == 0);  // drift points away from 0
    if (x == 0.0) upwind_agent = agent == 0;
    return upwind_agent ? s : 0.0;                   // one side carries it all
}

double DelayOracle::q(double x, int agent) const {
    require_delay(*this);
    if (agent != 0 && agent != 1) throw std::invalid_argument("delay oracle: agent in {0,1}");
    double b = agent == 0 ? 1.0 : -1.0;
    double e = (x + b * T) * (x + b * T);
    return std::max(e - p_sta(x), 0.0) / T;
}

double DelayOracle::path_position(double t, double x, int agent) const {
    double b = agent == 0 ? 1.0 : -1.0;
    return phi(t, x + b * t, agent);
}

double SymmetricOracle::value(double t, double x) const {
    double tau = T - t;
    double mu = 0.5 * (b1 + b2);
    double avg_sq = 0.5 * (sigma1_sq + sigma2_sq);
    return (x + mu * tau) * (x + mu * tau) + avg_sq * tau;
}

double SymmetricOracle::e(double x, int agent) const {
    double b = agent == 0 ? b1 : b2;
    double ss = agent == 0 ? sigma1_sq : sigma2_sq;
    return x * x + 2.0 * x * b * T + b * b * T * T + ss * T;
}

double SymmetricOracle::p_sta(double x) const { return 0.5 * (e(x, 0) + e(x, 1)); }

double SymmetricOracle::phi(double t, double x, int agent) const {
    double tau = T - t;
    double mu = 0.5 * (b1 + b2);
    double db = agent == 0 ? b1 - b2 : b2 - b1;
    double ds = agent == 0 ? sigma1_sq - sigma2_sq : sigma2_sq - sigma1_sq;
    return (x + mu * tau) * db + 0.5 * ds;
}

double SymmetricOracle::q(double x, int agent) const { return (e(x, agent) - p_sta(x)) / T; }

double NoCostOracle::value(double t, double x) const {
    double held = x + T - t;
    return std::max(x * x, held * held);
}

}  // namespace speq
