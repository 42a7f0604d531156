#include "oamqkd/secure_distance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oamqkd/errors.hpp"

namespace oamqkd {

void LinkBudgetParams::validate() const {
    if (!(std::isfinite(mu) && std::isfinite(nu) && nu > 0.0 && mu > nu)) {
        throw ValidationError("link budget requires mu > nu > 0");
    }
    if (!(e_ch >= 0.0 && e_ch <= 0.5)) throw ValidationError("e_ch must lie in [0, 0.5]");
    if (!(y0 >= 0.0 && std::isfinite(y0))) throw ValidationError("y0 must be non-negative");
    if (!(dark_rate_hz >= 0.0) || !(gate_s >= 0.0)) {
        throw ValidationError("dark rate and gate must be non-negative");
    }
    ec_model().validate();
}

double dark_yield(double dark_rate_hz, double gate_s) {
    if (!(dark_rate_hz >= 0.0) || !(gate_s >= 0.0)) {
        throw ValidationError("dark rate and gate must be non-negative");
    }
    return dark_rate_hz * gate_s;
}

PredictedQbers predicted_qbers(double q_mu, const LinkBudgetParams& p) {
    if (!(q_mu > 0.0)) throw DomainError("predicted_qbers requires q_mu > 0");
    const double q_nu = p.nu / p.mu * q_mu;
    PredictedQbers out;
    const auto predict = [&](double gain) {
        double dark_fraction = p.y0 / gain;
        if (dark_fraction > 1.0) {
            dark_fraction = 1.0;
            out.dark_dominated = true;
        }
        return 0.5 * dark_fraction + p.e_ch * (1.0 - dark_fraction);
    };
    out.e_mu_star = predict(q_mu);
    out.e_nu_star = predict(q_nu);
    return out;
}

DecoyObservables predicted_observables(double q_mu, const LinkBudgetParams& p) {
    const auto qbers = predicted_qbers(q_mu, p);
    return DecoyObservables{p.mu, p.nu, q_mu, p.nu / p.mu * q_mu, qbers.e_mu_star, qbers.e_nu_star, p.y0};
}

std::vector<RatePoint> rate_vs_gain(std::span<const double> q_mu_grid, const LinkBudgetParams& p,
                                    double extra_loss) {
    p.validate();
    if (!(extra_loss > 0.0)) throw ValidationError("extra loss multiplier must be positive");
    std::vector<RatePoint> curve;
    curve.reserve(q_mu_grid.size());
    for (double q : q_mu_grid) {
        if (!(q > 0.0)) throw ValidationError("gain grid values must be positive");
        const double q_mu = q * extra_loss;
        const auto obs = predicted_observables(q_mu, p);
        const bool dark = predicted_qbers(q_mu, p).dark_dominated;
        auto k = secret_key_rate(obs, p.ec_model());
        if (dark) k.secure = false;
        curve.push_back(RatePoint{q_mu, obs.e_mu, obs.e_nu, dark, k});
    }
    return curve;
}

std::vector<double> log_grid(double q_min, double q_max, int points_per_decade) {
    if (!(q_min > 0.0) || !(q_max >= q_min) || points_per_decade < 1) {
        throw ValidationError("log grid needs 0 < q_min <= q_max and points_per_decade >= 1");
    }
    const double lo = std::log10(q_min);
    const double hi = std::log10(q_max);
    const auto steps = static_cast<long>(std::ceil((hi - lo) * points_per_decade - 1e-9));
    std::vector<double> grid;
    if (steps <= 0) return {q_min};
    for (long i = 0; i <= steps; ++i) {
        grid.push_back(std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps)));
    }
    return grid;
}

double gain_threshold(const LinkBudgetParams& p) {
    p.validate();
    const auto rate = [&p](double q_mu) {
        return secret_key_rate(predicted_observables(q_mu, p), p.ec_model()).rate;
    };

    // Scan downward from q = 1 for the first grid point without a positive rate.
    double hi = 1.0;
    if (!(rate(hi) > 0.0)) throw ThresholdUndefinedError("key rate is not positive even at unit gain");
    double lo = 0.0;
    for (double q = 1e-1; q >= 1e-7 * (1.0 - 1e-9); q /= 10.0) {
        if (!(rate(q) > 0.0)) {
            lo = q;
            break;
        }
        hi = q;
    }
    if (lo == 0.0) {
        throw ThresholdUndefinedError("key rate stays positive over the whole gain bracket [1e-7, 1]");
    }

    // rate(lo) <= 0 < rate(hi)
    for (int i = 0; i < 400 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rate(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double loss_margin_db(double measured_gain, double g_star) {
    if (!(measured_gain > 0.0) || !(g_star > 0.0)) throw DomainError("loss margin needs positive gains");
    return 10.0 * std::log10(measured_gain / g_star);
}

}  // namespace oamqkd
