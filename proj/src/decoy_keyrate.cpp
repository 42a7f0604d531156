#include "oamqkd/decoy_keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oamqkd/errors.hpp"

namespace oamqkd {
namespace {

bool is_fraction(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

}  // namespace

void DecoyObservables::validate() const {
    require(std::isfinite(mu) && std::isfinite(nu) && nu > 0.0 && mu > nu,
            "observables require mu > nu > 0");
    require(std::isfinite(q_mu) && q_mu > 0.0 && q_mu <= 1.0, "q_mu must lie in (0, 1]");
    require(std::isfinite(q_nu) && q_nu > 0.0 && q_nu <= 1.0, "q_nu must lie in (0, 1]");
    require(is_fraction(e_mu), "e_mu must lie in [0, 1]");
    require(is_fraction(e_nu), "e_nu must lie in [0, 1]");
    require(std::isfinite(y0) && y0 >= 0.0, "y0 must be non-negative");
}

void ECModel::validate() const {
    require(std::isfinite(f) && f >= 1.0, "error-correction efficiency f must be >= 1");
    require(is_fraction(e0), "e0 must lie in [0, 1]");
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("binary entropy argument " + std::to_string(x) + " outside [0, 1]");
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

ClampedValue q1_lower(const DecoyObservables& obs) {
    if (!(obs.mu > obs.nu)) throw DomainError("q1_lower requires mu > nu");
    obs.validate();
    const double mu = obs.mu;
    const double nu = obs.nu;
    const double prefactor = mu * mu * std::exp(-mu) / (mu * nu - nu * nu);
    const double bracket = obs.q_nu * std::exp(nu) - obs.q_mu * std::exp(mu) * (nu * nu) / (mu * mu) -
                           (mu * mu - nu * nu) / (mu * mu) * obs.y0;
    ClampedValue out;
    out.unclamped = prefactor * bracket;
    out.clamped = out.unclamped < 0.0;
    out.value = out.clamped ? 0.0 : out.unclamped;
    return out;
}

ClampedValue e1_upper(const DecoyObservables& obs, double q1L, const ECModel& ec) {
    if (!(q1L > 0.0)) throw BoundUndefinedError("e1_upper is undefined for a zero single-photon gain bound");
    ec.validate();
    const double numerator = obs.e_nu * obs.q_nu * std::exp(obs.nu) - ec.e0 * obs.y0;
    const double denominator = q1L * (obs.nu / obs.mu) * std::exp(obs.mu);
    ClampedValue out;
    out.unclamped = numerator / denominator;
    if (out.unclamped < 0.0) {
        out.value = 0.0;
        out.clamped = true;
    } else if (out.unclamped > 1.0) {
        out.value = 1.0;
        out.clamped = true;
    } else {
        out.value = out.unclamped;
    }
    return out;
}

double q0_gain(const DecoyObservables& obs) { return std::exp(-obs.mu) * obs.y0; }

KeyRateBreakdown secret_key_rate(const DecoyObservables& obs, const ECModel& ec) {
    obs.validate();
    ec.validate();
    KeyRateBreakdown out;
    const auto q1 = q1_lower(obs);
    out.q1_lower = q1.value;
    out.q1_clamped = q1.clamped;

    double single_photon_term = 0.0;
    if (q1.value > 0.0) {
        const auto e1 = e1_upper(obs, q1.value, ec);
        out.e1_upper = e1.value;
        out.e1_clamped = e1.clamped;
        // A bound above 1/2 carries no more information than 1/2.
        single_photon_term = q1.value / obs.q_mu * (1.0 - binary_entropy(std::min(e1.value, 0.5)));
    } else {
        out.e1_upper = 0.5;
        out.e1_undefined = true;
    }

    out.q0 = q0_gain(obs);
    out.leak_ec = ec.f * binary_entropy(obs.e_mu);
    out.rate = single_photon_term - out.leak_ec + out.q0 / obs.q_mu;
    out.secure = out.rate > 0.0;
    return out;
}

double single_photon_rate(double e_mu, const ECModel& ec) {
    ec.validate();
    const double h = binary_entropy(e_mu);
    return 1.0 - h - ec.f * h;
}

KeyRateBreakdown single_photon_breakdown(const DecoyObservables& obs, const ECModel& ec) {
    obs.validate();
    KeyRateBreakdown out;
    out.q1_lower = obs.q_mu;
    out.e1_upper = obs.e_mu;
    out.q0 = 0.0;
    out.leak_ec = ec.f * binary_entropy(obs.e_mu);
    out.rate = single_photon_rate(obs.e_mu, ec);
    out.secure = out.rate > 0.0;
    return out;
}

double qber_threshold(double ec_f) {
    if (!(ec_f >= 1.0)) throw DomainError("qber_threshold requires f >= 1");
    const auto g = [ec_f](double e) { return 1.0 - (1.0 + ec_f) * binary_entropy(e); };
    double lo = 0.0;  // g > 0
    double hi = 0.5;  // g < 0
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oamqkd
