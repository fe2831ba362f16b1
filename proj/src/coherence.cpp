#include "rydsim/coherence.hpp"

#include <cmath>
#include <string>

#include "rydsim/constants.hpp"
#include "rydsim/errors.hpp"

namespace rydsim {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0))
        throw ValidationError(std::string(name) + " must be positive");
}

} // namespace

double combine_coherence(double t2_star, double t2_prime, double t1) {
    require_positive(t2_star, "t2_star");
    require_positive(t2_prime, "t2_prime");
    require_positive(t1, "t1");
    return 1.0 / (1.0 / t2_star + 1.0 / t2_prime + 1.0 / (2.0 * t1));
}

double t2_star_from_echo(double tau_gr, double t2_spin_echo) {
    require_positive(tau_gr, "tau_gr");
    require_positive(t2_spin_echo, "t2_spin_echo");
    if (!(tau_gr < t2_spin_echo))
        throw ValidationError("inconsistent budget: requires tau_gr < t2_spin_echo");
    return 1.0 / (1.0 / tau_gr - 1.0 / t2_spin_echo);
}

double t2_prime_from_echo(double t2_spin_echo, double t1) {
    require_positive(t2_spin_echo, "t2_spin_echo");
    require_positive(t1, "t1");
    if (!(t2_spin_echo < 2.0 * t1))
        throw ValidationError("inconsistent budget: requires t2_spin_echo < 2*t1");
    return 1.0 / (1.0 / t2_spin_echo - 1.0 / (2.0 * t1));
}

ExtractedCoherence extract_coherence(double tau_gr, double t2_spin_echo, double t1) {
    return {t2_star_from_echo(tau_gr, t2_spin_echo), t2_prime_from_echo(t2_spin_echo, t1)};
}

double estimate_t2_doppler(double temperature, double k_eff, double mass) {
    require_positive(temperature, "temperature");
    require_positive(k_eff, "k_eff");
    require_positive(mass, "mass");
    const double dv = std::sqrt(constants::k_boltzmann * temperature / mass);
    return std::sqrt(2.0) / (k_eff * dv);
}

double estimate_t2_ground(double temperature, double eta) {
    require_positive(temperature, "temperature");
    require_positive(eta, "eta");
    return 0.97 * 2.0 * constants::hbar / (eta * constants::k_boltzmann * temperature);
}

double estimate_scatter_lifetime(double delta1, double omega, double gamma) {
    if (delta1 == 0.0 || omega == 0.0 || gamma == 0.0)
        throw ValidationError("estimate_scatter_lifetime: inputs must be nonzero");
    return 4.0 * delta1 * delta1 / (omega * omega * gamma);
}

double combine_lifetimes(std::span<const double> lifetimes) {
    if (lifetimes.empty())
        throw ValidationError("combine_lifetimes: no channels given");
    double rate = 0.0;
    for (double t : lifetimes) {
        require_positive(t, "lifetime");
        rate += 1.0 / t;
    }
    return 1.0 / rate;
}

double error_from_t2star(double t2_star_us) {
    require_positive(t2_star_us, "t2_star");
    return 0.836 / (t2_star_us * t2_star_us);
}

ErrorLawFit fit_error_law(std::span<const std::pair<double, double>> t2star_error_pairs) {
    if (t2star_error_pairs.size() < 3)
        throw ValidationError("fit_error_law: need at least 3 pairs");
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [t2, e] : t2star_error_pairs) {
        require_positive(t2, "t2_star");
        const double x = 1.0 / (t2 * t2);
        sxx += x * x;
        sxy += x * e;
    }
    ErrorLawFit fit;
    fit.coefficient = sxy / sxx;
    double ss = 0.0;
    for (const auto& [t2, e] : t2star_error_pairs) {
        const double x = 1.0 / (t2 * t2);
        const double r = e - fit.coefficient * x;
        ss += r * r;
    }
    const auto n = t2star_error_pairs.size();
    fit.sigma = n > 1 ? std::sqrt(ss / (static_cast<double>(n) - 1.0) / sxx) : 0.0;
    return fit;
}

void CoherenceBudget::complete() {
    if (!tau_gr && t2_star && t2_prime && t1)
        tau_gr = combine_coherence(*t2_star, *t2_prime, *t1);
    if (!t2_spin_echo && t2_prime && t1)
        t2_spin_echo = 1.0 / (1.0 / *t2_prime + 1.0 / (2.0 * *t1));
    if (!t2_star && tau_gr && t2_spin_echo)
        t2_star = t2_star_from_echo(*tau_gr, *t2_spin_echo);
    if (!t2_prime && t2_spin_echo && t1)
        t2_prime = t2_prime_from_echo(*t2_spin_echo, *t1);
    if (!tau_gr && t2_star && t2_spin_echo)
        tau_gr = 1.0 / (1.0 / *t2_star + 1.0 / *t2_spin_echo);
}

double CoherenceBudget::consistency_residual() const {
    if (!(t2_star && t2_prime && t1 && tau_gr))
        return 0.0;
    const double lhs = 1.0 / *tau_gr;
    const double rhs = 1.0 / *t2_star + 1.0 / *t2_prime + 1.0 / (2.0 * *t1);
    return std::abs(lhs - rhs) / lhs;
}

} // namespace rydsim
