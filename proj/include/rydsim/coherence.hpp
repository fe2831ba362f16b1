#pragma once

#include <optional>
#include <span>

namespace rydsim {

/// 1/tau = 1/T2* + 1/T2' + 1/(2 T1).
double combine_coherence(double t2_star, double t2_prime, double t1);

struct ExtractedCoherence {
    double t2_star = 0.0;
    double t2_prime = 0.0;
};

/// Inverts the coherence budget: T2* = (1/tau - 1/T2sp)^-1 and
/// T2' = (1/T2sp - 1/(2 T1))^-1. Throws ValidationError naming the violated
/// ordering when the inputs are inconsistent.
ExtractedCoherence extract_coherence(double tau_gr, double t2_spin_echo, double t1);

double t2_star_from_echo(double tau_gr, double t2_spin_echo);
double t2_prime_from_echo(double t2_spin_echo, double t1);

/// Doppler-limited inhomogeneous dephasing time sqrt(2)/(k_eff dv) with
/// dv = sqrt(kB T / m); satisfies t2 * doppler_sigma == sqrt(2) exactly.
double estimate_t2_doppler(double temperature, double k_eff, double mass);

/// Trap-light-shift-limited ground dephasing time 0.97 * 2 hbar / (eta kB T).
double estimate_t2_ground(double temperature, double eta);

/// Off-resonant scattering lifetime 4 Delta^2 / (Omega^2 Gamma).
double estimate_scatter_lifetime(double delta1, double omega, double gamma);

/// Harmonic combination (sum of rates) of independent decay channels.
double combine_lifetimes(std::span<const double> lifetimes);

/// Gate-error estimate E = 0.836 (1/T2*)^2 for the 2 us pi-gap-pi gate;
/// t2_star in microseconds.
double error_from_t2star(double t2_star_us);

struct ErrorLawFit {
    double coefficient = 0.0;
    double sigma = 0.0;
};

/// Regression of E against (1/T2*)^2 through the origin. Pass t2_star in
/// microseconds to get a coefficient comparable with error_from_t2star.
ErrorLawFit fit_error_law(std::span<const std::pair<double, double>> t2star_error_pairs);

/// The (T2*, T2', T1, tau_gr, T2sp) quintuple; validate() enforces the
/// combine/extract algebra on whichever fields are populated.
struct CoherenceBudget {
    std::optional<double> t2_star;
    std::optional<double> t2_prime;
    std::optional<double> t1;
    std::optional<double> tau_gr;
    std::optional<double> t2_spin_echo;

    /// Fills derivable fields from the populated ones.
    void complete();
    /// Relative inconsistency of Eq-style closure; 0 when underdetermined.
    double consistency_residual() const;
};

} // namespace rydsim
