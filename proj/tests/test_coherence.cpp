#include <doctest.h>

#include <cmath>

#include "rydsim/atom_models.hpp"
#include "rydsim/coherence.hpp"
#include "rydsim/noise.hpp"

using namespace rydsim;
using constants::two_pi;

TEST_CASE("combine_coherence") {
    CHECK(combine_coherence(12.7e-6, 74e-6, 122e-6) == doctest::Approx(10.379e-6).epsilon(1e-3));
    // single-channel limit
    CHECK(combine_coherence(12.7e-6, 1e6, 1e6) == doctest::Approx(12.7e-6).epsilon(1e-4));
    // all equal: tau = 2x/5
    CHECK(combine_coherence(1e-5, 1e-5, 1e-5) == doctest::Approx(0.4e-5).epsilon(1e-12));
    CHECK_THROWS_AS(combine_coherence(-1.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("extract_coherence") {
    const auto full = extract_coherence(10.0e-6, 57e-6, 122e-6);
    CHECK(full.t2_star == doctest::Approx(12.128e-6).epsilon(1e-3));
    CHECK(full.t2_prime == doctest::Approx(74.375e-6).epsilon(1e-3));
    // paper-style partial application
    CHECK(t2_prime_from_echo(57e-6, 122e-6) == doctest::Approx(74.4e-6).epsilon(0.01));

    CHECK_THROWS_WITH_AS(extract_coherence(57e-6, 57e-6, 122e-6),
                         "inconsistent budget: requires tau_gr < t2_spin_echo", ValidationError);
    CHECK_THROWS_WITH_AS(extract_coherence(10e-6, 250e-6, 122e-6),
                         "inconsistent budget: requires t2_spin_echo < 2*t1", ValidationError);
}

TEST_CASE("round trip: combine after extract restores tau_gr") {
    ShotRng rng(123, 0);
    for (int i = 0; i < 50; ++i) {
        const double t1 = 50e-6 + 200e-6 * rng.uniform();
        const double t2p = 20e-6 + 100e-6 * rng.uniform();
        const double t2s = 5e-6 + 20e-6 * rng.uniform();
        const double tau = combine_coherence(t2s, t2p, t1);
        const double t2sp = 1.0 / (1.0 / t2p + 1.0 / (2.0 * t1));
        const auto back = extract_coherence(tau, t2sp, t1);
        CHECK(std::abs(combine_coherence(back.t2_star, back.t2_prime, t1) - tau) < 1e-9 * tau);
    }
}

TEST_CASE("Doppler dephasing time estimate") {
    AtomPhysicalParams atom;
    const double t2d = estimate_t2_doppler(5.2e-6, atom.k_eff(), atom.mass);
    CHECK(t2d == doctest::Approx(12.6e-6).epsilon(0.02));
    CHECK(estimate_t2_doppler(4.0 * 5.2e-6, atom.k_eff(), atom.mass) == doctest::Approx(t2d / 2.0).epsilon(1e-12));
    CHECK(estimate_t2_doppler(5.2e-6, 2.0 * atom.k_eff(), atom.mass) == doctest::Approx(t2d / 2.0).epsilon(1e-12));
}

TEST_CASE("ground dephasing time estimate") {
    const double t2 = estimate_t2_ground(5.2e-6, 3.85e-4);
    CHECK(t2 == doctest::Approx(7.4e-3).epsilon(0.01));
    CHECK(estimate_t2_ground(2.0 * 5.2e-6, 3.85e-4) == doctest::Approx(t2 / 2.0).epsilon(1e-12));
    CHECK(estimate_t2_ground(5.2e-6, 2.0 * 3.85e-4) == doctest::Approx(t2 / 2.0).epsilon(1e-12));
}

TEST_CASE("off-resonant scattering lifetime estimate") {
    const double with_607 = estimate_scatter_lifetime(two_pi * 5.7e9, two_pi * 62e6, two_pi * 6.07e6);
    CHECK(with_607 == doctest::Approx(886e-6).epsilon(0.01));
    const double with_572 = estimate_scatter_lifetime(two_pi * 5.7e9, two_pi * 62e6, two_pi * 5.72e6);
    CHECK(with_572 == doctest::Approx(940e-6).epsilon(0.01));
    CHECK(estimate_scatter_lifetime(two_pi * 5.7e9, 2.0 * two_pi * 62e6, two_pi * 6.07e6) ==
          doctest::Approx(with_607 / 4.0).epsilon(1e-12));
}

TEST_CASE("lifetime combination") {
    const double channels[] = {209e-6, 940e-6};
    CHECK(combine_lifetimes(channels) == doctest::Approx(170.9e-6).epsilon(0.005));
    const double single[] = {209e-6};
    CHECK(combine_lifetimes(single) == doctest::Approx(209e-6).epsilon(1e-12));
    const double pair[] = {100e-6, 100e-6};
    CHECK(combine_lifetimes(pair) == doctest::Approx(50e-6).epsilon(1e-12));
}

TEST_CASE("gate error law") {
    CHECK(error_from_t2star(12.6) == doctest::Approx(5.27e-3).epsilon(2e-3));
    CHECK(error_from_t2star(1e6) < 1e-12);

    std::vector<std::pair<double, double>> pairs;
    for (double t2 : {4.0, 6.0, 9.0, 14.0, 20.0})
        pairs.emplace_back(t2, error_from_t2star(t2));
    const auto fit = fit_error_law(pairs);
    CHECK(fit.coefficient == doctest::Approx(0.836).epsilon(1e-9));
    CHECK(fit.sigma < 1e-9);
}

TEST_CASE("coherence budget completion and consistency") {
    CoherenceBudget b;
    b.t2_spin_echo = 57e-6;
    b.t1 = 122e-6;
    b.tau_gr = 10.0e-6;
    b.complete();
    REQUIRE(b.t2_prime.has_value());
    REQUIRE(b.t2_star.has_value());
    CHECK(*b.t2_prime == doctest::Approx(74.4e-6).epsilon(0.01));
    CHECK(*b.t2_star == doctest::Approx(12.128e-6).epsilon(1e-3));
    CHECK(b.consistency_residual() < 1e-6);

    CoherenceBudget fwd;
    fwd.t2_star = 12.7e-6;
    fwd.t2_prime = 74e-6;
    fwd.t1 = 122e-6;
    fwd.complete();
    REQUIRE(fwd.tau_gr.has_value());
    CHECK(*fwd.tau_gr == doctest::Approx(10.38e-6).epsilon(1e-3));
    CHECK(*fwd.tau_gr >= 9.1e-6);
    CHECK(*fwd.tau_gr <= 10.9e-6);
}
