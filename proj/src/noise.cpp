#include "rydsim/noise.hpp"

#include <cmath>

#include "rydsim/errors.hpp"

namespace rydsim {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t ShotRng::mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed;
    std::uint64_t a = splitmix64(x);
    x ^= stream * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64(x);
    return a ^ (b + 0x9e3779b97f4a7c15ULL);
}

ShotRng::ShotRng(std::uint64_t seed, std::uint64_t stream) : state_(mix(seed, stream)) {
    if (state_ == 0)
        state_ = 0x853c49e6748fea9bULL;
}

std::uint64_t ShotRng::next_u64() {
    return splitmix64(state_);
}

double ShotRng::uniform() {
    // 53-bit mantissa, strictly inside (0, 1).
    const std::uint64_t bits = next_u64() >> 11;
    double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    return u;
}

double ShotRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = constants::two_pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

void NoiseSpec::validate() const {
    if (temperature < 0.0)
        throw ValidationError("NoiseSpec: temperature must be non-negative");
    if (mass <= 0.0)
        throw ValidationError("NoiseSpec: mass must be positive");
    if (k_eff < 0.0)
        throw ValidationError("NoiseSpec: k_eff must be non-negative");
    for (const auto& [name, sn] : rabi_sigmas) {
        if (sn.first < 0.0)
            throw ValidationError("NoiseSpec: rabi sigma for '" + name + "' must be non-negative");
        if (sn.first > 0.0 && sn.second <= 0.0)
            throw ValidationError("NoiseSpec: rabi nominal for '" + name + "' must be positive");
    }
}

double ShotSample::scale(const std::string& drive) const {
    const auto it = rabi_scale.find(drive);
    return it == rabi_scale.end() ? 1.0 : it->second;
}

double doppler_sigma(double temperature, double k_eff, double mass) {
    if (temperature < 0.0)
        throw ValidationError("doppler_sigma: temperature must be non-negative");
    if (mass <= 0.0)
        throw ValidationError("doppler_sigma: mass must be positive");
    return k_eff * std::sqrt(constants::k_boltzmann * temperature / mass);
}

ShotSample sample_shot(const NoiseSpec& spec, std::uint64_t seed, std::uint64_t shot_index) {
    spec.validate();
    ShotRng rng(seed, shot_index);
    ShotSample s;
    s.shot_index = shot_index;

    const double sigma_v =
        spec.temperature > 0.0 ? std::sqrt(constants::k_boltzmann * spec.temperature / spec.mass) : 0.0;
    for (auto& v : s.velocity)
        v = sigma_v * rng.normal();
    for (auto& v : s.velocity_target)
        v = sigma_v * rng.normal();

    // Trap energy of a 3D harmonic oscillator: sum of three exponential
    // quadrature pairs, Gamma(3, kB T).
    double e = 0.0;
    for (int i = 0; i < 3; ++i)
        e -= std::log(rng.uniform());
    s.thermal_energy = e * constants::k_boltzmann * spec.temperature;

    for (const auto& [name, sn] : spec.rabi_sigmas) {
        const auto [sigma_abs, nominal] = sn;
        double mult = 1.0;
        if (sigma_abs > 0.0) {
            const double rel = sigma_abs / nominal;
            mult = 1.0 + rel * rng.normal();
            while (mult <= 0.0)
                mult = 1.0 + rel * rng.normal();
        }
        s.rabi_scale[name] = spec.rabi_enabled ? mult : 1.0;
    }

    if (spec.doppler_enabled) {
        s.doppler_detuning = spec.k_eff * s.velocity[0];
        s.doppler_detuning_target = spec.k_eff * s.velocity_target[0];
    } else {
        s.velocity = {0.0, 0.0, 0.0};
        s.velocity_target = {0.0, 0.0, 0.0};
    }
    return s;
}

} // namespace rydsim
