#include "rydsim/ensemble.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rydsim/errors.hpp"

namespace rydsim {

namespace {

EnsembleResult reduce_fixed_order(const std::vector<double>& scan_values,
                                  const std::vector<std::vector<double>>& per_shot, std::uint64_t seed) {
    const int n_shots = static_cast<int>(per_shot.size());
    const int n_points = static_cast<int>(scan_values.size());
    EnsembleResult out;
    out.scan_values = scan_values;
    out.n_shots = n_shots;
    out.seed = seed;
    out.mean.assign(n_points, 0.0);
    out.standard_error.assign(n_points, 0.0);

    for (int p = 0; p < n_points; ++p) {
        double sum = 0.0;
        for (int s = 0; s < n_shots; ++s)
            sum += per_shot[s][p];
        const double mean = sum / n_shots;
        double sq = 0.0;
        for (int s = 0; s < n_shots; ++s) {
            const double d = per_shot[s][p] - mean;
            sq += d * d;
        }
        out.mean[p] = mean;
        out.standard_error[p] = n_shots > 1 ? std::sqrt(sq / (static_cast<double>(n_shots) * (n_shots - 1))) : 0.0;
    }
    return out;
}

std::vector<std::vector<double>> evaluate_shots(const std::vector<double>& scan_values, const ShotCurve& curve,
                                                const NoiseSpec& noise, int n_shots, std::uint64_t seed,
                                                bool parallel) {
    if (n_shots < 1)
        throw ValidationError("run_ensemble: n_shots must be >= 1");
    const int n_points = static_cast<int>(scan_values.size());
    std::vector<std::vector<double>> per_shot(n_shots);
    std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(static) if (parallel)
    for (int s = 0; s < n_shots; ++s) {
        try {
            const ShotSample sample = sample_shot(noise, seed, static_cast<std::uint64_t>(s));
            per_shot[s] = curve(sample);
            if (static_cast<int>(per_shot[s].size()) != n_points)
                throw NumericalError("shot curve returned " + std::to_string(per_shot[s].size()) +
                                     " values, expected " + std::to_string(n_points));
        } catch (...) {
#pragma omp critical
            if (!failure) {
                try {
                    std::throw_with_nested(NumericalError("shot " + std::to_string(s) + " failed"));
                } catch (...) {
                    failure = std::current_exception();
                }
            }
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return per_shot;
}

} // namespace

EnsembleResult run_ensemble(const std::vector<double>& scan_values, const ShotCurve& curve,
                            const NoiseSpec& noise, int n_shots, std::uint64_t seed) {
    return reduce_fixed_order(scan_values, evaluate_shots(scan_values, curve, noise, n_shots, seed, true), seed);
}

EnsembleResult run_ensemble_serial(const std::vector<double>& scan_values, const ShotCurve& curve,
                                   const NoiseSpec& noise, int n_shots, std::uint64_t seed) {
    return reduce_fixed_order(scan_values, evaluate_shots(scan_values, curve, noise, n_shots, seed, false), seed);
}

} // namespace rydsim
