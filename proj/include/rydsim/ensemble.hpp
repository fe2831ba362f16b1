#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rydsim/noise.hpp"

namespace rydsim {

struct EnsembleResult {
    std::vector<double> scan_values;
    std::vector<double> mean;
    std::vector<double> standard_error;
    int n_shots = 0;
    std::uint64_t seed = 0;

    bool operator==(const EnsembleResult&) const = default;
};

/// One Monte-Carlo observable curve: given a frozen noise draw, produce the
/// observable at every scan point. Must be pure (no shared mutable state).
using ShotCurve = std::function<std::vector<double>(const ShotSample&)>;

/// Averages `curve` over `n_shots` quasi-static noise draws. Shots are
/// evaluated in parallel (OpenMP) but accumulated serially in shot-index
/// order, so the result is bit-identical for any thread count and matches
/// run_ensemble_serial exactly.
EnsembleResult run_ensemble(const std::vector<double>& scan_values, const ShotCurve& curve,
                            const NoiseSpec& noise, int n_shots, std::uint64_t seed);

/// Reference implementation: plain sequential loop, kept for testing and for
/// the benchmark comparison.
EnsembleResult run_ensemble_serial(const std::vector<double>& scan_values, const ShotCurve& curve,
                                   const NoiseSpec& noise, int n_shots, std::uint64_t seed);

} // namespace rydsim
