#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rydsim/atom_models.hpp"
#include "rydsim/ensemble.hpp"
#include "rydsim/quantum.hpp"

namespace rydsim {

enum class ExperimentKind {
    RabiScan,
    GroundRamsey,
    GrRamsey,
    SpinEcho,
    T1TwoPi,
    PiTrain,
    ControlFringe,
    CzGate,
    CzDetuningScan,
    TemperatureSweep,
    BellSequence,
};

/// CLI spelling ("rabi-gr", "ramsey-gg", ...).
std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

enum class TransitionGeometry { TwoPhoton, SinglePhoton, Microwave };

enum class ObservableMode { Fringe, Contrast };

struct ScanSpec {
    std::string variable;
    std::vector<double> values;

    void validate() const; // non-empty, strictly increasing
};

struct TwoPhotonConfig {
    DriveParams red;  // red.detuning is the one-photon detuning Delta
    DriveParams blue;
    bool compensate_stark = true;
};

struct NoiseConfig {
    double temperature = 0.0;  // K
    double sigma_red = 0.0;    // rad/s, absolute deviation of the red Rabi frequency
    double sigma_blue = 0.0;   // rad/s
    double sigma_drive = 0.0;  // rad/s, directly on the effective drive
    bool doppler = true;
    bool rabi = true;
    bool stark_residual = false; // derive per-shot two-photon detuning shifts from the scaled amplitudes
};

/// Lindblad channels of the effective ground-Rydberg two-level picture.
struct DecayConfig {
    bool enabled = false;
    std::vector<double> lifetimes;       // r -> 1 channels, combined harmonically
    std::optional<double> t2_prime;      // pure dephasing of |r>, coherence decays as exp(-t/T2')
};

struct DetectionConfig {
    bool enabled = false;
    double p1d = 1.0;
    double prd = 1.0;
};

/// Quasi-static dephasing of the |0>-|1> qubit during ground Ramsey runs.
struct GroundDephasingConfig {
    enum class Model { None, Gaussian, TrapLightShift };
    Model model = Model::None;
    double sigma = 0.0;   // rad/s, Gaussian model
    double eta = 3.85e-4; // differential trap-shift parameter, TrapLightShift model
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::RabiScan;
    int shots = 500;
    std::uint64_t seed = 0;
    ScanSpec scan;

    AtomPhysicalParams atom;
    TransitionGeometry geometry = TransitionGeometry::TwoPhoton;
    DriveParams drive;     // effective ground-Rydberg drive (or microwave qubit drive)
    DriveParams gnd_drive; // ground-qubit drive inside composite sequences
    std::optional<TwoPhotonConfig> two_photon;
    NoiseConfig noise;
    DecayConfig decay;
    DetectionConfig detection;
    GroundDephasingConfig ground_dephasing;

    double blockade = 0.0;       // rad/s
    ObservableMode observable = ObservableMode::Fringe;
    double fringe_offset = 0.0;  // rad/s frame offset applied during waits
    int phase_points = 8;        // analysis-phase grid of the contrast mode
    std::vector<double> t_values; // ControlFringe: fixed gaps T between Rydberg pulses
    double pre = 1.0;            // PiTrain: per-pulse excitation efficiency
    double readout_sigma = 0.0;  // PiTrain: per-point statistical noise

    void validate() const;

    /// Wave vector entering the Doppler channel for this geometry.
    double doppler_k() const;
    NoiseSpec make_noise_spec() const;
};

struct GateOutcome {
    CMatrix final_map;       // 4x4 on {|00>,|01>,|10>,|11>}
    Eigen::Vector4d leakage; // per input basis state
    double fidelity = 0.0;
    double error = 0.0;
};

struct ControlFringeResult {
    EnsembleResult contrast_vs_t;          // scan = T values, mean = fringe contrast
    std::vector<EnsembleResult> fringes;   // per T: ensemble fringe vs dt
};

struct TemperatureSweepRow {
    double temperature = 0.0;
    double t2_star = 0.0;    // s, from the Doppler-only Ramsey fit
    double mean_error = 0.0; // per-shot process error in the once-calibrated frame
    double error_stderr = 0.0;
    double mean_error_average = 0.0;   // average-gate-fidelity variant of mean_error
    double mean_error_optimized = 0.0; // per-shot error with per-shot phase re-optimization
    double error_of_mean_map = 0.0;    // error of the ensemble-averaged map
};

struct TemperatureSweepResult {
    std::vector<TemperatureSweepRow> rows;
};

struct BellResult {
    double p00 = 0.0;
    double p11 = 0.0;
    EnsembleResult parity_vs_phase;
    double parity_contrast = 0.0;
    double parity_contrast_sigma = 0.0;
    double fidelity = 0.0;
};

EnsembleResult run_rabi_scan(const ExperimentConfig& cfg);
EnsembleResult run_ground_ramsey(const ExperimentConfig& cfg);
EnsembleResult run_gr_ramsey(const ExperimentConfig& cfg);
EnsembleResult run_spin_echo(const ExperimentConfig& cfg);
EnsembleResult run_t1_two_pi(const ExperimentConfig& cfg);
EnsembleResult run_pi_train(const ExperimentConfig& cfg);
ControlFringeResult run_control_fringe(const ExperimentConfig& cfg);
GateOutcome run_cz_gate(const ExperimentConfig& cfg);
EnsembleResult run_cz_detuning_scan(const ExperimentConfig& cfg);
TemperatureSweepResult run_cz_temperature_sweep(const ExperimentConfig& cfg);
BellResult run_bell_sequence(const ExperimentConfig& cfg);

/// Single-qubit Z phases applied before comparing a map against CZ.
struct CzFramePhases {
    double theta_target = 0.0;
    double theta_control = 0.0;
};

/// Phase-calibrated gate fidelity: max over single-qubit Z phases and a
/// global phase of |Tr(CZ^dag D final_map)/4|^2. Optionally reports the
/// maximizing phases.
double cz_fidelity_phase_optimized(const CMatrix& final_map, CzFramePhases* phases = nullptr);
/// Process fidelity in a frozen frame: |Tr(CZ^dag D(frame) final_map)/4|^2.
double cz_fidelity_in_frame(const CMatrix& final_map, const CzFramePhases& frame);
/// Average gate fidelity in a frozen frame,
/// (Tr(M^dag M) + |Tr(CZ^dag D M)|^2) / (d^2 + d) with d = 4.
double cz_average_fidelity_in_frame(const CMatrix& final_map, const CzFramePhases& frame);

GateOutcome evaluate_cz_map(const TwoAtomBlockadeModel& model, double control_pi_time,
                            double target_pi_time);

} // namespace rydsim
