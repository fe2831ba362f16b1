#pragma once

#include <optional>
#include <vector>

#include "rydsim/constants.hpp"
#include "rydsim/quantum.hpp"

namespace rydsim {

/// Static properties of the qubit atom and its excitation geometry. Defaults
/// follow the 87Rb two-photon setup (780 nm + 480 nm, counter-propagating).
struct AtomPhysicalParams {
    double mass = constants::rb87_mass;       // kg
    double wavelength_red = 780e-9;           // m
    double wavelength_blue = 480e-9;          // m
    bool counter_propagating = true;
    double gamma_p = constants::two_pi * 6.07e6; // rad/s, intermediate |p> linewidth
    double rydberg_lifetime = 209e-6;            // s
    double branching_to_dark = 0.5;              // fraction of |p> decay to |g'>
    double single_photon_wavelength = 297e-9;    // m, used by single-photon gate studies

    /// Effective two-photon wave vector (rad/m); difference of the two wave
    /// numbers in counter-propagating geometry, sum otherwise.
    double k_eff() const;
    double k_single() const { return constants::two_pi / single_photon_wavelength; }

    void validate() const;
};

struct DriveParams {
    double rabi = 0.0;     // rad/s
    double detuning = 0.0; // rad/s
    double phase = 0.0;    // rad

    void validate() const;
};

/// Adiabatic elimination of the intermediate level: effective two-photon Rabi
/// frequency and the differential AC-Stark shift of the |1>-|r> transition.
struct TwoPhotonReduction {
    double effective_rabi = 0.0;          // rad/s
    double differential_stark_shift = 0.0; // rad/s
};

TwoPhotonReduction reduce_two_photon(const DriveParams& red, const DriveParams& blue, double delta1);

/// Resonant-frame two-level system, H = (Omega/2)(cos phi sx + sin phi sy) - delta |e><e|.
struct TwoLevelModel {
    LevelBasis basis;
    DriveParams drive;

    HamiltonianSegment pulse(double duration) const { return pulse(duration, 0.0); }
    HamiltonianSegment pulse(double duration, double phase_offset, double extra_detuning = 0.0,
                             double rabi_scale = 1.0) const;
    /// Drive off; detuning (plus any shot offset) still acts on |e>.
    HamiltonianSegment wait(double duration, double extra_detuning = 0.0) const;
};

TwoLevelModel build_two_level(const DriveParams& drive,
                              std::vector<std::string> labels = {"g", "e"});

/// Four-level ladder {1, p, r, g'} driven by red (1-p) and blue (p-r) lasers.
/// Collapse operators: |p> -> |1| and |p> -> |g'> splitting gamma_p by the
/// branching ratio, plus |r> -> |1> at the inverse Rydberg lifetime.
struct LadderModel {
    LevelBasis basis;
    DriveParams red;
    DriveParams blue;
    AtomPhysicalParams atom;
    double two_photon_detuning = 0.0; // rad/s on |r>

    HamiltonianSegment drive(double duration, double red_scale = 1.0, double blue_scale = 1.0,
                             double extra_two_photon_detuning = 0.0) const;
    /// Both lasers off; only detuning phases evolve.
    HamiltonianSegment wait(double duration, double extra_two_photon_detuning = 0.0) const;
    std::vector<CollapseOperator> collapse_operators() const;
};

LadderModel build_ladder_4level(const DriveParams& red, const DriveParams& blue,
                                const AtomPhysicalParams& atom, double two_photon_detuning);

/// Two-photon detuning that makes the ladder resonant at nominal amplitudes
/// (cancels the differential Stark shift).
double stark_compensated_detuning(const DriveParams& red, const DriveParams& blue, double delta1,
                                  double bare_two_photon_detuning = 0.0);

/// Which drives act during a two-atom segment and with what phase offsets.
struct TwoAtomPulse {
    bool control_ryd = false;
    bool target_ryd = false;
    bool control_gnd = false;
    bool target_gnd = false;
    double duration = 0.0;
    double control_phase = 0.0;
    double target_phase = 0.0;
    double control_gnd_phase = 0.0;
    double target_gnd_phase = 0.0;
};

/// Two three-level atoms {0,1,r} x {0,1,r} with a blockade shift B on |rr>.
/// Rydberg drives couple 1-r, ground drives couple 0-1. Per-shot detuning
/// offsets model the quasi-static Doppler shift of each atom.
struct TwoAtomBlockadeModel {
    LevelBasis basis;
    std::optional<DriveParams> control_drive;
    std::optional<DriveParams> target_drive;
    DriveParams gnd_drive;
    double blockade = 0.0;              // rad/s on |rr>
    double control_detuning_offset = 0.0;
    double target_detuning_offset = 0.0;

    HamiltonianSegment segment(const TwoAtomPulse& pulse) const;
};

TwoAtomBlockadeModel build_two_atom_blockade(std::optional<DriveParams> control_drive,
                                             std::optional<DriveParams> target_drive, double blockade);

/// Survival probability seen by the recapture detector: ground atoms are kept
/// with efficiency p1d, Rydberg atoms are removed with efficiency prd (so a
/// Rydberg atom is miscounted as surviving with probability p1d - prd).
/// Result is clipped to [0, 1].
double detection_model(double ground_population, double p1d, double prd);

/// Closed form for the pi-pulse-train calibration curve,
/// P(n) = p1d - prd * pre^n, clipped at zero.
double pi_train_survival(double p1d, double prd, double pre, int n);

} // namespace rydsim
