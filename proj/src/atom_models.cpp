#include "rydsim/atom_models.hpp"

#include <cmath>

namespace rydsim {

namespace {

// (Omega/2) e^{-i phi} |a><b| + h.c.
void add_coupling(CMatrix& h, int a, int b, double rabi, double phase) {
    const Complex half = 0.5 * rabi * std::exp(Complex(0.0, -phase));
    h(a, b) += half;
    h(b, a) += std::conj(half);
}

} // namespace

double AtomPhysicalParams::k_eff() const {
    const double kr = constants::two_pi / wavelength_red;
    const double kb = constants::two_pi / wavelength_blue;
    return counter_propagating ? std::abs(kb - kr) : (kb + kr);
}

void AtomPhysicalParams::validate() const {
    if (mass <= 0.0)
        throw ValidationError("AtomPhysicalParams: mass must be positive");
    if (wavelength_red <= 0.0 || wavelength_blue <= 0.0 || single_photon_wavelength <= 0.0)
        throw ValidationError("AtomPhysicalParams: wavelengths must be positive");
    if (gamma_p < 0.0)
        throw ValidationError("AtomPhysicalParams: gamma_p must be non-negative");
    if (rydberg_lifetime <= 0.0)
        throw ValidationError("AtomPhysicalParams: rydberg_lifetime must be positive");
    if (branching_to_dark < 0.0 || branching_to_dark > 1.0)
        throw ValidationError("AtomPhysicalParams: branching_to_dark must lie in [0, 1]");
}

void DriveParams::validate() const {
    if (rabi < 0.0)
        throw ValidationError("DriveParams: rabi must be non-negative");
}

TwoPhotonReduction reduce_two_photon(const DriveParams& red, const DriveParams& blue, double delta1) {
    if (delta1 == 0.0)
        throw ValidationError("reduce_two_photon: one-photon detuning must be nonzero");
    TwoPhotonReduction r;
    r.effective_rabi = red.rabi * blue.rabi / (2.0 * std::abs(delta1));
    r.differential_stark_shift = (red.rabi * red.rabi - blue.rabi * blue.rabi) / (4.0 * delta1);
    return r;
}

HamiltonianSegment TwoLevelModel::pulse(double duration, double phase_offset, double extra_detuning,
                                        double rabi_scale) const {
    CMatrix h = CMatrix::Zero(2, 2);
    add_coupling(h, 0, 1, drive.rabi * rabi_scale, drive.phase + phase_offset);
    h(1, 1) -= drive.detuning + extra_detuning;
    return {h, duration};
}

HamiltonianSegment TwoLevelModel::wait(double duration, double extra_detuning) const {
    CMatrix h = CMatrix::Zero(2, 2);
    h(1, 1) -= drive.detuning + extra_detuning;
    return {h, duration};
}

TwoLevelModel build_two_level(const DriveParams& drive, std::vector<std::string> labels) {
    drive.validate();
    if (labels.size() != 2)
        throw ValidationError("build_two_level: exactly two labels required");
    return {LevelBasis(std::move(labels)), drive};
}

HamiltonianSegment LadderModel::drive(double duration, double red_scale, double blue_scale,
                                      double extra_two_photon_detuning) const {
    CMatrix h = CMatrix::Zero(4, 4);
    add_coupling(h, 0, 1, red.rabi * red_scale, red.phase);
    add_coupling(h, 1, 2, blue.rabi * blue_scale, blue.phase);
    h(1, 1) -= red.detuning;
    h(2, 2) -= two_photon_detuning + extra_two_photon_detuning;
    return {h, duration};
}

HamiltonianSegment LadderModel::wait(double duration, double extra_two_photon_detuning) const {
    CMatrix h = CMatrix::Zero(4, 4);
    h(1, 1) -= red.detuning;
    h(2, 2) -= two_photon_detuning + extra_two_photon_detuning;
    return {h, duration};
}

std::vector<CollapseOperator> LadderModel::collapse_operators() const {
    std::vector<CollapseOperator> ops;
    const int i1 = 0, ip = 1, ir = 2, ig = 3;
    const double to_bright = (1.0 - atom.branching_to_dark) * atom.gamma_p;
    const double to_dark = atom.branching_to_dark * atom.gamma_p;
    if (to_bright < 0.0 || to_dark < 0.0)
        throw ValidationError("LadderModel: negative decay rate");
    if (to_bright > 0.0) {
        CMatrix m = CMatrix::Zero(4, 4);
        m(i1, ip) = std::sqrt(to_bright);
        ops.push_back({m, "p -> 1 scattering"});
    }
    if (to_dark > 0.0) {
        CMatrix m = CMatrix::Zero(4, 4);
        m(ig, ip) = std::sqrt(to_dark);
        ops.push_back({m, "p -> g' scattering"});
    }
    {
        CMatrix m = CMatrix::Zero(4, 4);
        m(i1, ir) = std::sqrt(1.0 / atom.rydberg_lifetime);
        ops.push_back({m, "Rydberg decay"});
    }
    return ops;
}

LadderModel build_ladder_4level(const DriveParams& red, const DriveParams& blue,
                                const AtomPhysicalParams& atom, double two_photon_detuning) {
    red.validate();
    blue.validate();
    atom.validate();
    // |Delta| >> Gamma_p is assumed by the adiabatic picture; the full model
    // stays valid outside it, so this is not enforced.
    return {LevelBasis({"1", "p", "r", "g'"}), red, blue, atom, two_photon_detuning};
}

double stark_compensated_detuning(const DriveParams& red, const DriveParams& blue, double delta1,
                                  double bare_two_photon_detuning) {
    const auto reduction = reduce_two_photon(red, blue, delta1);
    return bare_two_photon_detuning - reduction.differential_stark_shift;
}

namespace {

LevelBasis two_atom_basis() {
    std::vector<std::string> labels;
    for (const char* c : {"0", "1", "r"})
        for (const char* t : {"0", "1", "r"})
            labels.push_back(std::string(c) + t);
    return LevelBasis(labels);
}

} // namespace

HamiltonianSegment TwoAtomBlockadeModel::segment(const TwoAtomPulse& pulse) const {
    const int d = 3;
    CMatrix hc = CMatrix::Zero(d, d);
    CMatrix ht = CMatrix::Zero(d, d);
    // indices within one atom: 0 -> |0>, 1 -> |1>, 2 -> |r>
    if (pulse.control_ryd && control_drive)
        add_coupling(hc, 1, 2, control_drive->rabi, control_drive->phase + pulse.control_phase);
    if (pulse.target_ryd && target_drive)
        add_coupling(ht, 1, 2, target_drive->rabi, target_drive->phase + pulse.target_phase);
    if (pulse.control_gnd) {
        add_coupling(hc, 0, 1, gnd_drive.rabi, gnd_drive.phase + pulse.control_gnd_phase);
        hc(1, 1) -= gnd_drive.detuning;
    }
    if (pulse.target_gnd) {
        add_coupling(ht, 0, 1, gnd_drive.rabi, gnd_drive.phase + pulse.target_gnd_phase);
        ht(1, 1) -= gnd_drive.detuning;
    }
    // The rotating frame follows the Rydberg laser, so its detuning (static
    // part plus the per-shot Doppler shift) acts on |r> during gaps as well.
    if (control_drive)
        hc(2, 2) -= control_drive->detuning;
    if (target_drive)
        ht(2, 2) -= target_drive->detuning;
    hc(2, 2) -= control_detuning_offset;
    ht(2, 2) -= target_detuning_offset;

    const CMatrix id = CMatrix::Identity(d, d);
    CMatrix h = kron(hc, id) + kron(id, ht);
    const int irr = 2 * d + 2;
    h(irr, irr) += blockade;
    return {h, pulse.duration};
}

TwoAtomBlockadeModel build_two_atom_blockade(std::optional<DriveParams> control_drive,
                                             std::optional<DriveParams> target_drive, double blockade) {
    if (blockade < 0.0)
        throw ValidationError("build_two_atom_blockade: blockade must be non-negative");
    if (control_drive)
        control_drive->validate();
    if (target_drive)
        target_drive->validate();
    TwoAtomBlockadeModel m{two_atom_basis(), std::move(control_drive), std::move(target_drive), {}, blockade};
    return m;
}

double detection_model(double ground_population, double p1d, double prd) {
    if (ground_population < -1e-9 || ground_population > 1.0 + 1e-9)
        throw ValidationError("detection_model: ground_population outside [0, 1]");
    if (p1d < 0.0 || p1d > 1.0 || prd < 0.0 || prd > 1.0)
        throw ValidationError("detection_model: efficiencies must lie in [0, 1]");
    const double g = std::clamp(ground_population, 0.0, 1.0);
    const double observed = p1d * g + (p1d - prd) * (1.0 - g);
    return std::clamp(observed, 0.0, 1.0);
}

double pi_train_survival(double p1d, double prd, double pre, int n) {
    if (p1d < 0.0 || p1d > 1.0 || prd < 0.0 || prd > 1.0 || pre < 0.0 || pre > 1.0)
        throw ValidationError("pi_train_survival: probabilities must lie in [0, 1]");
    if (n < 0)
        throw ValidationError("pi_train_survival: n must be non-negative");
    return std::clamp(p1d - prd * std::pow(pre, n), 0.0, 1.0);
}

} // namespace rydsim
