#include "rydsim/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "rydsim/coherence.hpp"
#include "rydsim/fitting.hpp"

namespace rydsim {

using constants::pi;
using constants::two_pi;

namespace {

const std::map<ExperimentKind, std::string> kKindNames = {
    {ExperimentKind::RabiScan, "rabi-gr"},
    {ExperimentKind::GroundRamsey, "ramsey-gg"},
    {ExperimentKind::GrRamsey, "ramsey-gr"},
    {ExperimentKind::SpinEcho, "spin-echo"},
    {ExperimentKind::T1TwoPi, "t1-2pi"},
    {ExperimentKind::PiTrain, "pi-train"},
    {ExperimentKind::ControlFringe, "control-fringe"},
    {ExperimentKind::CzGate, "cz-gate"},
    {ExperimentKind::CzDetuningScan, "cz-scan"},
    {ExperimentKind::TemperatureSweep, "temp-sweep"},
    {ExperimentKind::BellSequence, "bell"},
};

} // namespace

std::string to_string(ExperimentKind kind) {
    return kKindNames.at(kind);
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
    for (const auto& [kind, spelling] : kKindNames)
        if (spelling == name)
            return kind;
    throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

void ScanSpec::validate() const {
    if (values.empty())
        throw ConfigError("scan: grid must be non-empty");
    for (size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1]))
            throw ConfigError("scan: grid must be strictly increasing");
}

double ExperimentConfig::doppler_k() const {
    switch (geometry) {
    case TransitionGeometry::TwoPhoton: return atom.k_eff();
    case TransitionGeometry::SinglePhoton: return atom.k_single();
    case TransitionGeometry::Microwave: return 0.0;
    }
    return 0.0;
}

NoiseSpec ExperimentConfig::make_noise_spec() const {
    NoiseSpec spec;
    spec.temperature = noise.temperature;
    spec.mass = atom.mass;
    spec.k_eff = doppler_k();
    spec.doppler_enabled = noise.doppler;
    spec.rabi_enabled = noise.rabi;
    if (two_photon) {
        if (noise.sigma_red > 0.0)
            spec.rabi_sigmas["red"] = {noise.sigma_red, two_photon->red.rabi};
        if (noise.sigma_blue > 0.0)
            spec.rabi_sigmas["blue"] = {noise.sigma_blue, two_photon->blue.rabi};
    }
    if (noise.sigma_drive > 0.0)
        spec.rabi_sigmas["drive"] = {noise.sigma_drive, drive.rabi};
    return spec;
}

void ExperimentConfig::validate() const {
    atom.validate();
    drive.validate();
    gnd_drive.validate();
    if (shots < 1)
        throw ConfigError("shots must be >= 1");
    if (phase_points < 4)
        throw ConfigError("phase_points must be >= 4");
    if (detection.enabled &&
        (detection.p1d < 0.0 || detection.p1d > 1.0 || detection.prd < 0.0 || detection.prd > 1.0))
        throw ConfigError("detection: p1d and prd must lie in [0, 1]");
    for (double t : decay.lifetimes)
        if (!(t > 0.0))
            throw ConfigError("decay: lifetimes must be positive");
    if (decay.t2_prime && !(*decay.t2_prime > 0.0))
        throw ConfigError("decay: t2_prime must be positive");
    if (pre < 0.0 || pre > 1.0)
        throw ConfigError("pre must lie in [0, 1]");

    if (kind != ExperimentKind::CzGate)
        scan.validate();
    switch (kind) {
    case ExperimentKind::RabiScan:
        if (scan.values.front() < 0.0)
            throw ConfigError("rabi-gr: durations must be non-negative");
        if (drive.rabi <= 0.0 && !two_photon)
            throw ConfigError("rabi-gr: needs a drive or a two_photon block");
        break;
    case ExperimentKind::GroundRamsey:
        if (drive.rabi <= 0.0)
            throw ConfigError("ramsey-gg: drive.rabi must be positive");
        if (detection.enabled)
            throw ConfigError("ramsey-gg: the recapture detection model does not apply to ground runs");
        break;
    case ExperimentKind::GrRamsey:
    case ExperimentKind::SpinEcho:
    case ExperimentKind::T1TwoPi:
        if (drive.rabi <= 0.0)
            throw ConfigError(to_string(kind) + ": drive.rabi must be positive");
        if (scan.values.front() < 0.0)
            throw ConfigError(to_string(kind) + ": gaps must be non-negative");
        break;
    case ExperimentKind::PiTrain:
        for (double n : scan.values) {
            const int ni = static_cast<int>(std::lround(n));
            if (std::abs(n - ni) > 1e-9 || ni < 1 || ni % 2 == 0)
                throw ConfigError("pi-train: scan values must be odd positive integers");
        }
        if (!detection.enabled)
            throw ConfigError("pi-train: detection block required");
        break;
    case ExperimentKind::ControlFringe:
        if (drive.rabi <= 0.0 || gnd_drive.rabi <= 0.0)
            throw ConfigError("control-fringe: drive and gnd_drive must be positive");
        if (t_values.empty())
            throw ConfigError("control-fringe: t_values required");
        for (double t : t_values)
            if (t < 0.0)
                throw ConfigError("control-fringe: t_values must be non-negative");
        break;
    case ExperimentKind::CzGate:
    case ExperimentKind::CzDetuningScan:
        if (drive.rabi <= 0.0)
            throw ConfigError(to_string(kind) + ": drive.rabi must be positive");
        if (blockade < 0.0)
            throw ConfigError(to_string(kind) + ": blockade must be non-negative");
        break;
    case ExperimentKind::TemperatureSweep:
        if (drive.rabi <= 0.0 && !two_photon)
            throw ConfigError("temp-sweep: needs a drive or a two_photon block");
        if (scan.values.front() <= 0.0)
            throw ConfigError("temp-sweep: temperatures must be positive");
        break;
    case ExperimentKind::BellSequence:
        if (drive.rabi <= 0.0 || gnd_drive.rabi <= 0.0)
            throw ConfigError("bell: drive and gnd_drive must be positive");
        break;
    }
}

namespace {

// ---- per-shot effective-drive assembly -------------------------------------

struct ShotDrive {
    double rabi_scale = 1.0;
    double detuning_shift = 0.0; // rad/s added to the drive detuning
};

ShotDrive effective_gr_shot(const ExperimentConfig& cfg, const ShotSample& sample, bool target_atom = false) {
    ShotDrive sd;
    sd.detuning_shift = target_atom ? sample.doppler_detuning_target : sample.doppler_detuning;
    if (cfg.two_photon) {
        const double sr = sample.scale("red");
        const double sb = sample.scale("blue");
        sd.rabi_scale = sr * sb;
        if (cfg.noise.stark_residual) {
            DriveParams red = cfg.two_photon->red;
            DriveParams blue = cfg.two_photon->blue;
            const double delta1 = red.detuning;
            const double nominal = reduce_two_photon(red, blue, delta1).differential_stark_shift;
            red.rabi *= sr;
            blue.rabi *= sb;
            const double actual = reduce_two_photon(red, blue, delta1).differential_stark_shift;
            sd.detuning_shift += actual - nominal;
        }
    } else {
        sd.rabi_scale = sample.scale("drive");
    }
    return sd;
}

std::vector<CollapseOperator> effective_collapse(const ExperimentConfig& cfg, const LevelBasis& basis,
                                                 std::string_view ground, std::string_view rydberg) {
    std::vector<CollapseOperator> ops;
    if (!cfg.decay.enabled)
        return ops;
    const int ig = basis.index_of(ground);
    const int ir = basis.index_of(rydberg);
    const int d = basis.dimension();
    if (!cfg.decay.lifetimes.empty()) {
        const double t1 = combine_lifetimes(cfg.decay.lifetimes);
        CMatrix m = CMatrix::Zero(d, d);
        m(ig, ir) = std::sqrt(1.0 / t1);
        ops.push_back({m, "r -> ground decay"});
    }
    if (cfg.decay.t2_prime) {
        CMatrix m = CMatrix::Zero(d, d);
        m(ir, ir) = std::sqrt(2.0 / *cfg.decay.t2_prime);
        ops.push_back({m, "r dephasing"});
    }
    return ops;
}

double apply_detection(const ExperimentConfig& cfg, double ground_population) {
    if (!cfg.detection.enabled)
        return ground_population;
    return detection_model(ground_population, cfg.detection.p1d, cfg.detection.prd);
}

bool uniform_grid(const std::vector<double>& v) {
    if (v.size() < 3)
        return true;
    const double dt = v[1] - v[0];
    for (size_t i = 2; i < v.size(); ++i)
        if (std::abs((v[i] - v[i - 1]) - dt) > 1e-9 * std::max(std::abs(dt), 1e-300))
            return false;
    return true;
}

// Evolves psi/rho through increasing wait durations, invoking `record` at
// each scan point. `make_wait` returns the Hamiltonian of the free evolution.
template <typename State, typename Stepper, typename Record>
void scan_waits(State state, const std::vector<double>& gaps, Stepper step, Record record) {
    double t = 0.0;
    for (double gap : gaps) {
        const double dt = gap - t;
        if (dt > 0.0)
            step(state, dt);
        t = gap;
        record(state);
    }
}

// ---- generic two-level sequence engine (pure state or density matrix) ------

/// Pure-state or Lindblad evolution of one effective atom, chosen at runtime
/// by the presence of collapse operators.
class EffectiveAtom {
  public:
    EffectiveAtom(QuantumState initial, std::vector<CollapseOperator> collapse)
        : collapse_(std::move(collapse)), pure_(collapse_.empty()), psi_(std::move(initial)) {
        if (!pure_)
            rho_ = DensityMatrix::pure(psi_);
    }

    void apply(const HamiltonianSegment& seg) {
        if (seg.duration <= 0.0)
            return;
        if (pure_)
            psi_ = evolve_state(psi_, std::span(&seg, 1));
        else
            rho_ = evolve_density(*rho_, std::span(&seg, 1), collapse_);
    }

    double population(std::string_view label) const {
        if (pure_)
            return std::norm(psi_.amplitude(label));
        return rho_->population(label);
    }

  private:
    std::vector<CollapseOperator> collapse_;
    bool pure_;
    QuantumState psi_;
    std::optional<DensityMatrix> rho_;
};

TwoLevelModel shot_gr_model(const ExperimentConfig& cfg, const ShotDrive& sd) {
    DriveParams d = cfg.drive;
    d.rabi *= sd.rabi_scale;
    d.detuning += sd.detuning_shift;
    return build_two_level(d, {"1", "r"});
}

} // namespace

// ---- Rabi scan --------------------------------------------------------------

EnsembleResult run_rabi_scan(const ExperimentConfig& cfg) {
    cfg.validate();
    const NoiseSpec noise = cfg.make_noise_spec();
    const auto& durations = cfg.scan.values;

    ShotCurve curve;
    if (cfg.two_photon) {
        // Full four-level ladder; the scattering and Stark physics emerge from
        // the single-photon parameters.
        const TwoPhotonConfig tp = *cfg.two_photon;
        const double delta1 = tp.red.detuning;
        const double delta2 = tp.compensate_stark
                                  ? stark_compensated_detuning(tp.red, tp.blue, delta1, cfg.drive.detuning)
                                  : cfg.drive.detuning;
        const ExperimentConfig local = cfg;
        curve = [local, tp, delta1, delta2, durations](const ShotSample& shot) {
            DriveParams red = tp.red;
            DriveParams blue = tp.blue;
            red.rabi *= shot.scale("red");
            blue.rabi *= shot.scale("blue");
            LadderModel ladder = build_ladder_4level(red, blue, local.atom,
                                                     delta2 + shot.doppler_detuning);
            std::vector<CollapseOperator> collapse;
            if (local.decay.enabled)
                collapse = ladder.collapse_operators();

            std::vector<double> out;
            out.reserve(durations.size());
            const bool pure = collapse.empty();
            auto record_ground = [&](const auto& p) {
                // recaptured population: |1> and the dark ground state |g'>
                return p(0) + p(3);
            };
            if (pure) {
                CVector psi = QuantumState::basis_state(ladder.basis, "1").amplitudes;
                if (uniform_grid(durations) && durations.size() > 1) {
                    double t = 0.0;
                    std::optional<UnitaryPropagator> step;
                    for (double dur : durations) {
                        const double dt = dur - t;
                        if (dt > 0.0) {
                            if (!step)
                                step.emplace(ladder.drive(0.0).matrix, dt);
                            step->apply(psi);
                        }
                        t = dur;
                        out.push_back(apply_detection(local, record_ground(psi.cwiseAbs2())));
                    }
                } else {
                    for (double dur : durations) {
                        CVector p = psi;
                        if (dur > 0.0) {
                            UnitaryPropagator u(ladder.drive(0.0).matrix, dur);
                            u.apply(p);
                        }
                        out.push_back(apply_detection(local, record_ground(p.cwiseAbs2())));
                    }
                }
            } else {
                CMatrix rho = DensityMatrix::pure(QuantumState::basis_state(ladder.basis, "1")).elements;
                double t = 0.0;
                std::optional<LindbladPropagator> step;
                double last_dt = -1.0;
                for (double dur : durations) {
                    const double dt = dur - t;
                    if (dt > 0.0) {
                        if (!step || std::abs(dt - last_dt) > 1e-9 * dt) {
                            step.emplace(ladder.drive(0.0).matrix, collapse, dt);
                            last_dt = dt;
                        }
                        step->apply(rho);
                    }
                    t = dur;
                    RVector p = rho.diagonal().real();
                    out.push_back(apply_detection(local, record_ground(p)));
                }
            }
            return out;
        };
    } else {
        const ExperimentConfig local = cfg;
        curve = [local, durations](const ShotSample& shot) {
            const ShotDrive sd = effective_gr_shot(local, shot);
            TwoLevelModel model = shot_gr_model(local, sd);
            const auto collapse = effective_collapse(local, model.basis, "1", "r");
            std::vector<double> out;
            out.reserve(durations.size());
            for (double dur : durations) {
                EffectiveAtom atom(QuantumState::basis_state(model.basis, "1"), collapse);
                atom.apply(model.pulse(dur));
                out.push_back(apply_detection(local, atom.population("1")));
            }
            return out;
        };
    }
    return run_ensemble(durations, curve, noise, cfg.shots, cfg.seed);
}

// ---- ground Ramsey ----------------------------------------------------------

EnsembleResult run_ground_ramsey(const ExperimentConfig& cfg) {
    cfg.validate();
    NoiseSpec noise = cfg.make_noise_spec();
    const auto& gaps = cfg.scan.values;
    const ExperimentConfig local = cfg;

    ShotCurve curve = [local, gaps](const ShotSample& shot) {
        double extra = 0.0;
        switch (local.ground_dephasing.model) {
        case GroundDephasingConfig::Model::Gaussian: {
            // Dedicated substream so the draw does not disturb the shared ones.
            ShotRng rng(ShotRng::mix(local.seed, 0x67617573ULL), shot.shot_index);
            extra = local.ground_dephasing.sigma * rng.normal();
            break;
        }
        case GroundDephasingConfig::Model::TrapLightShift:
            extra = -local.ground_dephasing.eta * shot.thermal_energy / (2.0 * constants::hbar);
            break;
        case GroundDephasingConfig::Model::None:
            break;
        }
        DriveParams d = local.drive;
        d.rabi *= shot.scale("drive");
        d.detuning += extra;
        TwoLevelModel model = build_two_level(d, {"1", "0"});

        const double t_half_pi = (pi / 2.0) / local.drive.rabi;
        QuantumState psi = QuantumState::basis_state(model.basis, "1");
        const auto first = model.pulse(t_half_pi);
        psi = evolve_state(psi, std::span(&first, 1));

        std::vector<double> out;
        out.reserve(gaps.size());
        scan_waits(
            psi, gaps,
            [&](QuantumState& s, double dt) {
                const auto w = model.wait(dt);
                s = evolve_state(s, std::span(&w, 1));
            },
            [&](const QuantumState& s) {
                const auto analysis = model.pulse(t_half_pi);
                auto f = evolve_state(s, std::span(&analysis, 1));
                out.push_back(std::norm(f.amplitude("0")));
            });
        return out;
    };
    return run_ensemble(gaps, curve, noise, cfg.shots, cfg.seed);
}

// ---- ground-Rydberg Ramsey and spin echo ------------------------------------

namespace {

std::vector<double> phase_grid(int n) {
    std::vector<double> phases(n);
    for (int i = 0; i < n; ++i)
        phases[i] = two_pi * i / n;
    return phases;
}

/// Runs a (gap x phase) scan and reduces the ensemble-mean fringes to a
/// contrast-vs-gap EnsembleResult.
EnsembleResult contrast_from_phase_sweep(const ExperimentConfig& cfg, const NoiseSpec& noise,
                                         const std::vector<double>& gaps,
                                         const std::function<std::vector<double>(const ShotSample&)>& curve) {
    const int n_phase = cfg.phase_points;
    std::vector<double> flat_scan(gaps.size() * n_phase);
    for (size_t i = 0; i < flat_scan.size(); ++i)
        flat_scan[i] = static_cast<double>(i);
    EnsembleResult flat = run_ensemble(flat_scan, curve, noise, cfg.shots, cfg.seed);

    const auto phases = phase_grid(n_phase);
    EnsembleResult out;
    out.scan_values = gaps;
    out.n_shots = flat.n_shots;
    out.seed = flat.seed;
    for (size_t g = 0; g < gaps.size(); ++g) {
        std::vector<double> y(flat.mean.begin() + g * n_phase, flat.mean.begin() + (g + 1) * n_phase);
        std::vector<double> ye(flat.standard_error.begin() + g * n_phase,
                               flat.standard_error.begin() + (g + 1) * n_phase);
        const ContrastEstimate c = extract_contrast(phases, y, ye);
        out.mean.push_back(c.value);
        out.standard_error.push_back(c.sigma);
    }
    return out;
}

enum class GrSequence { Ramsey, Echo };

std::vector<double> gr_sequence_shot(const ExperimentConfig& cfg, const ShotSample& shot,
                                     GrSequence sequence, const std::vector<double>& gaps,
                                     const std::vector<double>& phases) {
    const ShotDrive sd = effective_gr_shot(cfg, shot);
    TwoLevelModel model = shot_gr_model(cfg, sd);
    const auto collapse = effective_collapse(cfg, model.basis, "1", "r");
    // Pulse durations are calibrated on the nominal Rabi frequency; amplitude
    // noise then shows up as pulse-area error.
    const double t_half_pi = (pi / 2.0) / cfg.drive.rabi;
    const double t_pi = pi / cfg.drive.rabi;

    std::vector<double> out;
    out.reserve(gaps.size() * phases.size());
    for (double gap : gaps) {
        EffectiveAtom atom(QuantumState::basis_state(model.basis, "1"), collapse);
        atom.apply(model.pulse(t_half_pi));
        if (sequence == GrSequence::Ramsey) {
            atom.apply(model.wait(gap, cfg.fringe_offset));
        } else {
            atom.apply(model.wait(gap / 2.0, cfg.fringe_offset));
            atom.apply(model.pulse(t_pi));
            atom.apply(model.wait(gap / 2.0, cfg.fringe_offset));
        }
        for (double phase : phases) {
            EffectiveAtom closed = atom;
            closed.apply(model.pulse(t_half_pi, phase));
            out.push_back(apply_detection(cfg, closed.population("1")));
        }
    }
    return out;
}

EnsembleResult run_gr_sequence(const ExperimentConfig& cfg, GrSequence sequence) {
    cfg.validate();
    const NoiseSpec noise = cfg.make_noise_spec();
    const auto& gaps = cfg.scan.values;
    const ExperimentConfig local = cfg;

    if (cfg.observable == ObservableMode::Contrast) {
        const auto phases = phase_grid(cfg.phase_points);
        auto curve = [local, sequence, gaps, phases](const ShotSample& shot) {
            return gr_sequence_shot(local, shot, sequence, gaps, phases);
        };
        return contrast_from_phase_sweep(cfg, noise, gaps, curve);
    }
    const std::vector<double> phases{0.0};
    auto curve = [local, sequence, gaps, phases](const ShotSample& shot) {
        return gr_sequence_shot(local, shot, sequence, gaps, phases);
    };
    return run_ensemble(gaps, curve, noise, cfg.shots, cfg.seed);
}

} // namespace

EnsembleResult run_gr_ramsey(const ExperimentConfig& cfg) {
    return run_gr_sequence(cfg, GrSequence::Ramsey);
}

EnsembleResult run_spin_echo(const ExperimentConfig& cfg) {
    return run_gr_sequence(cfg, GrSequence::Echo);
}

// ---- T1 (pi - gap - pi) -----------------------------------------------------

EnsembleResult run_t1_two_pi(const ExperimentConfig& cfg) {
    cfg.validate();
    const NoiseSpec noise = cfg.make_noise_spec();
    const auto& gaps = cfg.scan.values;
    const ExperimentConfig local = cfg;

    ShotCurve curve = [local, gaps](const ShotSample& shot) {
        const ShotDrive sd = effective_gr_shot(local, shot);
        TwoLevelModel model = shot_gr_model(local, sd);
        const auto collapse = effective_collapse(local, model.basis, "1", "r");
        const double t_pi = pi / local.drive.rabi;

        EffectiveAtom atom(QuantumState::basis_state(model.basis, "1"), collapse);
        atom.apply(model.pulse(t_pi));
        std::vector<double> out;
        out.reserve(gaps.size());
        scan_waits(
            atom, gaps,
            [&](EffectiveAtom& a, double dt) { a.apply(model.wait(dt)); },
            [&](const EffectiveAtom& a) {
                EffectiveAtom closed = a;
                closed.apply(model.pulse(t_pi));
                out.push_back(apply_detection(local, closed.population("1")));
            });
        return out;
    };
    return run_ensemble(gaps, curve, noise, cfg.shots, cfg.seed);
}

// ---- pi-pulse train ----------------------------------------------------------

EnsembleResult run_pi_train(const ExperimentConfig& cfg) {
    cfg.validate();
    const NoiseSpec noise = cfg.make_noise_spec();
    const auto& ns = cfg.scan.values;
    const ExperimentConfig local = cfg;

    ShotCurve curve = [local, ns](const ShotSample& shot) {
        ShotRng rng(ShotRng::mix(local.seed, 0x7069747261696eULL), shot.shot_index);
        std::vector<double> out;
        out.reserve(ns.size());
        for (double n : ns) {
            double p = pi_train_survival(local.detection.p1d, local.detection.prd, local.pre,
                                         static_cast<int>(std::lround(n)));
            if (local.readout_sigma > 0.0)
                p += local.readout_sigma * rng.normal();
            out.push_back(p);
        }
        return out;
    };
    return run_ensemble(ns, curve, noise, cfg.shots, cfg.seed);
}

// ---- control-qubit fringe experiment -----------------------------------------

ControlFringeResult run_control_fringe(const ExperimentConfig& cfg) {
    cfg.validate();
    const NoiseSpec noise = cfg.make_noise_spec();
    const auto& dts = cfg.scan.values;
    const auto& ts = cfg.t_values;
    const ExperimentConfig local = cfg;

    std::vector<double> flat_scan(ts.size() * dts.size());
    for (size_t i = 0; i < flat_scan.size(); ++i)
        flat_scan[i] = static_cast<double>(i);

    ShotCurve curve = [local, dts, ts](const ShotSample& shot) {
        const ShotDrive sd = effective_gr_shot(local, shot);
        LevelBasis basis({"0", "1", "r"});
        const int i0 = 0, i1 = 1, ir = 2;

        DriveParams ryd = local.drive;
        ryd.rabi *= sd.rabi_scale;
        ryd.detuning += sd.detuning_shift;
        const DriveParams gnd = local.gnd_drive;

        auto collapse = effective_collapse(local, basis, "1", "r");

        const double t_gnd_half_pi = (pi / 2.0) / gnd.rabi;
        const double t_ryd_pi = pi / local.drive.rabi;

        auto segment = [&](bool gnd_on, bool ryd_on, double duration, double ryd_phase) {
            CMatrix h = CMatrix::Zero(3, 3);
            if (gnd_on) {
                const Complex half = 0.5 * gnd.rabi * std::exp(Complex(0.0, -gnd.phase));
                h(i0, i1) += half;
                h(i1, i0) += std::conj(half);
                h(i1, i1) -= gnd.detuning;
            }
            if (ryd_on) {
                const Complex half = 0.5 * ryd.rabi * std::exp(Complex(0.0, -(ryd.phase + ryd_phase)));
                h(i1, ir) += half;
                h(ir, i1) += std::conj(half);
            }
            h(ir, ir) -= ryd.detuning;
            if (!gnd_on && !ryd_on)
                h(i0, i0) += local.fringe_offset; // frame offset during waits
            return HamiltonianSegment{h, duration};
        };

        std::vector<double> out;
        out.reserve(ts.size() * dts.size());
        for (double t_gap : ts) {
            for (double dt : dts) {
                EffectiveAtom atom(QuantumState::basis_state(basis, "1"), collapse);
                atom.apply(segment(true, false, t_gnd_half_pi, 0.0));
                atom.apply(segment(false, false, dt, 0.0));
                atom.apply(segment(false, true, t_ryd_pi, 0.0));
                atom.apply(segment(false, false, t_gap, 0.0));
                atom.apply(segment(false, true, t_ryd_pi, pi));
                atom.apply(segment(false, false, dt, 0.0));
                atom.apply(segment(true, false, t_gnd_half_pi, 0.0));
                out.push_back(apply_detection(local, atom.population("0")));
            }
        }
        return out;
    };

    EnsembleResult flat = run_ensemble(flat_scan, curve, noise, cfg.shots, cfg.seed);

    ControlFringeResult res;
    res.contrast_vs_t.scan_values = ts;
    res.contrast_vs_t.n_shots = flat.n_shots;
    res.contrast_vs_t.seed = flat.seed;
    for (size_t k = 0; k < ts.size(); ++k) {
        EnsembleResult fringe;
        fringe.scan_values = dts;
        fringe.n_shots = flat.n_shots;
        fringe.seed = flat.seed;
        fringe.mean.assign(flat.mean.begin() + k * dts.size(), flat.mean.begin() + (k + 1) * dts.size());
        fringe.standard_error.assign(flat.standard_error.begin() + k * dts.size(),
                                     flat.standard_error.begin() + (k + 1) * dts.size());
        const ContrastEstimate c = extract_contrast(fringe.scan_values, fringe.mean, fringe.standard_error);
        res.contrast_vs_t.mean.push_back(c.value);
        res.contrast_vs_t.standard_error.push_back(c.sigma);
        res.fringes.push_back(std::move(fringe));
    }
    return res;
}

// ---- CZ gate -----------------------------------------------------------------

namespace {

// |Tr(CZ^dag D M)| / 4 maximized over the local phase of one qubit has the
// closed form |a + e^{i b} c| + |..|; the remaining phase is a 1D search.
double cz_trace_overlap(const CMatrix& m, double theta_t) {
    const Complex e(std::cos(theta_t), std::sin(theta_t));
    const Complex a = m(0, 0) + e * m(1, 1);
    const Complex b = m(2, 2) - e * m(3, 3);
    return std::abs(a) + std::abs(b);
}

} // namespace

double cz_fidelity_phase_optimized(const CMatrix& final_map, CzFramePhases* phases) {
    const int n_grid = 720;
    double best_theta = 0.0, best = -1.0;
    for (int i = 0; i < n_grid; ++i) {
        const double theta = two_pi * i / n_grid;
        const double v = cz_trace_overlap(final_map, theta);
        if (v > best) {
            best = v;
            best_theta = theta;
        }
    }
    // Golden-section refinement around the best grid point.
    double lo = best_theta - two_pi / n_grid;
    double hi = best_theta + two_pi / n_grid;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = cz_trace_overlap(final_map, x1), f2 = cz_trace_overlap(final_map, x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = cz_trace_overlap(final_map, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = cz_trace_overlap(final_map, x1);
        }
    }
    const double theta_t = f1 > f2 ? x1 : x2;
    const double overlap = std::max(f1, f2) / 4.0;
    if (phases) {
        phases->theta_target = theta_t;
        const Complex e(std::cos(theta_t), std::sin(theta_t));
        const Complex a = final_map(0, 0) + e * final_map(1, 1);
        const Complex b = final_map(2, 2) - e * final_map(3, 3);
        phases->theta_control = std::arg(a) - std::arg(b);
    }
    return overlap * overlap;
}

namespace {

Complex cz_frame_trace(const CMatrix& m, const CzFramePhases& frame) {
    const Complex et(std::cos(frame.theta_target), std::sin(frame.theta_target));
    const Complex ec(std::cos(frame.theta_control), std::sin(frame.theta_control));
    return m(0, 0) + et * m(1, 1) + ec * m(2, 2) - ec * et * m(3, 3);
}

} // namespace

double cz_fidelity_in_frame(const CMatrix& final_map, const CzFramePhases& frame) {
    return std::norm(cz_frame_trace(final_map, frame)) / 16.0;
}

double cz_average_fidelity_in_frame(const CMatrix& final_map, const CzFramePhases& frame) {
    const double tr_mm = (final_map.adjoint() * final_map).trace().real();
    return (tr_mm + std::norm(cz_frame_trace(final_map, frame))) / 20.0;
}

GateOutcome evaluate_cz_map(const TwoAtomBlockadeModel& model, double control_pi_time,
                            double target_pi_time) {
    const std::array<int, 4> comp_index = {0, 1, 3, 4}; // 00, 01, 10, 11 in the 9-dim basis
    std::vector<HamiltonianSegment> segs;
    {
        TwoAtomPulse p1;
        p1.control_ryd = true;
        p1.duration = control_pi_time;
        TwoAtomPulse p2;
        p2.target_ryd = true;
        p2.duration = 2.0 * target_pi_time;
        TwoAtomPulse p3 = p1;
        segs = {model.segment(p1), model.segment(p2), model.segment(p3)};
    }

    GateOutcome out;
    out.final_map = CMatrix::Zero(4, 4);
    for (int col = 0; col < 4; ++col) {
        auto psi = QuantumState::basis_state(model.basis, comp_index[col]);
        auto f = evolve_state(psi, segs);
        for (int row = 0; row < 4; ++row)
            out.final_map(row, col) = f.amplitudes(comp_index[row]);
        out.leakage(col) = std::max(0.0, 1.0 - out.final_map.col(col).squaredNorm());
    }
    out.fidelity = cz_fidelity_phase_optimized(out.final_map);
    out.error = 1.0 - out.fidelity;
    return out;
}

GateOutcome run_cz_gate(const ExperimentConfig& cfg) {
    cfg.validate();
    auto model = build_two_atom_blockade(cfg.drive, cfg.drive, cfg.blockade);
    const double t_pi = pi / cfg.drive.rabi;
    return evaluate_cz_map(model, t_pi, t_pi);
}

EnsembleResult run_cz_detuning_scan(const ExperimentConfig& cfg) {
    cfg.validate();
    EnsembleResult out;
    out.scan_values = cfg.scan.values;
    out.n_shots = 1;
    out.seed = cfg.seed;
    const double t_pi = pi / cfg.drive.rabi;
    for (double delta : cfg.scan.values) {
        DriveParams control = cfg.drive;
        control.detuning += delta;
        auto model = build_two_atom_blockade(control, cfg.drive, cfg.blockade);
        const GateOutcome g = evaluate_cz_map(model, t_pi, t_pi);
        out.mean.push_back(g.error);
        out.standard_error.push_back(0.0);
    }
    return out;
}

// ---- temperature sweep --------------------------------------------------------

namespace {

double sweep_t2star(const ExperimentConfig& cfg, double temperature) {
    ExperimentConfig ramsey = cfg;
    ramsey.kind = ExperimentKind::GrRamsey;
    ramsey.observable = ObservableMode::Contrast;
    ramsey.noise.temperature = temperature;
    ramsey.noise.rabi = false;
    ramsey.noise.stark_residual = false;
    ramsey.decay.enabled = false;
    ramsey.detection.enabled = false;
    ramsey.fringe_offset = 0.0;
    ramsey.two_photon.reset(); // effective two-level picture with this geometry's k
    if (!(ramsey.drive.rabi > 0.0) && cfg.two_photon)
        ramsey.drive.rabi = reduce_two_photon(cfg.two_photon->red, cfg.two_photon->blue,
                                              cfg.two_photon->red.detuning)
                                .effective_rabi;

    const double sigma = doppler_sigma(temperature, cfg.doppler_k(), cfg.atom.mass);
    const double t2d = std::sqrt(2.0) / sigma;
    ramsey.scan.variable = "gap";
    ramsey.scan.values.clear();
    const int n_gaps = 16;
    for (int i = 0; i < n_gaps; ++i)
        ramsey.scan.values.push_back(1.5 * t2d * (i + 1) / n_gaps);

    const EnsembleResult contrast = run_gr_ramsey(ramsey);
    const FitResult fit = fit_gaussian_decay(contrast.scan_values, contrast.mean, contrast.standard_error);
    return fit.param("tau_g");
}

/// Two-photon pi-gap-pi map. |0> is inert under the ladder drive, so the
/// |00>, |01>, |10> columns reduce to single-atom four-level runs and only
/// |11> needs the blockaded pair on {1,p,r} x {1,p,r}.
GateOutcome evaluate_cz_map_two_photon(const LadderModel& control, const LadderModel& target,
                                       double blockade, double control_pi_time, double target_pi_time) {
    const double gap = 2.0 * target_pi_time;

    auto single_atom_11 = [](const LadderModel& atom, double t_on_first, double t_wait, double t_on_second) {
        auto psi = QuantumState::basis_state(atom.basis, "1");
        std::vector<HamiltonianSegment> segs;
        if (t_on_first > 0.0)
            segs.push_back(atom.drive(t_on_first));
        if (t_wait > 0.0)
            segs.push_back(atom.wait(t_wait));
        if (t_on_second > 0.0)
            segs.push_back(atom.drive(t_on_second));
        return evolve_state(psi, segs);
    };

    GateOutcome out;
    out.final_map = CMatrix::Zero(4, 4);
    out.final_map(0, 0) = 1.0;
    out.leakage(0) = 0.0;

    // |01>: target alone sees wait - 2pi drive - wait.
    {
        auto psi = QuantumState::basis_state(target.basis, "1");
        std::vector<HamiltonianSegment> segs{target.wait(control_pi_time), target.drive(gap),
                                             target.wait(control_pi_time)};
        auto f = evolve_state(psi, segs);
        out.final_map(1, 1) = f.amplitude("1");
        out.leakage(1) = std::max(0.0, 1.0 - std::norm(f.amplitude("1")));
    }
    // |10>: control alone sees pi - wait - pi.
    {
        auto f = single_atom_11(control, control_pi_time, gap, control_pi_time);
        out.final_map(2, 2) = f.amplitude("1");
        out.leakage(2) = std::max(0.0, 1.0 - std::norm(f.amplitude("1")));
    }
    // |11>: blockaded pair on {1, p, r} x {1, p, r}.
    {
        std::vector<std::string> labels;
        for (const char* c : {"1", "p", "r"})
            for (const char* t : {"1", "p", "r"})
                labels.push_back(std::string(c) + "." + t);
        LevelBasis pair_basis(labels);
        const CMatrix hc_drive = control.drive(0.0).matrix.topLeftCorner(3, 3);
        const CMatrix hc_wait = control.wait(0.0).matrix.topLeftCorner(3, 3);
        const CMatrix ht_drive = target.drive(0.0).matrix.topLeftCorner(3, 3);
        const CMatrix ht_wait = target.wait(0.0).matrix.topLeftCorner(3, 3);
        const CMatrix id = CMatrix::Identity(3, 3);
        auto pair_h = [&](const CMatrix& hc, const CMatrix& ht) {
            CMatrix h = kron(hc, id) + kron(id, ht);
            h(8, 8) += blockade; // |r.r>
            return h;
        };
        std::vector<HamiltonianSegment> segs{{pair_h(hc_drive, ht_wait), control_pi_time},
                                             {pair_h(hc_wait, ht_drive), gap},
                                             {pair_h(hc_drive, ht_wait), control_pi_time}};
        auto psi = QuantumState::basis_state(pair_basis, "1.1");
        auto f = evolve_state(psi, segs);
        out.final_map(3, 3) = f.amplitude("1.1");
        out.leakage(3) = std::max(0.0, 1.0 - std::norm(f.amplitude("1.1")));
    }
    out.fidelity = cz_fidelity_phase_optimized(out.final_map);
    out.error = 1.0 - out.fidelity;
    return out;
}

GateOutcome sweep_gate_shot(const ExperimentConfig& cfg, const ShotSample& shot) {
    if (cfg.two_photon) {
        const TwoPhotonConfig& tp = *cfg.two_photon;
        const double delta1 = tp.red.detuning;
        const double delta2 =
            tp.compensate_stark ? stark_compensated_detuning(tp.red, tp.blue, delta1, cfg.drive.detuning)
                                : cfg.drive.detuning;
        LadderModel c = build_ladder_4level(tp.red, tp.blue, cfg.atom, delta2 + shot.doppler_detuning);
        LadderModel t = build_ladder_4level(tp.red, tp.blue, cfg.atom, delta2 + shot.doppler_detuning_target);
        const double omega0 = reduce_two_photon(tp.red, tp.blue, delta1).effective_rabi;
        const double t_pi = pi / omega0;
        return evaluate_cz_map_two_photon(c, t, cfg.blockade, t_pi, t_pi);
    }
    auto model = build_two_atom_blockade(cfg.drive, cfg.drive, cfg.blockade);
    model.control_detuning_offset = shot.doppler_detuning;
    model.target_detuning_offset = shot.doppler_detuning_target;
    const double t_pi = pi / cfg.drive.rabi;
    return evaluate_cz_map(model, t_pi, t_pi);
}

} // namespace

TemperatureSweepResult run_cz_temperature_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    TemperatureSweepResult result;

    // Frame calibration on the noiseless gate: the pi-gap-pi map equals CZ
    // only up to single-qubit Z phases, which an experiment calibrates once
    // and then holds fixed. Shot-to-shot noise phases are NOT re-optimized.
    CzFramePhases frame;
    {
        NoiseSpec off;
        off.doppler_enabled = false;
        ShotSample quiet = sample_shot(off, 0, 0);
        const GateOutcome ideal = sweep_gate_shot(cfg, quiet);
        cz_fidelity_phase_optimized(ideal.final_map, &frame);
    }

    for (double temperature : cfg.scan.values) {
        TemperatureSweepRow row;
        row.temperature = temperature;
        row.t2_star = sweep_t2star(cfg, temperature);

        NoiseSpec noise;
        noise.temperature = temperature;
        noise.mass = cfg.atom.mass;
        noise.k_eff = cfg.doppler_k();
        noise.doppler_enabled = cfg.noise.doppler;
        noise.rabi_enabled = false;

        // Per-shot maps are accumulated in shot order; results are identical
        // for any thread count.
        std::vector<GateOutcome> outcomes(cfg.shots);
#pragma omp parallel for schedule(static)
        for (int s = 0; s < cfg.shots; ++s) {
            const ShotSample shot = sample_shot(noise, cfg.seed, static_cast<std::uint64_t>(s));
            outcomes[s] = sweep_gate_shot(cfg, shot);
        }

        double sum = 0.0, sum_sq = 0.0, sum_avg = 0.0, sum_opt = 0.0;
        CMatrix mean_map = CMatrix::Zero(4, 4);
        for (const auto& g : outcomes) {
            const double e = 1.0 - cz_fidelity_in_frame(g.final_map, frame);
            sum += e;
            sum_sq += e * e;
            sum_avg += 1.0 - cz_average_fidelity_in_frame(g.final_map, frame);
            sum_opt += g.error;
            mean_map += g.final_map;
        }
        const double n = cfg.shots;
        row.mean_error = sum / n;
        row.error_stderr =
            cfg.shots > 1 ? std::sqrt(std::max(0.0, sum_sq / n - row.mean_error * row.mean_error) / (n - 1))
                          : 0.0;
        row.mean_error_average = sum_avg / n;
        row.mean_error_optimized = sum_opt / n;
        mean_map /= n;
        row.error_of_mean_map = 1.0 - cz_fidelity_phase_optimized(mean_map);
        result.rows.push_back(row);
    }
    return result;
}

// ---- Bell sequence --------------------------------------------------------------

namespace {

struct BellShotOutput {
    double p00 = 0.0;
    double p11 = 0.0;
    std::vector<double> parity;
};

BellShotOutput bell_shot(const ExperimentConfig& cfg, const ShotSample& shot,
                         const std::vector<double>& phis) {
    const ShotDrive sd_c = effective_gr_shot(cfg, shot, false);
    const ShotDrive sd_t = effective_gr_shot(cfg, shot, true);

    DriveParams ryd_c = cfg.drive;
    ryd_c.rabi *= sd_c.rabi_scale;
    DriveParams ryd_t = cfg.drive;
    ryd_t.rabi *= sd_t.rabi_scale;

    auto model = build_two_atom_blockade(ryd_c, ryd_t, cfg.blockade);
    model.gnd_drive = cfg.gnd_drive;
    model.control_detuning_offset = sd_c.detuning_shift;
    model.target_detuning_offset = sd_t.detuning_shift;

    const double t_gnd_half_pi = (pi / 2.0) / cfg.gnd_drive.rabi;
    const double t_pi_c = pi / cfg.drive.rabi;
    const double t_pi_t = t_pi_c;

    auto gnd_pulse = [&](bool on_control, bool on_target, double phase) {
        TwoAtomPulse p;
        p.control_gnd = on_control;
        p.target_gnd = on_target;
        p.control_gnd_phase = phase;
        p.target_gnd_phase = phase;
        p.duration = t_gnd_half_pi;
        return model.segment(p);
    };
    auto ryd_pulse = [&](bool on_control, bool on_target, double duration) {
        TwoAtomPulse p;
        p.control_ryd = on_control;
        p.target_ryd = on_target;
        p.duration = duration;
        return model.segment(p);
    };

    // |1_C 0_T> -> GND pi/2 on control -> CNOT block (H_T CZ H_T) -> Bell.
    std::vector<HamiltonianSegment> prep{
        gnd_pulse(true, false, 0.0),
        gnd_pulse(false, true, 0.0),
        ryd_pulse(true, false, t_pi_c),
        ryd_pulse(false, true, 2.0 * t_pi_t),
        ryd_pulse(true, false, t_pi_c),
        gnd_pulse(false, true, 0.0),
    };
    auto psi0 = QuantumState::basis_state(model.basis, model.basis.index_of("10"));
    auto bell = evolve_state(psi0, prep);

    BellShotOutput out;
    out.p00 = std::norm(bell.amplitude("00"));
    out.p11 = std::norm(bell.amplitude("11"));
    out.parity.reserve(phis.size());
    for (double phi : phis) {
        const auto analysis = gnd_pulse(true, true, phi);
        auto f = evolve_state(bell, std::span(&analysis, 1));
        const double p00 = std::norm(f.amplitude("00"));
        const double p01 = std::norm(f.amplitude("01"));
        const double p10 = std::norm(f.amplitude("10"));
        const double p11 = std::norm(f.amplitude("11"));
        out.parity.push_back(p00 + p11 - p01 - p10);
    }
    return out;
}

} // namespace

BellResult run_bell_sequence(const ExperimentConfig& cfg) {
    cfg.validate();
    const NoiseSpec noise = cfg.make_noise_spec();
    const auto& phis = cfg.scan.values;
    const ExperimentConfig local = cfg;

    ShotCurve parity_curve = [local, phis](const ShotSample& shot) {
        return bell_shot(local, shot, phis).parity;
    };
    ShotCurve pop_curve = [local, phis](const ShotSample& shot) {
        const auto b = bell_shot(local, shot, {});
        return std::vector<double>{b.p00, b.p11};
    };

    BellResult res;
    res.parity_vs_phase = run_ensemble(phis, parity_curve, noise, cfg.shots, cfg.seed);
    const EnsembleResult pops = run_ensemble({0.0, 1.0}, pop_curve, noise, cfg.shots, cfg.seed);
    res.p00 = pops.mean[0];
    res.p11 = pops.mean[1];

    const FitResult fit = fit_cosine(res.parity_vs_phase.scan_values, res.parity_vs_phase.mean,
                                     res.parity_vs_phase.standard_error);
    res.parity_contrast = std::min(1.0, std::abs(fit.param("A")));
    res.parity_contrast_sigma = fit.sigma("A");
    res.fidelity = std::clamp(0.5 * (res.p00 + res.p11) + 0.5 * res.parity_contrast, 0.0, 1.0);
    return res;
}

} // namespace rydsim
