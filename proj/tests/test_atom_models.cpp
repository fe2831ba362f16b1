#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rydsim/atom_models.hpp"

using namespace rydsim;
using constants::two_pi;

namespace {

const DriveParams kRed{two_pi * 215e6, -two_pi * 5.7e9, 0.0};
const DriveParams kBlue{two_pi * 62e6, 0.0, 0.0};

LadderModel compensated_ladder(const AtomPhysicalParams& atom) {
    const double delta2 = stark_compensated_detuning(kRed, kBlue, kRed.detuning);
    return build_ladder_4level(kRed, kBlue, atom, delta2);
}

} // namespace

TEST_CASE("two-photon reduction") {
    const auto r = reduce_two_photon(kRed, kBlue, kRed.detuning);
    CHECK(r.effective_rabi == doctest::Approx(two_pi * 1.16930e6).epsilon(1e-4));

    // symmetric beams: no differential shift
    const DriveParams equal{two_pi * 100e6, 0.0, 0.0};
    CHECK(reduce_two_photon(equal, equal, -two_pi * 5e9).differential_stark_shift == doctest::Approx(0.0));

    // doubling both single-photon amplitudes quadruples the effective Rabi
    DriveParams red2 = kRed, blue2 = kBlue;
    red2.rabi *= 2.0;
    blue2.rabi *= 2.0;
    const auto r2 = reduce_two_photon(red2, blue2, kRed.detuning);
    CHECK(r2.effective_rabi == doctest::Approx(4.0 * r.effective_rabi).epsilon(1e-12));

    CHECK_THROWS_AS(reduce_two_photon(kRed, kBlue, 0.0), ValidationError);
}

TEST_CASE("microwave qubit pulse timing") {
    // The rotation rate equals the Rabi frequency: a pi pulse takes pi/Omega
    // and the state returns after a full 2 pi / Omega cycle.
    const double omega = two_pi * 33.9e3;
    auto model = build_two_level({omega, 0.0, 0.0}, {"0", "1"});
    auto start = QuantumState::basis_state(model.basis, "0");

    const auto pi_pulse = model.pulse(constants::pi / omega);
    auto transferred = evolve_state(start, std::span(&pi_pulse, 1));
    CHECK(std::norm(transferred.amplitude("1")) >= 0.9999);

    const auto full_cycle = model.pulse(29.5e-6); // 1 / (33.9 kHz)
    auto returned = evolve_state(start, std::span(&full_cycle, 1));
    CHECK(std::norm(returned.amplitude("0")) >= 0.9999);
}

TEST_CASE("pi/2 pair with inverted phase undoes itself") {
    const double omega = two_pi * 1e6;
    auto model = build_two_level({omega, 0.0, 0.0});
    auto start = QuantumState::basis_state(model.basis, "g");
    const double t = (constants::pi / 2.0) / omega;
    std::vector<HamiltonianSegment> segs{model.pulse(t, 0.0), model.pulse(t, constants::pi)};
    auto out = evolve_state(start, segs);
    CHECK(overlap_fidelity(out, start) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("detuned two-level drive against the closed form") {
    const double omega = two_pi * 1e6;
    const double delta = two_pi * 0.5e6;
    auto model = build_two_level({omega, delta, 0.0});
    auto start = QuantumState::basis_state(model.basis, "g");
    const auto seg = model.pulse(1e-6);
    auto p = populations(evolve_state(start, std::span(&seg, 1)));
    const double expected = oracles::detuned_rabi_pe(omega, delta, 1e-6);
    CHECK(expected == doctest::Approx(0.10505).epsilon(1e-3));
    CHECK(p(1) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("compensated four-level ladder oscillates at the effective Rabi frequency") {
    AtomPhysicalParams atom;
    auto ladder = compensated_ladder(atom);
    const double omega0 = reduce_two_photon(kRed, kBlue, kRed.detuning).effective_rabi;

    // coherent run: locate the first minimum of P_1
    auto psi = QuantumState::basis_state(ladder.basis, "1");
    double best_t = 0.0, best_p = 2.0, max_pr = 0.0;
    const int n = 400;
    for (int i = 1; i <= n; ++i) {
        const double t = 0.9e-6 * i / n;
        const auto seg = ladder.drive(t);
        auto out = populations(evolve_state(psi, std::span(&seg, 1)));
        if (out(0) < best_p) {
            best_p = out(0);
            best_t = t;
        }
        max_pr = std::max(max_pr, out(2));
    }
    const double measured = constants::pi / best_t;
    CHECK(measured == doctest::Approx(omega0).epsilon(0.05));
    CHECK(max_pr > 0.98); // Stark compensation keeps the drive resonant
}

TEST_CASE("ladder with no blue beam never populates the Rydberg level") {
    AtomPhysicalParams atom;
    DriveParams blue_off = kBlue;
    blue_off.rabi = 0.0;
    auto ladder = build_ladder_4level(kRed, blue_off, atom, 0.0);
    auto psi = QuantumState::basis_state(ladder.basis, "1");
    for (double t : {0.2e-6, 1e-6, 5e-6}) {
        const auto seg = ladder.drive(t);
        auto p = populations(evolve_state(psi, std::span(&seg, 1)));
        CHECK(p(2) <= 1e-6);
    }
}

TEST_CASE("dark-state accumulation at the red-leg scattering rate") {
    AtomPhysicalParams atom;
    DriveParams blue_off = kBlue;
    blue_off.rabi = 0.0;
    auto ladder = build_ladder_4level(kRed, blue_off, atom, 0.0);
    const auto collapse = ladder.collapse_operators();

    // with the upper transition off the atom idles in |1>, so |g'> fills at
    // branching * Omega_r^2 Gamma_p / (4 Delta^2)
    const double rate = atom.branching_to_dark * kRed.rabi * kRed.rabi * atom.gamma_p /
                        (4.0 * kRed.detuning * kRed.detuning);
    const double t = 10e-6;
    const auto seg = ladder.drive(t);
    auto rho = DensityMatrix::pure(QuantumState::basis_state(ladder.basis, "1"));
    auto out = evolve_density(rho, std::span(&seg, 1), collapse);
    CHECK(out.population("g'") == doctest::Approx(rate * t).epsilon(0.05));
}

TEST_CASE("collapse rates out of |p> sum to gamma_p") {
    AtomPhysicalParams atom;
    atom.branching_to_dark = 0.37;
    auto ladder = build_ladder_4level(kRed, kBlue, atom, 0.0);
    double total = 0.0;
    const int ip = ladder.basis.index_of("p");
    for (const auto& op : ladder.collapse_operators())
        total += op.matrix.col(ip).squaredNorm();
    CHECK(total == doctest::Approx(atom.gamma_p).epsilon(1e-12));
}

TEST_CASE("every built segment is Hermitian") {
    AtomPhysicalParams atom;
    auto ladder = compensated_ladder(atom);
    check_hermitian(ladder.drive(1e-6).matrix, 1e-12, "ladder drive");
    check_hermitian(ladder.wait(1e-6).matrix, 1e-12, "ladder wait");

    auto two = build_two_level({two_pi * 1e6, two_pi * 0.3e6, 0.7});
    check_hermitian(two.pulse(1e-6, 0.4).matrix, 1e-12, "two-level pulse");

    auto pair = build_two_atom_blockade(DriveParams{two_pi * 1e6, 0.0, 0.2},
                                        DriveParams{two_pi * 1e6, 0.0, 0.0}, two_pi * 1e9);
    TwoAtomPulse pulse;
    pulse.control_ryd = pulse.target_ryd = true;
    pulse.duration = 1e-6;
    check_hermitian(pair.segment(pulse).matrix, 1e-12, "blockade segment");
}

TEST_CASE("blockade suppresses double excitation monotonically") {
    const double omega = two_pi * 1e6;
    const DriveParams drive{omega, 0.0, 0.0};
    const double t_pi = constants::pi / omega;

    double previous = 2.0;
    for (double b : {0.0, 10.0 * omega, 100.0 * omega, 1000.0 * omega}) {
        auto model = build_two_atom_blockade(drive, drive, b);
        TwoAtomPulse both;
        both.control_ryd = both.target_ryd = true;
        both.duration = t_pi;
        const auto seg = model.segment(both);
        auto psi = QuantumState::basis_state(model.basis, "11");
        auto out = evolve_state(psi, std::span(&seg, 1));
        const double p_rr = std::norm(out.amplitude("rr"));
        CHECK(p_rr <= previous + 1e-12);
        previous = p_rr;
        if (b == 0.0)
            CHECK(p_rr == doctest::Approx(1.0).epsilon(1e-9)); // independent pi pulses
    }
}

TEST_CASE("strong blockade keeps the pair singly excited") {
    const double omega = two_pi * 1e6;
    const DriveParams drive{omega, 0.0, 0.0};
    auto model = build_two_atom_blockade(drive, std::nullopt, two_pi * 10e9);
    TwoAtomPulse control_only;
    control_only.control_ryd = true;
    control_only.duration = constants::pi / omega;
    // fine-step integration oracle: substeps must not change the answer
    HamiltonianSegment seg = model.segment(control_only);
    HamiltonianSegment fine = seg;
    fine.substeps = 64;
    auto psi = QuantumState::basis_state(model.basis, "11");
    auto coarse_out = evolve_state(psi, std::span(&seg, 1));
    auto fine_out = evolve_state(psi, std::span(&fine, 1));
    CHECK((coarse_out.amplitudes - fine_out.amplitudes).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::norm(fine_out.amplitude("rr")) < 1e-5);
}

TEST_CASE("detection model") {
    // survival after one imperfect pi pulse, Fig-3(b)-style parameters
    const double p1d = 0.972, prd = 0.887, pre = 0.984;
    CHECK(pi_train_survival(p1d, prd, pre, 1) == doctest::Approx(0.972 - 0.887 * 0.984).epsilon(1e-12));
    CHECK(pi_train_survival(p1d, prd, pre, 3) ==
          doctest::Approx(0.972 - 0.887 * std::pow(0.984, 3)).epsilon(1e-12));
    CHECK(pi_train_survival(p1d, prd, pre, 3) == doctest::Approx(0.1269).epsilon(1e-3));

    // the general observable reduces to the train formula at g = 1 - pre^n
    const double g = 1.0 - std::pow(pre, 5);
    CHECK(detection_model(g, p1d, prd) == doctest::Approx(pi_train_survival(p1d, prd, pre, 5)).epsilon(1e-12));

    // ideal-detection limit clips at zero
    CHECK(pi_train_survival(0.9, 1.0, 1.0, 3) == 0.0);
    // everything in the ground state is detected with efficiency p1d
    CHECK(detection_model(1.0, p1d, prd) == doctest::Approx(p1d));
    // n -> infinity: survival approaches p1d
    CHECK(pi_train_survival(p1d, prd, pre, 2001) == doctest::Approx(p1d).epsilon(1e-9));

    CHECK_THROWS_AS(detection_model(1.5, p1d, prd), ValidationError);
    CHECK_THROWS_AS(detection_model(0.5, 1.2, prd), ValidationError);
}
