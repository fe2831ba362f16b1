#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "rydsim/config.hpp"
#include "rydsim/csv.hpp"
#include "rydsim/fitting.hpp"
#include "rydsim/coherence.hpp"
#include "rydsim/manifest.hpp"
#include "rydsim/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rydsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct NamedFit {
    FitResult result;
    std::function<double(double)> curve;
    std::function<double(double)> envelope_upper;
    std::function<double(double)> envelope_lower;
};

NamedFit run_named_fit(const std::string& model, std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> yerr, std::optional<double> fix_offset, double p1d) {
    NamedFit out;
    if (model == "damped-cosine") {
        out.result = fit_damped_cosine(xs, ys, yerr);
        const FitResult& r = out.result;
        const double a = r.param("A"), b = r.param("offset"), f = r.param("frequency");
        const double ph = r.param("phase"), tau = r.param("tau");
        out.curve = [=](double t) { return b + a * std::exp(-t / tau) * std::cos(constants::two_pi * f * t + ph); };
        out.envelope_upper = [=](double t) { return b + std::abs(a) * std::exp(-t / tau); };
        out.envelope_lower = [=](double t) { return b - std::abs(a) * std::exp(-t / tau); };
    } else if (model == "exponential-decay") {
        out.result = fit_exponential_decay(xs, ys, yerr, fix_offset);
        const FitResult& r = out.result;
        const double a = r.param("A"), tau = r.param("tau");
        const double b = fix_offset ? *fix_offset : r.param("offset");
        out.curve = [=](double t) { return b + a * std::exp(-t / tau); };
    } else if (model == "gaussian-decay") {
        out.result = fit_gaussian_decay(xs, ys, yerr);
        const FitResult& r = out.result;
        const double a = r.param("A"), tau = r.param("tau_g"), b = r.param("offset");
        out.curve = [=](double t) { return b + a * std::exp(-(t / tau) * (t / tau)); };
    } else if (model == "ramsey-kuhr") {
        out.result = fit_ramsey_kuhr(xs, ys, yerr);
        const FitResult& r = out.result;
        const double a = r.param("A"), b = r.param("B"), dp = r.param("delta_prime");
        const double ph = r.param("phi"), t2 = r.param("t2_star");
        out.curve = [=](double t) {
            return b + kuhr_envelope(t, t2) * a * std::cos(dp * t + kuhr_phase_drag(t, t2) + ph);
        };
        out.envelope_upper = [=](double t) { return b + std::abs(a) * kuhr_envelope(t, t2); };
        out.envelope_lower = [=](double t) { return b - std::abs(a) * kuhr_envelope(t, t2); };
    } else if (model == "parabola") {
        out.result = fit_parabola(xs, ys, yerr);
        const FitResult& r = out.result;
        const double a = r.param("a"), b = r.param("b"), c = r.param("c");
        out.curve = [=](double x) { return a * x * x + b * x + c; };
    } else if (model == "cosine") {
        out.result = fit_cosine(xs, ys, yerr);
        const FitResult& r = out.result;
        const double a = r.param("A"), b = r.param("offset"), f = r.param("frequency"), ph = r.param("phase");
        out.curve = [=](double t) { return b + a * std::cos(constants::two_pi * f * t + ph); };
    } else if (model == "pi-train") {
        out.result = fit_pi_train(xs, ys, p1d, yerr);
        const FitResult& r = out.result;
        const double prd = r.param("prd"), pre = r.param("pre");
        out.curve = [=](double n) { return p1d - prd * std::pow(pre, n); };
    } else {
        throw ConfigError("unknown fit model '" + model +
                          "' (damped-cosine, exponential-decay, gaussian-decay, ramsey-kuhr, parabola, "
                          "cosine, pi-train)");
    }
    return out;
}

CsvTable fit_to_csv(const FitResult& r) {
    CsvTable t;
    std::vector<double> row;
    for (size_t i = 0; i < r.param_names.size(); ++i) {
        t.header.push_back(r.param_names[i]);
        t.header.push_back(r.param_names[i] + "_sigma");
        row.push_back(r.params(static_cast<int>(i)));
        row.push_back(r.sigmas(static_cast<int>(i)));
    }
    t.header.insert(t.header.end(), {"residual_norm", "converged", "iterations"});
    row.insert(row.end(), {r.residual_norm, r.converged ? 1.0 : 0.0, static_cast<double>(r.iterations)});
    t.rows.push_back(row);
    return t;
}

void print_fit(const FitResult& r) {
    std::cout << "model: " << r.model << (r.converged ? "" : "  [NOT CONVERGED]") << "\n";
    for (size_t i = 0; i < r.param_names.size(); ++i)
        std::cout << "  " << r.param_names[i] << " = " << r.params(static_cast<int>(i)) << " +- "
                  << r.sigmas(static_cast<int>(i)) << "\n";
    std::cout << "  residual_norm = " << r.residual_norm << ", iterations = " << r.iterations << "\n";
    for (const auto& f : r.flags)
        std::cout << "  flag: " << f << "\n";
}

struct RunOutputs {
    CsvTable result;
    std::vector<std::pair<std::string, CsvTable>> extra; // filename -> table
};

RunOutputs execute(const ExperimentConfig& cfg) {
    RunOutputs out;
    auto ensemble_table = [](const EnsembleResult& r) {
        CsvTable t;
        t.header = {"scan_value", "mean", "stderr"};
        for (size_t i = 0; i < r.scan_values.size(); ++i)
            t.rows.push_back({r.scan_values[i], r.mean[i], r.standard_error[i]});
        return t;
    };

    switch (cfg.kind) {
    case ExperimentKind::RabiScan:
        out.result = ensemble_table(run_rabi_scan(cfg));
        break;
    case ExperimentKind::GroundRamsey:
        out.result = ensemble_table(run_ground_ramsey(cfg));
        break;
    case ExperimentKind::GrRamsey:
        out.result = ensemble_table(run_gr_ramsey(cfg));
        break;
    case ExperimentKind::SpinEcho:
        out.result = ensemble_table(run_spin_echo(cfg));
        break;
    case ExperimentKind::T1TwoPi:
        out.result = ensemble_table(run_t1_two_pi(cfg));
        break;
    case ExperimentKind::PiTrain:
        out.result = ensemble_table(run_pi_train(cfg));
        break;
    case ExperimentKind::ControlFringe: {
        const auto r = run_control_fringe(cfg);
        out.result = ensemble_table(r.contrast_vs_t);
        out.result.header = {"gap_T", "contrast", "contrast_err"};
        CsvTable fringes;
        fringes.header = {"gap_T", "dt", "mean", "stderr"};
        for (size_t k = 0; k < r.fringes.size(); ++k)
            for (size_t i = 0; i < r.fringes[k].scan_values.size(); ++i)
                fringes.rows.push_back({r.contrast_vs_t.scan_values[k], r.fringes[k].scan_values[i],
                                        r.fringes[k].mean[i], r.fringes[k].standard_error[i]});
        out.extra.emplace_back("fringes.csv", std::move(fringes));
        break;
    }
    case ExperimentKind::CzGate: {
        const GateOutcome g = run_cz_gate(cfg);
        out.result.header = {"fidelity", "error", "leakage_00", "leakage_01", "leakage_10", "leakage_11"};
        out.result.rows.push_back(
            {g.fidelity, g.error, g.leakage(0), g.leakage(1), g.leakage(2), g.leakage(3)});
        CsvTable map;
        map.header = {"row", "col", "re", "im"};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                map.rows.push_back({static_cast<double>(i), static_cast<double>(j),
                                    g.final_map(i, j).real(), g.final_map(i, j).imag()});
        out.extra.emplace_back("map.csv", std::move(map));
        break;
    }
    case ExperimentKind::CzDetuningScan:
        out.result = ensemble_table(run_cz_detuning_scan(cfg));
        out.result.header = {"detuning", "error", "stderr"};
        break;
    case ExperimentKind::TemperatureSweep: {
        const auto r = run_cz_temperature_sweep(cfg);
        out.result.header = {"temperature", "t2_star", "mean_error", "error_stderr"};
        for (const auto& row : r.rows)
            out.result.rows.push_back({row.temperature, row.t2_star, row.mean_error, row.error_stderr});
        break;
    }
    case ExperimentKind::BellSequence: {
        const auto r = run_bell_sequence(cfg);
        out.result = ensemble_table(r.parity_vs_phase);
        out.result.header = {"phi", "parity", "stderr"};
        CsvTable summary;
        summary.header = {"p00", "p11", "parity_contrast", "parity_contrast_sigma", "fidelity"};
        summary.rows.push_back({r.p00, r.p11, r.parity_contrast, r.parity_contrast_sigma, r.fidelity});
        out.extra.emplace_back("summary.csv", std::move(summary));
        break;
    }
    }
    return out;
}

int cmd_run(const std::string& kind_name, const std::string& config_path, const std::string& preset_name,
            std::optional<std::uint64_t> seed, std::optional<int> shots, const std::string& out_dir,
            bool plot, const std::string& fit_model) {
    json doc;
    if (!preset_name.empty() && !config_path.empty())
        throw ConfigError("give either --config or --preset, not both");
    if (!preset_name.empty()) {
        doc = preset_json(preset_name);
    } else if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
            throw IoError("cannot open config file '" + config_path + "'");
        try {
            in >> doc;
        } catch (const json::parse_error& e) {
            throw ConfigError("config '" + config_path + "' is not valid JSON: " + std::string(e.what()));
        }
    } else {
        throw ConfigError("one of --config or --preset is required");
    }
    if (seed)
        doc["seed"] = *seed;
    if (shots)
        doc["shots"] = *shots;

    ExperimentConfig cfg = config_from_json(doc);
    if (to_string(cfg.kind) != kind_name)
        throw ConfigError("config kind '" + to_string(cfg.kind) + "' does not match subcommand '" +
                          kind_name + "'");

    RunManifest manifest;
    manifest.config_hash = config_hash(doc);
    manifest.seed = cfg.seed;
    manifest.preset = preset_name;
    manifest.started = iso8601_now();

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

    RunOutputs outputs = execute(cfg);

    const std::string result_path = (fs::path(out_dir) / "result.csv").string();
    write_csv(result_path, outputs.result);
    manifest.outputs.push_back("result.csv");
    for (const auto& [name, table] : outputs.extra) {
        write_csv((fs::path(out_dir) / name).string(), table);
        manifest.outputs.push_back(name);
    }

    std::optional<NamedFit> fit;
    if (!fit_model.empty()) {
        std::vector<double> xs, ys, ye;
        for (const auto& row : outputs.result.rows) {
            xs.push_back(row[0]);
            ys.push_back(row[1]);
            if (row.size() > 2)
                ye.push_back(row[2]);
        }
        fit = run_named_fit(fit_model, xs, ys, ye.size() == xs.size() ? ye : std::vector<double>{}, {}, 1.0);
        write_csv((fs::path(out_dir) / "fit.csv").string(), fit_to_csv(fit->result));
        manifest.outputs.push_back("fit.csv");
        print_fit(fit->result);
    }

    if (plot) {
        SvgPlot p;
        p.title = kind_name + (preset_name.empty() ? "" : " (" + preset_name + ")");
        for (const auto& row : outputs.result.rows) {
            p.x.push_back(row[0]);
            p.y.push_back(row[1]);
            if (row.size() > 2)
                p.yerr.push_back(row[2]);
        }
        if (fit) {
            p.fitted = fit->curve;
            p.envelope_upper = fit->envelope_upper;
            p.envelope_lower = fit->envelope_lower;
        }
        write_svg_plot((fs::path(out_dir) / "plot.svg").string(), p);
        manifest.outputs.push_back("plot.svg");
    }

    manifest.finished = iso8601_now();
    write_manifest_atomic((fs::path(out_dir) / "manifest.json").string(), manifest);
    std::cout << "wrote " << result_path << " (" << outputs.result.rows.size() << " rows)\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& model, std::optional<double> fix_offset,
            double p1d, const std::string& out_dir) {
    const CsvTable data = read_csv(data_path);
    std::vector<double> xs, ys, ye;
    for (const auto& row : data.rows) {
        if (row.size() < 2)
            throw IoError("'" + data_path + "': need at least two columns");
        xs.push_back(row[0]);
        ys.push_back(row[1]);
        if (row.size() > 2)
            ye.push_back(row[2]);
    }
    const NamedFit fit = run_named_fit(model, xs, ys, ye.size() == xs.size() ? ye : std::vector<double>{},
                                       fix_offset, p1d);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
    write_csv((fs::path(out_dir) / "fit.csv").string(), fit_to_csv(fit.result));
    print_fit(fit.result);
    return 0;
}

int cmd_budget(const std::string& tau_gr, const std::string& t2_echo, const std::string& t1,
               const std::string& t2_star, const std::string& t2_prime) {
    CoherenceBudget budget;
    auto set = [](std::optional<double>& slot, const std::string& text, const char* name) {
        if (!text.empty())
            slot = parse_time(json(text), name);
    };
    set(budget.tau_gr, tau_gr, "--tau-gr");
    set(budget.t2_spin_echo, t2_echo, "--t2-echo");
    set(budget.t1, t1, "--t1");
    set(budget.t2_star, t2_star, "--t2-star");
    set(budget.t2_prime, t2_prime, "--t2-prime");

    budget.complete();
    auto show = [](const char* name, const std::optional<double>& v) {
        std::cout << "  " << name << " = ";
        if (v)
            std::cout << *v * 1e6 << " us\n";
        else
            std::cout << "(undetermined)\n";
    };
    std::cout << "coherence budget:\n";
    show("t2_star     ", budget.t2_star);
    show("t2_prime    ", budget.t2_prime);
    show("t1          ", budget.t1);
    show("t2_spin_echo", budget.t2_spin_echo);
    show("tau_gr      ", budget.tau_gr);
    std::cout << "  consistency residual = " << budget.consistency_residual() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rydberg-blockade gate and ground-Rydberg coherence simulator"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a canned experiment");
    std::string kind_name, config_path, preset_name, out_dir = "out", fit_model;
    std::uint64_t seed_value = 0;
    int shots_value = 0;
    bool plot = false;
    bool seed_given = false, shots_given = false;
    run->add_option("experiment", kind_name,
                    "experiment kind (rabi-gr, ramsey-gg, ramsey-gr, spin-echo, t1-2pi, pi-train, "
                    "control-fringe, cz-gate, cz-scan, temp-sweep, bell)")
        ->required();
    run->add_option("--config", config_path, "JSON config path");
    run->add_option("--preset", preset_name, "built-in preset name (fig2b ... fig8)");
    run->add_option("--seed", seed_value, "RNG seed")->each([&](const std::string&) { seed_given = true; });
    run->add_option("--shots", shots_value, "Monte-Carlo shots")->each([&](const std::string&) {
        shots_given = true;
    });
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_flag("--plot", plot, "also write plot.svg");
    run->add_option("--fit", fit_model, "fit model applied to result.csv");

    // fit
    auto* fit = app.add_subcommand("fit", "fit a CSV file (x, y[, y_err])");
    std::string data_path, model_name, fit_out = ".";
    double p1d = 1.0;
    double fix_offset_value = 0.0;
    bool fix_offset_given = false;
    fit->add_option("data", data_path, "CSV path")->required();
    fit->add_option("--model", model_name, "model name")->required();
    fit->add_option("--fix-offset", fix_offset_value, "freeze the offset parameter")
        ->each([&](const std::string&) { fix_offset_given = true; });
    fit->add_option("--p1d", p1d, "fixed p1d for the pi-train model");
    fit->add_option("--out", fit_out, "output directory for fit.csv");

    // budget
    auto* budget = app.add_subcommand("budget", "coherence-time algebra");
    std::string b_tau, b_echo, b_t1, b_t2s, b_t2p;
    budget->add_option("--tau-gr", b_tau, "overall ground-Rydberg coherence time");
    budget->add_option("--t2-echo", b_echo, "spin-echo decay time");
    budget->add_option("--t1", b_t1, "effective Rydberg lifetime");
    budget->add_option("--t2-star", b_t2s, "inhomogeneous dephasing time");
    budget->add_option("--t2-prime", b_t2p, "homogeneous dephasing time");

    try {
        app.parse(argc, argv);
        if (run->parsed())
            return cmd_run(kind_name, config_path, preset_name,
                           seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt,
                           shots_given ? std::optional<int>(shots_value) : std::nullopt, out_dir, plot,
                           fit_model);
        if (fit->parsed())
            return cmd_fit(data_path, model_name,
                           fix_offset_given ? std::optional<double>(fix_offset_value) : std::nullopt, p1d,
                           fit_out);
        if (budget->parsed())
            return cmd_budget(b_tau, b_echo, b_t1, b_t2s, b_t2p);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
