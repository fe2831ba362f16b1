#include "rydsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace rydsim {

using nlohmann::json;

namespace {

struct UnitEntry {
    const char* suffix;
    double factor;
};

// Longest-match table per quantity.
const UnitEntry kFrequencyUnits[] = {
    {"rad/s", 1.0}, {"GHz", 1e9}, {"MHz", 1e6}, {"kHz", 1e3}, {"Hz", 1.0}};
const UnitEntry kTimeUnits[] = {{"ns", 1e-9}, {"us", 1e-6}, {"µs", 1e-6}, {"ms", 1e-3}, {"s", 1.0}};
const UnitEntry kTemperatureUnits[] = {{"nK", 1e-9}, {"uK", 1e-6}, {"µK", 1e-6}, {"mK", 1e-3}, {"K", 1.0}};
const UnitEntry kLengthUnits[] = {{"nm", 1e-9}, {"um", 1e-6}, {"µm", 1e-6}, {"mm", 1e-3}, {"m", 1.0}};

double parse_with_units(const std::string& text, std::span<const UnitEntry> units, bool is_frequency,
                        const std::string& field) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s.push_back(c);
    if (s.empty())
        throw ConfigError(field + ": empty value");

    double sign = 1.0;
    if (s[0] == '+' || s[0] == '-') {
        sign = s[0] == '-' ? -1.0 : 1.0;
        s = s.substr(1);
    }
    bool two_pi_prefix = false;
    if (s.rfind("2pi*", 0) == 0 || s.rfind("2Pi*", 0) == 0 || s.rfind("2PI*", 0) == 0) {
        if (!is_frequency)
            throw ConfigError(field + ": '2pi*' prefix is only valid for frequencies");
        two_pi_prefix = true;
        s = s.substr(4);
    }

    size_t num_end = 0;
    while (num_end < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[num_end])) || s[num_end] == '+' || s[num_end] == '-' ||
            s[num_end] == '.' || s[num_end] == 'e' || s[num_end] == 'E')) {
        // 'e' must be followed by a digit or sign to belong to the number
        if ((s[num_end] == 'e' || s[num_end] == 'E') &&
            !(num_end + 1 < s.size() &&
              (std::isdigit(static_cast<unsigned char>(s[num_end + 1])) || s[num_end + 1] == '+' ||
               s[num_end + 1] == '-')))
            break;
        ++num_end;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + num_end, value);
    if (ec != std::errc() || ptr != s.data() + num_end || num_end == 0)
        throw ConfigError(field + ": cannot parse number in '" + text + "'");

    const std::string suffix = s.substr(num_end);
    if (suffix.empty()) {
        if (two_pi_prefix)
            return sign * constants::two_pi * value;
        return sign * value; // SI base units
    }
    for (const auto& u : units) {
        if (suffix == u.suffix) {
            double out = value * u.factor;
            if (is_frequency && std::string(u.suffix) != "rad/s")
                out *= constants::two_pi; // cycles -> angular
            return sign * out;
        }
    }
    throw ConfigError(field + ": unknown unit '" + suffix + "' in '" + text + "'");
}

double parse_quantity(const json& v, std::span<const UnitEntry> units, bool is_frequency,
                      const std::string& field) {
    if (v.is_number())
        return v.get<double>();
    if (v.is_string())
        return parse_with_units(v.get<std::string>(), units, is_frequency, field);
    throw ConfigError(field + ": expected a number or unit-suffixed string");
}

/// Tracks which keys were consumed; leftover keys are a config error.
class StrictObject {
  public:
    StrictObject(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object())
            throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key);
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        if (!node_.contains(key))
            throw ConfigError(path_ + ": missing required field '" + key + "'");
        return node_.at(key);
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key) ? &node_.at(key) : nullptr;
    }

    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : node_.items())
            if (!seen_.contains(key))
                throw ConfigError("unknown config key '" + sub(key) + "'");
    }

  private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> parse_scan_grid(StrictObject& scan, const std::string& variable,
                                    const std::string& path) {
    auto parse_value = [&](const json& v, const std::string& field) {
        if (variable == "duration" || variable == "gap" || variable == "dt")
            return parse_time(v, field);
        if (variable == "detuning" || variable == "frequency")
            return parse_frequency(v, field);
        if (variable == "temperature")
            return parse_temperature(v, field);
        return parse_number(v, field);
    };
    std::vector<double> values;
    if (scan.has("values")) {
        for (const auto& v : scan.at("values"))
            values.push_back(parse_value(v, path + ".values"));
    } else {
        const double start = parse_value(scan.at("start"), path + ".start");
        const double stop = parse_value(scan.at("stop"), path + ".stop");
        const int points = static_cast<int>(parse_number(scan.at("points"), path + ".points"));
        if (points < 2)
            throw ConfigError(path + ".points: need at least 2");
        for (int i = 0; i < points; ++i)
            values.push_back(start + (stop - start) * i / (points - 1));
    }
    return values;
}

DriveParams parse_drive(const json& node, const std::string& path) {
    StrictObject o(node, path);
    DriveParams d;
    if (o.has("rabi"))
        d.rabi = parse_frequency(o.at("rabi"), o.sub("rabi"));
    if (o.has("detuning"))
        d.detuning = parse_frequency(o.at("detuning"), o.sub("detuning"));
    if (o.has("phase"))
        d.phase = parse_number(o.at("phase"), o.sub("phase"));
    o.finish();
    return d;
}

} // namespace

double parse_frequency(const json& v, const std::string& field) {
    return parse_quantity(v, kFrequencyUnits, true, field);
}

double parse_time(const json& v, const std::string& field) {
    return parse_quantity(v, kTimeUnits, false, field);
}

double parse_temperature(const json& v, const std::string& field) {
    return parse_quantity(v, kTemperatureUnits, false, field);
}

double parse_length(const json& v, const std::string& field) {
    return parse_quantity(v, kLengthUnits, false, field);
}

double parse_number(const json& v, const std::string& field) {
    if (!v.is_number())
        throw ConfigError(field + ": expected a number");
    return v.get<double>();
}

ExperimentConfig config_from_json(const json& doc) {
    StrictObject root(doc, "");
    ExperimentConfig cfg;
    cfg.kind = experiment_kind_from_string(root.at("kind").get<std::string>());

    if (root.has("shots"))
        cfg.shots = static_cast<int>(parse_number(root.at("shots"), "shots"));
    if (root.has("seed"))
        cfg.seed = root.at("seed").get<std::uint64_t>();

    if (root.has("scan")) {
        StrictObject scan(root.at("scan"), "scan");
        cfg.scan.variable = scan.has("variable") ? scan.at("variable").get<std::string>() : "x";
        cfg.scan.values = parse_scan_grid(scan, cfg.scan.variable, "scan");
        scan.finish();
    }

    if (root.has("atom")) {
        StrictObject atom(root.at("atom"), "atom");
        if (atom.has("mass"))
            cfg.atom.mass = parse_number(atom.at("mass"), atom.sub("mass"));
        if (atom.has("wavelength_red"))
            cfg.atom.wavelength_red = parse_length(atom.at("wavelength_red"), atom.sub("wavelength_red"));
        if (atom.has("wavelength_blue"))
            cfg.atom.wavelength_blue = parse_length(atom.at("wavelength_blue"), atom.sub("wavelength_blue"));
        if (atom.has("counter_propagating"))
            cfg.atom.counter_propagating = atom.at("counter_propagating").get<bool>();
        if (atom.has("gamma_p"))
            cfg.atom.gamma_p = parse_frequency(atom.at("gamma_p"), atom.sub("gamma_p"));
        if (atom.has("rydberg_lifetime"))
            cfg.atom.rydberg_lifetime = parse_time(atom.at("rydberg_lifetime"), atom.sub("rydberg_lifetime"));
        if (atom.has("branching_to_dark"))
            cfg.atom.branching_to_dark = parse_number(atom.at("branching_to_dark"), atom.sub("branching_to_dark"));
        if (atom.has("single_photon_wavelength"))
            cfg.atom.single_photon_wavelength =
                parse_length(atom.at("single_photon_wavelength"), atom.sub("single_photon_wavelength"));
        atom.finish();
    }

    if (root.has("geometry")) {
        const std::string g = root.at("geometry").get<std::string>();
        if (g == "two-photon")
            cfg.geometry = TransitionGeometry::TwoPhoton;
        else if (g == "single-photon")
            cfg.geometry = TransitionGeometry::SinglePhoton;
        else if (g == "microwave")
            cfg.geometry = TransitionGeometry::Microwave;
        else
            throw ConfigError("geometry: expected two-photon, single-photon or microwave");
    }

    if (root.has("drive"))
        cfg.drive = parse_drive(root.at("drive"), "drive");
    if (root.has("gnd_drive"))
        cfg.gnd_drive = parse_drive(root.at("gnd_drive"), "gnd_drive");

    if (root.has("two_photon")) {
        StrictObject tp(root.at("two_photon"), "two_photon");
        TwoPhotonConfig t;
        t.red.rabi = parse_frequency(tp.at("rabi_red"), tp.sub("rabi_red"));
        t.blue.rabi = parse_frequency(tp.at("rabi_blue"), tp.sub("rabi_blue"));
        t.red.detuning = parse_frequency(tp.at("detuning1"), tp.sub("detuning1"));
        if (tp.has("compensate_stark"))
            t.compensate_stark = tp.at("compensate_stark").get<bool>();
        tp.finish();
        cfg.two_photon = t;
    }

    if (root.has("noise")) {
        StrictObject n(root.at("noise"), "noise");
        if (n.has("temperature"))
            cfg.noise.temperature = parse_temperature(n.at("temperature"), n.sub("temperature"));
        if (n.has("sigma_red"))
            cfg.noise.sigma_red = parse_frequency(n.at("sigma_red"), n.sub("sigma_red"));
        if (n.has("sigma_blue"))
            cfg.noise.sigma_blue = parse_frequency(n.at("sigma_blue"), n.sub("sigma_blue"));
        if (n.has("sigma_drive"))
            cfg.noise.sigma_drive = parse_frequency(n.at("sigma_drive"), n.sub("sigma_drive"));
        if (n.has("doppler"))
            cfg.noise.doppler = n.at("doppler").get<bool>();
        if (n.has("rabi"))
            cfg.noise.rabi = n.at("rabi").get<bool>();
        if (n.has("stark_residual"))
            cfg.noise.stark_residual = n.at("stark_residual").get<bool>();
        n.finish();
    }

    if (root.has("decay")) {
        StrictObject d(root.at("decay"), "decay");
        cfg.decay.enabled = true;
        if (d.has("enabled"))
            cfg.decay.enabled = d.at("enabled").get<bool>();
        if (d.has("lifetimes"))
            for (const auto& v : d.at("lifetimes"))
                cfg.decay.lifetimes.push_back(parse_time(v, d.sub("lifetimes")));
        if (d.has("t2_prime"))
            cfg.decay.t2_prime = parse_time(d.at("t2_prime"), d.sub("t2_prime"));
        d.finish();
    }

    if (root.has("detection")) {
        StrictObject d(root.at("detection"), "detection");
        cfg.detection.enabled = true;
        if (d.has("enabled"))
            cfg.detection.enabled = d.at("enabled").get<bool>();
        cfg.detection.p1d = parse_number(d.at("p1d"), d.sub("p1d"));
        cfg.detection.prd = parse_number(d.at("prd"), d.sub("prd"));
        d.finish();
    }

    if (root.has("ground_dephasing")) {
        StrictObject g(root.at("ground_dephasing"), "ground_dephasing");
        const std::string model = g.at("model").get<std::string>();
        if (model == "gaussian") {
            cfg.ground_dephasing.model = GroundDephasingConfig::Model::Gaussian;
            cfg.ground_dephasing.sigma = parse_frequency(g.at("sigma"), g.sub("sigma"));
        } else if (model == "trap-light-shift") {
            cfg.ground_dephasing.model = GroundDephasingConfig::Model::TrapLightShift;
            if (g.has("eta"))
                cfg.ground_dephasing.eta = parse_number(g.at("eta"), g.sub("eta"));
        } else if (model == "none") {
            cfg.ground_dephasing.model = GroundDephasingConfig::Model::None;
        } else {
            throw ConfigError("ground_dephasing.model: expected none, gaussian or trap-light-shift");
        }
        g.finish();
    }

    if (root.has("blockade"))
        cfg.blockade = parse_frequency(root.at("blockade"), "blockade");
    if (root.has("observable")) {
        const std::string o = root.at("observable").get<std::string>();
        if (o == "fringe")
            cfg.observable = ObservableMode::Fringe;
        else if (o == "contrast")
            cfg.observable = ObservableMode::Contrast;
        else
            throw ConfigError("observable: expected fringe or contrast");
    }
    if (root.has("fringe_offset"))
        cfg.fringe_offset = parse_frequency(root.at("fringe_offset"), "fringe_offset");
    if (root.has("phase_points"))
        cfg.phase_points = static_cast<int>(parse_number(root.at("phase_points"), "phase_points"));
    if (root.has("t_values"))
        for (const auto& v : root.at("t_values"))
            cfg.t_values.push_back(parse_time(v, "t_values"));
    if (root.has("pre"))
        cfg.pre = parse_number(root.at("pre"), "pre");
    if (root.has("readout_sigma"))
        cfg.readout_sigma = parse_number(root.at("readout_sigma"), "readout_sigma");

    root.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(doc);
}

} // namespace rydsim
