#include "rydsim/config.hpp"

#include <map>

namespace rydsim {

namespace {

// Figure-for-figure default configurations. Values are unit-suffixed strings
// so the presets double as config-format documentation.
const std::map<std::string, const char*> kPresets = {
    {"fig2b", R"({
  "kind": "ramsey-gg",
  "shots": 400,
  "geometry": "microwave",
  "scan": {"variable": "gap", "start": "0ms", "stop": "12ms", "points": 97},
  "drive": {"rabi": "2pi*33.9kHz", "detuning": "2pi*500Hz"},
  "noise": {"temperature": "5.2uK"},
  "ground_dephasing": {"model": "trap-light-shift", "eta": 3.85e-4}
})"},
    {"fig3a", R"({
  "kind": "rabi-gr",
  "shots": 500,
  "geometry": "two-photon",
  "scan": {"variable": "duration", "start": "0us", "stop": "20us", "points": 81},
  "two_photon": {"rabi_red": "2pi*215MHz", "rabi_blue": "2pi*62MHz", "detuning1": "-2pi*5.7GHz"},
  "noise": {"temperature": "5.2uK", "sigma_red": "2pi*2.1MHz", "sigma_blue": "2pi*1MHz"},
  "decay": {"enabled": true},
  "detection": {"p1d": 0.972, "prd": 0.887}
})"},
    {"fig3b", R"({
  "kind": "pi-train",
  "shots": 300,
  "geometry": "two-photon",
  "scan": {"variable": "n", "values": [1, 3, 5, 7, 9, 11, 13, 15]},
  "pre": 0.984,
  "readout_sigma": 0.01,
  "detection": {"p1d": 0.972, "prd": 0.887}
})"},
    {"fig4a", R"({
  "kind": "ramsey-gr",
  "shots": 400,
  "geometry": "two-photon",
  "scan": {"variable": "gap", "start": "0us", "stop": "25us", "points": 126},
  "drive": {"rabi": "2pi*1.188MHz"},
  "noise": {"temperature": "5.2uK"},
  "decay": {"lifetimes": ["122us"], "t2_prime": "74us"},
  "observable": "fringe",
  "fringe_offset": "2pi*0.4MHz"
})"},
    {"fig4b", R"({
  "kind": "t1-2pi",
  "shots": 200,
  "geometry": "two-photon",
  "scan": {"variable": "gap", "start": "0us", "stop": "500us", "points": 26},
  "drive": {"rabi": "2pi*1.188MHz"},
  "noise": {"temperature": "5.2uK"},
  "decay": {"lifetimes": ["209us", "940us"]}
})"},
    {"fig5", R"({
  "kind": "control-fringe",
  "shots": 300,
  "geometry": "two-photon",
  "scan": {"variable": "dt", "start": "0us", "stop": "6us", "points": 41},
  "t_values": ["0us", "1us", "2us", "3us", "4us", "5us"],
  "drive": {"rabi": "2pi*1.188MHz"},
  "gnd_drive": {"rabi": "2pi*250kHz"},
  "noise": {"temperature": "5.2uK"},
  "decay": {"lifetimes": ["122us"], "t2_prime": "74us"},
  "fringe_offset": "2pi*0.35MHz"
})"},
    {"fig6", R"({
  "kind": "cz-scan",
  "shots": 1,
  "geometry": "single-photon",
  "scan": {"variable": "detuning", "start": "-2pi*100kHz", "stop": "2pi*100kHz", "points": 41},
  "drive": {"rabi": "2pi*1MHz"},
  "blockade": "2pi*1000MHz",
  "noise": {"temperature": "0K"}
})"},
    {"fig7", R"({
  "kind": "temp-sweep",
  "shots": 1000,
  "geometry": "single-photon",
  "scan": {"variable": "temperature", "values": ["0.25uK", "0.5uK", "1uK", "2uK", "4uK"]},
  "drive": {"rabi": "2pi*1MHz"},
  "blockade": "2pi*1000MHz"
})"},
    {"fig8", R"({
  "kind": "temp-sweep",
  "shots": 600,
  "geometry": "two-photon",
  "scan": {"variable": "temperature", "values": ["1uK", "2uK", "5uK", "10uK", "20uK"]},
  "two_photon": {"rabi_red": "2pi*215MHz", "rabi_blue": "2pi*62MHz", "detuning1": "-2pi*5.7GHz"},
  "blockade": "2pi*1000MHz"
})"},
};

} // namespace

nlohmann::json preset_json(const std::string& name) {
    const auto it = kPresets.find(name);
    if (it == kPresets.end()) {
        std::string known;
        for (const auto& [k, v] : kPresets)
            known += (known.empty() ? "" : ", ") + k;
        throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
    }
    return nlohmann::json::parse(it->second);
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : kPresets)
        names.push_back(k);
    return names;
}

} // namespace rydsim
