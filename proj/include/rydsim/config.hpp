#pragma once

#include <string>

#include <json.hpp>

#include "rydsim/experiments.hpp"

namespace rydsim {

/// Unit-suffixed value parsing. Frequencies may carry an explicit "2pi*"
/// prefix; plain Hz-family values mean cycles/s and are converted to angular
/// frequency (rad/s) on ingest, so "1MHz" and "2pi*1MHz" are the same drive.
/// "rad/s" bypasses the conversion. Plain numbers are taken as SI base units.
double parse_frequency(const nlohmann::json& v, const std::string& field); // -> rad/s
double parse_time(const nlohmann::json& v, const std::string& field);      // -> s
double parse_temperature(const nlohmann::json& v, const std::string& field); // -> K
double parse_length(const nlohmann::json& v, const std::string& field);      // -> m
double parse_number(const nlohmann::json& v, const std::string& field);

/// Builds a validated ExperimentConfig from a JSON document. Unknown keys are
/// rejected with the offending path in the message.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical figure presets (fig2b, fig3a, fig3b, fig4a, fig4b, fig5, fig6,
/// fig7, fig8) as JSON documents.
nlohmann::json preset_json(const std::string& name);
std::vector<std::string> preset_names();

} // namespace rydsim
