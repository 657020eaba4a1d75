#pragma once

#include <string>
#include <vector>

#include <CLI11.hpp>

namespace powertrace::cli {

using Argv = std::vector<std::string>;

void register_analysis(CLI::App& app, const Argv& argv);
void register_classify(CLI::App& app, const Argv& argv);
void register_forecast(CLI::App& app, const Argv& argv);
void register_synth(CLI::App& app, const Argv& argv);

}  // namespace powertrace::cli
