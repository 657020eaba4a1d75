#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "powertrace/error.hpp"
#include "powertrace/version.hpp"

int main(int argc, char** argv) {
  using namespace powertrace;
  const cli::Argv args(argv, argv + argc);

  CLI::App app{"powertrace: telemetry analysis for hybrid battery / fuel-cell powertrains"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  cli::register_analysis(app, args);
  cli::register_classify(app, args);
  cli::register_forecast(app, args);
  cli::register_synth(app, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.qualified_code();
    if (e.line()) std::cerr << " (line " << *e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return is_input_error(e.code()) ? 2 : 1;
  } catch (const cli::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
