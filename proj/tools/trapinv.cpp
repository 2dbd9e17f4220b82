// Command-line driver: trapinv SYSTEM.cbs [options]

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "trapinv/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deadlock and safety verification of parameterized ring systems via trap invariants"};
  trapinv::RunConfig cfg;
  std::string property, flow = "off", format = "text", report_file;
  app.add_option("system", cfg.input, "System description (.cbs)")->required()->check(CLI::ExistingFile);
  auto* prop_opt = app.add_option("--property", property,
                                  "deadlock, all, or comma-separated names of declared properties");
  app.add_option("--property-file", cfg.property_file, "File with additional property declarations")
      ->check(CLI::ExistingFile);
  app.add_option("--flow", flow, "Add the 1-invariant constraint")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--min-universe", cfg.min_universe, "Smallest universe size considered")
      ->check(CLI::PositiveNumber);
  app.add_option("--oracle", cfg.oracle_sizes, "Instance sizes to cross-check explicitly")->delimiter(',');
  app.add_option("--export-solver", cfg.export_path, "Write decision formulas as Mona input");
  app.add_option("--report", format, "Report format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--report-file", report_file, "Also write the report to this file");
  app.add_option("--max-states", cfg.max_states, "Automaton state cap");
  app.add_option("--max-markings", cfg.max_markings, "Reachability cap for oracle runs");
  app.add_flag("--timings", cfg.timings, "Include wall-clock times in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.use_flow = flow == "on";
  if (prop_opt->count())
    cfg.property = property;
  else if (!cfg.property_file.empty())
    cfg.property.clear();

  try {
    trapinv::Report r = trapinv::run(cfg);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    std::string text = format == "json" ? trapinv::format_json(r, cfg.timings)
                                        : trapinv::format_text(r, cfg.timings);
    std::cout << text;
    if (!report_file.empty()) {
      std::ofstream out(report_file);
      if (!out) {
        std::cerr << "error: cannot write '" << report_file << "'\n";
        return 2;
      }
      out << text;
    }
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
