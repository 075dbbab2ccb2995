// Replays a scenario transcript against a fresh simulated chain and writes
// the report (outcomes, event log, aggregations, final state and its hash).
//
// Exit status is 0 whenever the run completes, even if individual
// transactions were rejected; load errors and I/O faults exit nonzero.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hip/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic replay of HIP contract scenarios"};
  std::string scenario_path;
  std::string output_path;
  bool per_instruction_hash = false;
  bool quiet = false;
  app.add_option("scenario", scenario_path, "Scenario transcript to replay")->required();
  app.add_option("-o,--output", output_path, "Write the report to this file instead of stdout");
  app.add_flag("--per-instruction-hash", per_instruction_hash,
               "Record the state hash after every instruction");
  app.add_flag("-q,--quiet", quiet, "Suppress the summary line");
  CLI11_PARSE(app, argc, argv);

  hip::scenario::Transcript transcript;
  try {
    transcript = hip::scenario::load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << scenario_path << ": " << e.what() << "\n";
    return 2;
  }

  const auto report = hip::scenario::run(transcript, {per_instruction_hash});
  const auto text = hip::scenario::format_report(report);

  if (output_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output_path, std::ios::binary);
    if (!out || !(out << text)) {
      std::cerr << "cannot write report to " << output_path << "\n";
      return 3;
    }
  }
  if (!quiet) {
    std::cerr << report.outcomes.size() << " instructions, " << report.rejected_count()
              << " rejected, state " << report.state_hash << "\n";
  }
  return 0;
}
