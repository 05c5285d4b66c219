// Command-line front end: run scenarios, list operations, run the acceptance suite.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cantor/acceptance.hpp"
#include "cantor/scenario.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kVerificationFailure = 1;
constexpr int kInputError = 2;

void print_summary(const cantor::Report& rep) {
  for (const auto& r : rep.requests) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  [" << r.index << "] " << r.request.op;
    if (r.error) std::cout << "  error: " << *r.error;
    std::size_t vacuous = 0;
    for (const auto& w : r.witnesses) vacuous += w.certificate.threshold >= w.certificate.complete;
    if (!r.witnesses.empty())
      std::cout << "  (" << r.witnesses.size() << " witnesses, " << vacuous << " vacuous at this horizon)";
    for (const auto& w : r.witnesses) {
      if (!w.certificate.pass) {
        std::cout << "\n      witness " << w.index << " (" << w.label << ") fails";
        for (const auto& rec : w.certificate.records)
          if (!rec.pass) {
            std::cout << " at block " << rec.block << ", fold " << rec.fold;
            if (rec.counterexample) std::cout << ", sum " << rec.counterexample->str();
            break;
          }
      }
    }
    if (r.result && !r.kind_ok) std::cout << "\n      output tree is not " << r.result->promised;
    if (r.subtree_ok && !*r.subtree_ok) std::cout << "\n      output tree is not a subtree of the input";
    std::cout << '\n';
  }
  std::cout << (rep.pass ? "scenario passed" : "scenario FAILED") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon certificates for algebraic sums of tree bodies"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run every request of a scenario and certify the witnesses");
  std::string scenario_path;
  std::size_t horizon_cap = cantor::kDefaultHorizonCap;
  std::string folds;
  bool no_exhaustive = false;
  bool deterministic = false;
  std::string out_path;
  run_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run_cmd->add_option("--horizon-cap", horizon_cap, "Largest horizon for exhaustive containment")->capture_default_str();
  run_cmd->add_option("--folds", folds, "Fold counts, e.g. 0..3 or 0,2 (default 0..3)");
  run_cmd->add_flag("--no-exhaustive", no_exhaustive, "Skip exhaustive containment");
  run_cmd->add_flag("--deterministic", deterministic, "Omit timestamps and timings from the report");
  run_cmd->add_option("--out", out_path, "Write the JSON report here");

  auto* selftest_cmd = app.add_subcommand("selftest", "Run the built-in acceptance suite");
  selftest_cmd->add_flag("--deterministic", deterministic, "Accepted for symmetry with run");

  app.add_subcommand("list-ops", "List construction operations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }

  if (app.got_subcommand("list-ops")) {
    for (const auto& op : cantor::operations()) {
      std::cout << op.name << '(';
      for (std::size_t i = 0; i < op.args.size(); ++i) std::cout << (i ? ", " : "") << op.args[i];
      std::cout << ")  " << op.summary << '\n';
    }
    return kPass;
  }

  if (app.got_subcommand("selftest")) {
    bool ok = true;
    for (const auto& r : cantor::run_acceptance(std::cout)) ok = ok && r.pass;
    return ok ? kPass : kVerificationFailure;
  }

  cantor::Scenario sc;
  cantor::RunOptions ro;
  try {
    sc = cantor::load_scenario(scenario_path);
    if (!folds.empty()) ro.folds = cantor::parse_folds(folds);
  } catch (const cantor::Error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  }
  ro.horizon_cap = horizon_cap;
  ro.exhaustive = !no_exhaustive;
  ro.deterministic = deterministic;

  const auto rep = cantor::run(sc, ro);
  print_summary(rep);
  if (!out_path.empty()) {
    try {
      cantor::emit(rep, out_path, deterministic);
    } catch (const cantor::Error& e) {
      std::cerr << "input error: " << e.what() << '\n';
      return kInputError;
    }
  }
  return cantor::exit_code(rep) == 0 ? kPass : kVerificationFailure;
}
