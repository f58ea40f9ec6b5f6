// pasim: run, audit and calibrate admittance scenarios.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "passive_admittance/errors.hpp"
#include "passive_admittance/scenario_io.hpp"
#include "passive_admittance/sim_harness.hpp"

namespace pa = passive_admittance;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kInvalid = 2, kAborted = 3, kViolation = 4 };

struct Overrides {
  std::string mode;
  std::string damping_mode;
  bool no_adapt = false;
};

void apply(const Overrides& o, pa::Scenario& sc) {
  if (!o.mode.empty()) sc.adaptation.mode = pa::adaptation_mode_from_string(o.mode);
  if (!o.damping_mode.empty()) {
    sc.adaptation.damping_mode = pa::damping_mode_from_string(o.damping_mode);
  }
  if (o.no_adapt) sc.adaptation.enabled = false;
  pa::validate_scenario(sc);
}

void print_report(const pa::PassivityReport& r, std::ostream& out) {
  out << "W(0) = " << pa::format_decimal(r.w0) << " J, tol = " << pa::format_decimal(r.tolerance)
      << " J\nmin margin = " << pa::format_decimal(r.min_margin) << " J at t = "
      << pa::format_decimal(r.min_margin_time) << " s\n";
  if (r.violated) {
    out << "VIOLATION at " << r.violation_times.size() << " samples, first t = "
        << pa::format_decimal(r.violation_times.front()) << " s\n";
  } else {
    out << "passive\n";
  }
}

struct RunOutcome {
  int code = kOk;
  std::string message;
};

RunOutcome run_one(const pa::Scenario& sc, const std::filesystem::path& out, bool audit, double tol) {
  RunOutcome outcome;
  const pa::ScenarioResult result = pa::run_scenario(sc);
  pa::write_trace_csv(result.trace, out);
  std::string msg = sc.name + ": " + std::to_string(result.trace.records.size()) + " ticks, " +
                    std::to_string(result.adaptations.size()) + " adaptations -> " + out.string() +
                    "\n";
  if (result.abort_reason) {
    outcome.code = kAborted;
    msg += "aborted: " + *result.abort_reason + "\n";
  } else if (audit) {
    const pa::PassivityReport report = pa::passivity_audit(result.trace, tol);
    std::ostringstream text;
    print_report(report, text);
    msg += text.str();
    if (report.violated) outcome.code = kViolation;
  }
  outcome.message = msg;
  return outcome;
}

std::vector<double> default_scales() {
  return {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive admittance adaptation simulator"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string scenario_arg;
  std::string out_path;
  bool audit = false;
  double tol = 1e-3;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write its trace CSV");
  run->add_option("--scenario", scenario_arg, "Bundled scenario name or YAML file")->required();
  run->add_option("--out", out_path, "Trace CSV path")->required();
  run->add_option("--mode", overrides.mode, "Adaptation mode")
      ->check(CLI::IsMember({"conservative", "tank"}));
  run->add_option("--damping-mode", overrides.damping_mode, "Damping update")
      ->check(CLI::IsMember({"constant", "ratio", "constant_damping", "constant_ratio"}));
  run->add_flag("--no-adapt", overrides.no_adapt, "Disable adaptation");
  run->add_flag("--audit", audit, "Run the passivity audit on the trace");
  run->add_option("--tol", tol, "Audit tolerance in J")->check(CLI::PositiveNumber);

  std::string trace_path;
  auto* audit_cmd = app.add_subcommand("audit", "Passivity audit of a trace CSV");
  audit_cmd->add_option("--trace", trace_path, "Trace CSV")->required();
  audit_cmd->add_option("--tol", tol, "Audit tolerance in J")->check(CLI::PositiveNumber);

  std::vector<double> scales;
  auto* calibrate = app.add_subcommand("calibrate", "Sweep the stiffening event stiffness");
  calibrate->add_option("--scenario", scenario_arg, "Bundled scenario name or YAML file")
      ->required();
  calibrate->add_option("--scales", scales, "Stiffness multipliers");

  std::string show;
  auto* corpus = app.add_subcommand("corpus", "List bundled scenarios");
  corpus->add_option("--show", show, "Print the YAML of one bundled scenario");

  std::vector<std::string> batch_scenarios;
  std::string out_dir;
  auto* batch = app.add_subcommand("batch", "Run several scenarios concurrently");
  batch->add_option("--scenario", batch_scenarios, "Bundled scenario names or YAML files")
      ->required();
  batch->add_option("--out-dir", out_dir, "Directory for <name>.csv traces")->required();
  batch->add_option("--mode", overrides.mode, "Adaptation mode")
      ->check(CLI::IsMember({"conservative", "tank"}));
  batch->add_option("--damping-mode", overrides.damping_mode, "Damping update")
      ->check(CLI::IsMember({"constant", "ratio", "constant_damping", "constant_ratio"}));
  batch->add_flag("--no-adapt", overrides.no_adapt, "Disable adaptation");
  batch->add_flag("--audit", audit, "Run the passivity audit on each trace");
  batch->add_option("--tol", tol, "Audit tolerance in J")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*run) {
      pa::Scenario sc = pa::resolve_scenario(scenario_arg);
      apply(overrides, sc);
      const RunOutcome outcome = run_one(sc, out_path, audit, tol);
      (outcome.code == kOk ? std::cout : std::cerr) << outcome.message;
      return outcome.code;
    }
    if (*audit_cmd) {
      const pa::Trace trace = pa::read_trace_csv(std::filesystem::path(trace_path));
      if (trace.records.empty()) throw pa::ValidationError("trace", "has no records");
      const pa::PassivityReport report = pa::passivity_audit(trace, tol);
      print_report(report, std::cout);
      return report.violated ? kViolation : kOk;
    }
    if (*calibrate) {
      const pa::Scenario sc = pa::resolve_scenario(scenario_arg);
      const auto points = pa::calibrate_stiffness(sc, scales.empty() ? default_scales() : scales);
      std::cout << "stiffness,unstable,detection_latency,compliant_psi_peak,early,late\n";
      for (const auto& p : points) {
        std::cout << pa::format_decimal(p.stiffness) << ',' << (p.unstable ? 1 : 0) << ','
                  << (p.detection_latency ? pa::format_decimal(*p.detection_latency) : "none")
                  << ',' << pa::format_decimal(p.compliant_psi_peak) << ','
                  << pa::format_decimal(p.early_amplitude) << ','
                  << pa::format_decimal(p.late_amplitude) << '\n';
      }
      return kOk;
    }
    if (*corpus) {
      for (const auto& entry : pa::bundled_scenarios()) {
        if (show.empty()) {
          std::cout << entry.name << '\n';
        } else if (entry.name == show) {
          std::cout << entry.text;
          return kOk;
        }
      }
      if (!show.empty()) {
        std::cerr << "no bundled scenario named '" << show << "'\n";
        return kUsage;
      }
      return kOk;
    }
    if (*batch) {
      std::vector<pa::Scenario> scenarios;
      for (const auto& arg : batch_scenarios) {
        scenarios.push_back(pa::resolve_scenario(arg));
        apply(overrides, scenarios.back());
      }
      std::filesystem::create_directories(out_dir);
      std::vector<std::future<RunOutcome>> jobs;
      for (const auto& sc : scenarios) {
        const auto path = std::filesystem::path(out_dir) / (sc.name + ".csv");
        jobs.push_back(std::async(std::launch::async, run_one, sc, path, audit, tol));
      }
      int code = kOk;
      for (auto& job : jobs) {
        const RunOutcome outcome = job.get();
        std::cout << outcome.message;
        code = std::max(code, outcome.code);
      }
      return code;
    }
  } catch (const pa::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInvalid;
  } catch (const pa::ValidationError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAborted;
  }
  return kUsage;
}
