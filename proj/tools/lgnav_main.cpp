// lgnav: headless mission runs, the HTTP service, and report summaries.
//
//   lgnav run --scenario s.json [--feedback f.json] [--out r.json] [--summary t.txt]
//   lgnav serve --scenario s.json [--bind 127.0.0.1:8080] [--tick-ms 200]
//   lgnav summarize r1.json r2.json ...
//
// run exits 0 when the mission is reached, 2 on timeout or stall, 1 on
// configuration errors.

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lgnav/errors.hpp"
#include "lgnav/io.hpp"
#include "lgnav/metrics.hpp"
#include "lgnav/service.hpp"
#include "lgnav/sim.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
};

lgnav::Scenario load_with_overrides(const std::string& path, const Overrides& o) {
  lgnav::Scenario s = lgnav::load_scenario(path);
  if (o.seed) s.seed = *o.seed;
  if (o.tau) {
    s.tau = *o.tau;
    try {
      s.validate();
    } catch (const lgnav::Error& e) {
      throw lgnav::ConfigError("--tau", 0, e.what());
    }
  }
  return s;
}

std::string summary_for(const lgnav::MissionReport& report, const lgnav::ReportMetrics& m) {
  lgnav::RouteSummary row;
  row.route = report.scenario;
  if (m.rmse) row.rmse.push_back(*m.rmse);
  if (m.triggered_as_intended) row.trials.push_back({*m.triggered_as_intended, {}});
  std::ostringstream os;
  os << lgnav::format_summary_table({row});
  os << "outcome: " << lgnav::to_string(report.outcome) << ", queries: " << report.queries.size()
     << ", spliced waypoints: " << m.spliced_waypoints << ", sim time: " << report.final_time << " s\n";
  return os.str();
}

int cmd_run(const std::string& scenario_path, const std::string& feedback_path, const std::string& out_path,
            const std::string& summary_path, const Overrides& o) {
  lgnav::Scenario scenario;
  std::vector<std::vector<std::string>> script;
  try {
    scenario = load_with_overrides(scenario_path, o);
    if (!feedback_path.empty()) script = lgnav::load_feedback_script(feedback_path);
  } catch (const lgnav::Error& e) {
    std::cerr << "lgnav: " << e.what() << "\n";
    return 1;
  }

  lgnav::ScriptedFeedback feedback(std::move(script));
  const lgnav::MissionReport report = lgnav::run(scenario, feedback);
  const lgnav::ReportMetrics metrics = lgnav::evaluate(report, scenario);
  for (const auto& msg : feedback.rejected()) std::cerr << "lgnav: feedback rejected: " << msg << "\n";

  const std::string doc = lgnav::report_to_string(report, metrics);
  if (out_path.empty() || out_path == "-") {
    std::cout << doc;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << doc;
    if (!out) {
      std::cerr << "lgnav: cannot write " << out_path << "\n";
      return 1;
    }
  }
  const std::string summary = summary_for(report, metrics);
  if (!summary_path.empty()) {
    std::ofstream out(summary_path, std::ios::binary);
    out << summary;
  } else {
    std::cerr << summary;
  }
  return report.reached ? 0 : 2;
}

int cmd_serve(const std::string& scenario_path, const std::string& bind, int tick_ms, const Overrides& o) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "lgnav: --bind expects host:port\n";
    return 1;
  }
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "lgnav: bad port in --bind " << bind << "\n";
    return 1;
  }

  lgnav::Scenario scenario;
  try {
    scenario = load_with_overrides(scenario_path, o);
  } catch (const lgnav::Error& e) {
    std::cerr << "lgnav: " << e.what() << "\n";
    return 1;
  }

  // Block the stop signals in every thread; the main thread waits for them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  lgnav::ServiceOptions opts;
  opts.tick_period = std::chrono::milliseconds(tick_ms);
  lgnav::Service service(std::move(scenario), opts);
  int bound = 0;
  try {
    bound = service.start(host, port);
  } catch (const lgnav::Error& e) {
    std::cerr << "lgnav: " << e.what() << "\n";
    return 1;
  }
  std::cout << "listening on " << host << ":" << bound << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  service.stop();
  return 0;
}

int cmd_summarize(const std::vector<std::string>& paths) {
  std::map<std::string, lgnav::RouteSummary> rows;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      std::cerr << "lgnav: cannot open " << path << "\n";
      return 1;
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("scenario") || !doc.contains("metrics")) {
      std::cerr << "lgnav: " << path << " is not a mission report\n";
      return 1;
    }
    auto& row = rows[doc["scenario"].get<std::string>()];
    row.route = doc["scenario"].get<std::string>();
    const json& m = doc["metrics"];
    if (m.contains("rmse") && m["rmse"].is_number()) row.rmse.push_back(m["rmse"].get<double>());
    if (m.contains("triggered_as_intended") && m["triggered_as_intended"].is_boolean())
      row.trials.push_back({m["triggered_as_intended"].get<bool>(), path});
  }
  std::vector<lgnav::RouteSummary> table;
  for (auto& [name, row] : rows) table.push_back(std::move(row));
  std::cout << lgnav::format_summary_table(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Language-guided navigation simulator"};
  app.require_subcommand(1);

  std::string scenario_path, feedback_path, out_path, summary_path, bind = "127.0.0.1:8080";
  Overrides overrides;
  std::uint64_t seed = 0;
  double tau = 0.0;
  bool headless = false;
  int tick_ms = 200;
  std::vector<std::string> reports;

  auto* run = app.add_subcommand("run", "Run a scenario headless with scripted feedback");
  run->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  run->add_option("--feedback", feedback_path, "Feedback script JSON (array of phrase lists)");
  run->add_option("--out", out_path, "Report JSON path ('-' for stdout)");
  run->add_option("--summary", summary_path, "Write the summary table here instead of stderr");
  auto* run_seed = run->add_option("--seed", seed, "Override the scenario seed");
  auto* run_tau = run->add_option("--tau", tau, "Override the deviation threshold");
  run->add_flag("--headless", headless, "Accepted for compatibility; runs are always headless");

  auto* serve = app.add_subcommand("serve", "Serve a scenario over HTTP");
  serve->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  serve->add_option("--bind", bind, "host:port (port 0 picks a free port)");
  serve->add_option("--tick-ms", tick_ms, "Wall time per tick while running")->check(CLI::Range(1, 60000));
  auto* serve_seed = serve->add_option("--seed", seed, "Override the scenario seed");
  auto* serve_tau = serve->add_option("--tau", tau, "Override the deviation threshold");

  auto* summarize = app.add_subcommand("summarize", "Tabulate mission reports");
  summarize->add_option("reports", reports, "Report JSON files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (run_seed->count() || serve_seed->count()) overrides.seed = seed;
  if (run_tau->count() || serve_tau->count()) overrides.tau = tau;

  if (run->parsed()) return cmd_run(scenario_path, feedback_path, out_path, summary_path, overrides);
  if (serve->parsed()) return cmd_serve(scenario_path, bind, tick_ms, overrides);
  return cmd_summarize(reports);
}
