#include "lgnav/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lgnav/errors.hpp"
#include "lgnav/metrics.hpp"

namespace lgnav {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i + 1 < end; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

json parse_json(const std::string& text, const std::string& source_name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source_name, line_of_byte(text, e.byte), "invalid JSON");
  }
}

// Field access with the JSON path in every error message.
class Reader {
 public:
  Reader(const json& j, std::string source, std::string path) : j_(j), source_(std::move(source)), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(source_, 0, path_ + ": " + what); }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  Reader at(const char* key) const {
    if (!j_.is_object() || !j_.contains(key)) fail(std::string("missing field '") + key + "'");
    return Reader(j_.at(key), source_, path_ + "." + key);
  }
  Reader item(std::size_t i) const { return Reader(j_.at(i), source_, path_ + "[" + std::to_string(i) + "]"); }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::size_t array_size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j_.items())
      if (!ok.contains(item.key())) fail("unknown field '" + item.key() + "'");
  }

  WorldPose pose() const {
    const std::size_t n = array_size();
    if (n != 2 && n != 3) fail("expected [x, y] or [x, y, theta]");
    return WorldPose{item(0).number(), item(1).number(), n == 3 ? item(2).number() : 0.0};
  }
  GridIndex cell() const {
    if (array_size() != 2) fail("expected [row, col]");
    return GridIndex{static_cast<int>(item(0).integer()), static_cast<int>(item(1).integer())};
  }

 private:
  const json& j_;
  std::string source_;
  std::string path_;
};

Cell parse_cell_state(const Reader& r) {
  const std::string s = r.string();
  if (s == "occupied") return Cell::Occupied;
  if (s == "free") return Cell::Free;
  if (s == "unknown") return Cell::Unknown;
  r.fail("expected one of occupied, free, unknown");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source_name, const std::string& base_dir) {
  const json doc = parse_json(text, source_name);
  const Reader root(doc, source_name, "$");
  root.expect_object({"name", "true_grid", "prior_grid", "feature_grid", "vocabulary", "start", "mission",
                      "change_events", "sensor_radius", "speed", "replan_rate", "tau", "seed", "planner", "semantic",
                      "prune_eps", "timeout_s", "splice", "reference_route", "expected_queries"});

  auto resolve = [&](const std::string& rel) {
    const std::filesystem::path p(rel);
    return (p.is_absolute() ? p : std::filesystem::path(base_dir) / p).string();
  };

  Scenario s;
  s.name = root.has("name") ? root.at("name").string() : std::filesystem::path(source_name).stem().string();
  s.true_grid = load_occupancy_grid(resolve(root.at("true_grid").string()));
  s.prior_grid = root.has("prior_grid") ? load_occupancy_grid(resolve(root.at("prior_grid").string())) : s.true_grid;
  s.feature_grid = load_feature_grid(resolve(root.at("feature_grid").string()));
  s.vocabulary = Vocabulary::load(resolve(root.at("vocabulary").string()));
  s.start = root.at("start").pose();

  const Reader mission = root.at("mission");
  mission.expect_object({"waypoints", "goal_tolerance", "heading_tolerance"});
  const Reader wps = mission.at("waypoints");
  for (std::size_t i = 0; i < wps.array_size(); ++i) s.mission.waypoints.push_back(wps.item(i).pose());
  if (mission.has("goal_tolerance")) s.mission.goal_tolerance = mission.at("goal_tolerance").number();
  if (mission.has("heading_tolerance")) s.mission.heading_tolerance = mission.at("heading_tolerance").number();

  if (root.has("change_events")) {
    const Reader events = root.at("change_events");
    for (std::size_t i = 0; i < events.array_size(); ++i) {
      const Reader ev = events.item(i);
      ev.expect_object({"time", "cells", "rect", "state"});
      ChangeEvent ce;
      ce.time = ev.at("time").number();
      ce.state = ev.has("state") ? parse_cell_state(ev.at("state")) : Cell::Occupied;
      if (ev.has("cells")) {
        const Reader cells = ev.at("cells");
        for (std::size_t k = 0; k < cells.array_size(); ++k) ce.cells.push_back(cells.item(k).cell());
      }
      if (ev.has("rect")) {
        const Reader rect = ev.at("rect");
        if (rect.array_size() != 4) rect.fail("expected [row0, col0, row1, col1]");
        const int r0 = static_cast<int>(rect.item(0).integer());
        const int c0 = static_cast<int>(rect.item(1).integer());
        const int r1 = static_cast<int>(rect.item(2).integer());
        const int c1 = static_cast<int>(rect.item(3).integer());
        for (int r = r0; r <= r1; ++r)
          for (int c = c0; c <= c1; ++c) ce.cells.push_back({r, c});
      }
      s.change_events.push_back(std::move(ce));
    }
  }

  if (root.has("sensor_radius")) s.sensor_radius = root.at("sensor_radius").number();
  if (root.has("speed")) s.speed = root.at("speed").number();
  if (root.has("replan_rate")) s.replan_rate = root.at("replan_rate").number();
  if (root.has("tau")) s.tau = root.at("tau").number();
  if (root.has("seed")) s.seed = static_cast<std::uint64_t>(root.at("seed").integer());

  if (root.has("planner")) {
    const Reader p = root.at("planner");
    p.expect_object({"inflation_radius", "treat_unknown_as"});
    if (p.has("inflation_radius")) s.planner.inflation_radius = p.at("inflation_radius").number();
    if (p.has("treat_unknown_as")) {
      const std::string u = p.at("treat_unknown_as").string();
      if (u == "obstacle") {
        s.planner.treat_unknown_as = UnknownAs::Obstacle;
      } else if (u == "free") {
        s.planner.treat_unknown_as = UnknownAs::Free;
      } else {
        p.at("treat_unknown_as").fail("expected obstacle or free");
      }
    }
  }
  if (root.has("semantic")) {
    const Reader q = root.at("semantic");
    q.expect_object({"k", "radius", "filter", "clearance_policy"});
    if (q.has("k")) s.map_query.k = static_cast<int>(q.at("k").integer());
    if (q.has("radius")) s.map_query.radius = q.at("radius").number();
    if (q.has("filter")) {
      const std::string f = q.at("filter").string();
      if (f == "open_close") {
        s.map_query.filter = MaskFilter::OpenClose;
      } else if (f == "none") {
        s.map_query.filter = MaskFilter::None;
      } else {
        q.at("filter").fail("expected open_close or none");
      }
    }
    if (q.has("clearance_policy")) {
      const std::string c = q.at("clearance_policy").string();
      if (c == "occupied_and_unknown") {
        s.map_query.clearance_policy = ObstaclePolicy::OccupiedAndUnknown;
      } else if (c == "occupied_only") {
        s.map_query.clearance_policy = ObstaclePolicy::OccupiedOnly;
      } else {
        q.at("clearance_policy").fail("expected occupied_and_unknown or occupied_only");
      }
    }
  }
  if (root.has("prune_eps")) s.prune_eps = root.at("prune_eps").number();
  if (root.has("timeout_s")) s.timeout_s = root.at("timeout_s").number();
  if (root.has("splice")) {
    const std::string m = root.at("splice").string();
    if (m == "retain") {
      s.splice = SpliceMode::Retain;
    } else if (m == "replace") {
      s.splice = SpliceMode::Replace;
    } else {
      root.at("splice").fail("expected retain or replace");
    }
  }
  if (root.has("reference_route")) {
    const Reader rr = root.at("reference_route");
    for (std::size_t i = 0; i < rr.array_size(); ++i) s.reference_route.push_back(rr.item(i).pose());
  }
  if (root.has("expected_queries")) s.expected_queries = static_cast<int>(root.at("expected_queries").integer());

  try {
    s.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(source_name, 0, e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  const std::string text = read_file(path);
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_scenario(text, path, base.empty() ? "." : base);
}

std::vector<std::vector<std::string>> parse_feedback_script(const std::string& text, const std::string& source_name) {
  const json doc = parse_json(text, source_name);
  const Reader root(doc, source_name, "$");
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < root.array_size(); ++i) {
    const Reader entry = root.item(i);
    std::vector<std::string> phrases;
    for (std::size_t k = 0; k < entry.array_size(); ++k) phrases.push_back(entry.item(k).string());
    out.push_back(std::move(phrases));
  }
  return out;
}

std::vector<std::vector<std::string>> load_feedback_script(const std::string& path) {
  return parse_feedback_script(read_file(path), path);
}

json to_json(const WorldPose& p) { return json::array({p.x, p.y, p.theta}); }

json to_json(const CandidateWaypoint& c) {
  return json{{"pose", to_json(c.pose)},
              {"cell", json::array({c.cell.row, c.cell.col})},
              {"region_id", c.region_id},
              {"clearance", std::isfinite(c.clearance) ? json(c.clearance) : json(nullptr)},
              {"description_index", c.description_index}};
}

json to_json(const QueryRecord& q) {
  json attempts = json::array();
  for (const FeedbackAttempt& a : q.attempts)
    attempts.push_back(json{{"time", a.time}, {"phrases", a.phrases}, {"error", a.error}});
  json candidates = json::array();
  for (const auto& layer : q.candidates) {
    json l = json::array();
    for (const CandidateWaypoint& c : layer) l.push_back(to_json(c));
    candidates.push_back(std::move(l));
  }
  json route = json::array();
  for (const WorldPose& w : q.route) route.push_back(to_json(w));
  json deviation = nullptr;
  if (q.deviation) deviation = std::isfinite(*q.deviation) ? json(*q.deviation) : json("no_path");
  return json{{"id", q.id},
              {"raised_at", q.raised_at},
              {"tick", q.tick},
              {"pose", to_json(q.pose)},
              {"deviation", deviation},
              {"resolved", q.resolved},
              {"resolved_at", q.resolved ? json(q.resolved_at) : json(nullptr)},
              {"phrases", q.phrases},
              {"attempts", attempts},
              {"candidates", candidates},
              {"route", route},
              {"route_length", q.route_length}};
}

ReportMetrics evaluate(const MissionReport& report, const Scenario& scenario) {
  ReportMetrics m;
  for (const QueryRecord& q : report.queries) m.spliced_waypoints += static_cast<int>(q.route.size());
  if (!scenario.reference_route.empty() && !report.executed_trajectory.empty()) {
    TrajectoryPair pair;
    for (const TimedPose& tp : report.executed_trajectory) pair.executed.push_back(tp.pose);
    pair.reference = scenario.reference_route;
    try {
      m.rmse = rmse(pair);
    } catch (const DegenerateTrajectory&) {
      m.rmse.reset();
    }
  }
  if (scenario.expected_queries)
    m.triggered_as_intended = static_cast<int>(report.queries.size()) == *scenario.expected_queries;
  return m;
}

json report_to_json(const MissionReport& report, const ReportMetrics& metrics) {
  json traj = json::array();
  for (const TimedPose& tp : report.executed_trajectory)
    traj.push_back(json::array({tp.time, tp.pose.x, tp.pose.y, tp.pose.theta}));
  json queries = json::array();
  for (const QueryRecord& q : report.queries) queries.push_back(to_json(q));
  json mj{{"rmse", metrics.rmse ? json(*metrics.rmse) : json(nullptr)},
          {"triggered_as_intended", metrics.triggered_as_intended ? json(*metrics.triggered_as_intended) : json(nullptr)},
          {"spliced_waypoints", metrics.spliced_waypoints}};
  return json{{"scenario", report.scenario},
              {"reached", report.reached},
              {"outcome", to_string(report.outcome)},
              {"tick_count", report.tick_count},
              {"final_time", report.final_time},
              {"executed_trajectory", traj},
              {"queries", queries},
              {"errors", report.errors},
              {"metrics", mj}};
}

std::string report_to_string(const MissionReport& report, const ReportMetrics& metrics) {
  return report_to_json(report, metrics).dump(2) + "\n";
}

}  // namespace lgnav
