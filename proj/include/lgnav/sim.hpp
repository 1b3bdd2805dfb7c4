#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lgnav/grid.hpp"
#include "lgnav/planner.hpp"
#include "lgnav/query_decision.hpp"
#include "lgnav/semantic_map.hpp"
#include "lgnav/waypoint_graph.hpp"

namespace lgnav {

struct Mission {
  std::vector<WorldPose> waypoints;
  double goal_tolerance = 0.05;     // meters
  double heading_tolerance = 0.1;   // radians
};

struct ChangeEvent {
  double time = 0.0;  // seconds
  std::vector<GridIndex> cells;
  Cell state = Cell::Occupied;
};

// What happens to the rest of the mission after a feedback splice.
enum class SpliceMode {
  Retain,   // selected route, then the interrupted and remaining mission waypoints
  Replace,  // selected route only
};

struct Scenario {
  std::string name;
  OccupancyGrid true_grid;
  OccupancyGrid prior_grid;
  FeatureGrid feature_grid;
  Vocabulary vocabulary;
  WorldPose start;
  Mission mission;
  std::vector<ChangeEvent> change_events;
  double sensor_radius = 1.0;  // meters
  double speed = 0.5;          // meters per second
  double replan_rate = 5.0;    // Hz; also the simulation tick rate
  double tau = DeviationMonitor::kDefaultTau;
  std::uint64_t seed = 0;
  PlannerConfig planner;
  MapQueryParams map_query;             // k, radius, filter; seed is taken from `seed`
  std::optional<double> prune_eps;      // default 2 * resolution
  std::optional<double> timeout_s;      // default 10x nominal traversal time
  SpliceMode splice = SpliceMode::Retain;

  // Evaluation extras; not used by the simulation itself.
  std::vector<WorldPose> reference_route;
  std::optional<int> expected_queries;

  // Throws Error describing the first violated invariant.
  void validate() const;
  double dt() const { return 1.0 / replan_rate; }
  double effective_prune_eps() const { return prune_eps.value_or(2.0 * true_grid.resolution()); }
};

// Nominal mission duration: prior-map plan lengths (straight line where the
// prior has no path) divided by speed.
double nominal_traversal_time(const Scenario& scenario);
double effective_timeout(const Scenario& scenario);

struct TimedPose {
  double time = 0.0;
  WorldPose pose;
};

struct FeedbackAttempt {
  double time = 0.0;
  std::vector<std::string> phrases;
  std::string error;  // empty when the attempt was applied
};

struct QueryRecord {
  int id = 0;
  double raised_at = 0.0;
  long tick = 0;
  WorldPose pose;
  std::optional<double> deviation;  // +inf for NoPath
  std::vector<FeedbackAttempt> attempts;
  bool resolved = false;
  double resolved_at = 0.0;
  std::vector<std::string> phrases;
  std::vector<std::vector<CandidateWaypoint>> candidates;  // per description
  std::vector<WorldPose> route;
  double route_length = 0.0;
};

struct Target {
  WorldPose pose;
  int mission_index = -1;  // -1 for waypoints spliced in from feedback
  int query_id = -1;
};

struct SimState {
  long tick = 0;
  double time = 0.0;
  WorldPose robot;
  OccupancyGrid true_grid;  // evolves with change events
  OccupancyGrid live_grid;  // prior overwritten by sensed truth
  std::optional<PlannedPath> current_plan;
  std::vector<Target> targets;  // front is the active goal
  int mission_cursor = 0;       // next mission waypoint not yet reached
  bool pending_query = false;
  bool complete = false;
  std::size_t next_event = 0;
  DeviationMonitor monitor;
  std::vector<TimedPose> executed_trajectory;
  std::vector<QueryRecord> query_log;
  std::vector<std::string> errors;

  explicit SimState(double tau = DeviationMonitor::kDefaultTau) : monitor(tau) {}
};

enum class SimEventKind { QueryRaised, PlanUpdated, WaypointReached, MissionComplete, Error };

const char* to_string(SimEventKind kind);

struct SimEvent {
  SimEventKind kind = SimEventKind::Error;
  double time = 0.0;
  long tick = 0;
  WorldPose robot;
  int query_id = -1;
  int mission_index = -1;
  std::string message;
};

using SimListener = std::function<void(const SimEvent&)>;

// Single-writer discrete-time executor for the language-guided navigation loop.
class Simulator {
 public:
  explicit Simulator(Scenario scenario, SimListener listener = {});
  // Continues from a previously captured state.
  Simulator(Scenario scenario, SimState state);

  const Scenario& scenario() const { return scenario_; }
  const SimState& state() const { return state_; }
  bool finished() const { return state_.complete; }
  bool pending_query() const { return state_.pending_query; }

  // One tick: events, sensing, replanning, query decision, motion.
  // Requires !finished() && !pending_query().
  void step();

  // Resolves the pending query with ordered phrases. On UnknownPhrase,
  // NoMatch or NoFeasibleRoute the query stays pending, the attempt is
  // logged, and the exception propagates.
  void handle_feedback(const std::vector<std::string>& phrases);

  void set_listener(SimListener listener) { listener_ = std::move(listener); }

 private:
  void apply_due_events();
  void sense();
  void replan();
  void assess_and_maybe_query();
  void move(double distance);
  void trim_plan_to_robot();
  void arrive_if_close();
  void record_pose();
  void emit(SimEventKind kind, std::string message = {}, int query_id = -1, int mission_index = -1);
  std::vector<Target> mission_tail() const;

  Scenario scenario_;
  SimState state_;
  SimListener listener_;
};

SimState step(SimState state, const Scenario& scenario);

class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  // Next ordered phrase list for the given query. Throws FeedbackExhausted.
  virtual std::vector<std::string> next(const QueryRecord& query) = 0;
  // The last phrases were rejected; `message` explains why.
  virtual void report_error(const std::string& message) { (void)message; }
};

// Replays a fixed list of responses; each call consumes one entry.
class ScriptedFeedback final : public FeedbackSource {
 public:
  explicit ScriptedFeedback(std::vector<std::vector<std::string>> script) : script_(std::move(script)) {}
  std::vector<std::string> next(const QueryRecord& query) override;
  void report_error(const std::string& message) override { rejected_.push_back(message); }
  const std::vector<std::string>& rejected() const { return rejected_; }
  std::size_t consumed() const { return cursor_; }

 private:
  std::vector<std::vector<std::string>> script_;
  std::size_t cursor_ = 0;
  std::vector<std::string> rejected_;
};

enum class RunOutcome { Reached, Timeout, Stalled };

const char* to_string(RunOutcome outcome);

struct MissionReport {
  std::string scenario;
  bool reached = false;
  RunOutcome outcome = RunOutcome::Timeout;
  long tick_count = 0;
  double final_time = 0.0;
  double wall_clock_s = 0.0;  // left out of the JSON report, which must be reproducible
  std::vector<TimedPose> executed_trajectory;
  std::vector<QueryRecord> queries;
  std::vector<std::string> errors;
};

MissionReport run(const Scenario& scenario, FeedbackSource& feedback);

}  // namespace lgnav
