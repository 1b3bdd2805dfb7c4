#include "lgnav/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lgnav/errors.hpp"

namespace lgnav {

const char* to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::QueryRaised: return "query_raised";
    case SimEventKind::PlanUpdated: return "plan_updated";
    case SimEventKind::WaypointReached: return "waypoint_reached";
    case SimEventKind::MissionComplete: return "mission_complete";
    case SimEventKind::Error: return "error";
  }
  return "error";
}

const char* to_string(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::Reached: return "reached";
    case RunOutcome::Timeout: return "timeout";
    case RunOutcome::Stalled: return "stalled";
  }
  return "timeout";
}

void Scenario::validate() const {
  if (!true_grid.same_geometry(prior_grid)) throw Error("true and prior grids are not aligned");
  if (feature_grid.width != true_grid.width() || feature_grid.height != true_grid.height())
    throw Error("feature grid is not aligned with the occupancy grids");
  if (vocabulary.size() > 0 && vocabulary.dim() != feature_grid.dim)
    throw Error("vocabulary dimension differs from the feature dimension");
  if (mission.waypoints.empty()) throw Error("mission needs at least one waypoint");
  if (!(mission.goal_tolerance > 0.0) || !(mission.heading_tolerance > 0.0))
    throw Error("mission tolerances must be > 0");
  if (!(replan_rate > 0.0)) throw Error("replan_rate must be > 0");
  if (!(speed > 0.0)) throw Error("speed must be > 0");
  if (!(sensor_radius >= 0.0)) throw Error("sensor_radius must be >= 0");
  if (!(tau > 0.0)) throw Error("tau must be > 0");
  if (planner.inflation_radius < 0.0) throw Error("inflation_radius must be >= 0");
  if (map_query.k < 1) throw Error("k must be >= 1");
  if (prune_eps && *prune_eps < 0.0) throw Error("prune_eps must be >= 0");
  if (timeout_s && !(*timeout_s > 0.0)) throw Error("timeout_s must be > 0");
  world_to_grid(start, true_grid);
  for (const WorldPose& w : mission.waypoints) world_to_grid(w, true_grid);
  for (const ChangeEvent& e : change_events) {
    if (!(e.time >= 0.0)) throw Error("change event times must be >= 0");
    for (const GridIndex& g : e.cells)
      if (!true_grid.in_bounds(g)) throw Error("change event cell outside the grid");
  }
}

double nominal_traversal_time(const Scenario& scenario) {
  const GridPlanner planner(scenario.prior_grid, scenario.planner);
  double length = 0.0;
  WorldPose from = scenario.start;
  for (const WorldPose& to : scenario.mission.waypoints) {
    const auto p = planner.plan(from, to);
    length += p ? p->length : planar_distance(from, to);
    from = to;
  }
  return length / scenario.speed;
}

double effective_timeout(const Scenario& scenario) {
  if (scenario.timeout_s) return *scenario.timeout_s;
  return std::max(10.0 * nominal_traversal_time(scenario), 1.0);
}

// ---------------------------------------------------------------------------

Simulator::Simulator(Scenario scenario, SimListener listener)
    : scenario_(std::move(scenario)), state_(scenario_.tau), listener_(std::move(listener)) {
  scenario_.validate();
  std::stable_sort(scenario_.change_events.begin(), scenario_.change_events.end(),
                   [](const ChangeEvent& a, const ChangeEvent& b) { return a.time < b.time; });
  state_.robot = scenario_.start;
  state_.true_grid = scenario_.true_grid;
  state_.live_grid = scenario_.prior_grid;
  state_.targets = mission_tail();

  // Sense, then adopt the initial trajectory as the reference.
  apply_due_events();
  sense();
  replan();
  state_.monitor.assess(state_.current_plan);
  record_pose();
  arrive_if_close();
}

Simulator::Simulator(Scenario scenario, SimState state) : scenario_(std::move(scenario)), state_(std::move(state)) {
  std::stable_sort(scenario_.change_events.begin(), scenario_.change_events.end(),
                   [](const ChangeEvent& a, const ChangeEvent& b) { return a.time < b.time; });
}

std::vector<Target> Simulator::mission_tail() const {
  std::vector<Target> out;
  const auto& wps = scenario_.mission.waypoints;
  for (std::size_t i = static_cast<std::size_t>(state_.mission_cursor); i < wps.size(); ++i)
    out.push_back(Target{wps[i], static_cast<int>(i), -1});
  return out;
}

void Simulator::emit(SimEventKind kind, std::string message, int query_id, int mission_index) {
  if (!listener_) return;
  listener_(SimEvent{kind, state_.time, state_.tick, state_.robot, query_id, mission_index, std::move(message)});
}

void Simulator::apply_due_events() {
  const auto& events = scenario_.change_events;
  while (state_.next_event < events.size() && events[state_.next_event].time <= state_.time + 1e-9) {
    for (const GridIndex& g : events[state_.next_event].cells) state_.true_grid.set(g, events[state_.next_event].state);
    ++state_.next_event;
  }
}

void Simulator::sense() {
  const OccupancyGrid& truth = state_.true_grid;
  const double res = truth.resolution();
  const double r = scenario_.sensor_radius;
  const double fx = (state_.robot.x - truth.origin().x) / res;
  const double fy = (state_.robot.y - truth.origin().y) / res;
  const int c0 = std::max(0, static_cast<int>(std::floor(fx - r / res)) - 1);
  const int c1 = std::min(truth.width() - 1, static_cast<int>(std::ceil(fx + r / res)) + 1);
  const int r0 = std::max(0, static_cast<int>(std::floor(fy - r / res)) - 1);
  const int r1 = std::min(truth.height() - 1, static_cast<int>(std::ceil(fy + r / res)) + 1);
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      const WorldPose center = grid_to_world({row, col}, truth);
      if (planar_distance(center, state_.robot) <= r) state_.live_grid.set(row, col, truth.at(row, col));
    }
  }
}

void Simulator::replan() {
  if (state_.targets.empty()) {
    state_.current_plan.reset();
    return;
  }
  const GridPlanner planner(state_.live_grid, scenario_.planner);
  state_.current_plan = planner.plan(state_.robot, state_.targets.front().pose);
}

void Simulator::record_pose() { state_.executed_trajectory.push_back(TimedPose{state_.time, state_.robot}); }

namespace {

// Robot sits on segment a->b (within numerical slack).
bool on_segment(const WorldPose& p, const WorldPose& a, const WorldPose& b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return false;
  const double wx = p.x - a.x;
  const double wy = p.y - a.y;
  const double t = (wx * vx + wy * vy) / len2;
  const double cross = std::abs(wx * vy - wy * vx) / std::sqrt(len2);
  return t >= 0.0 && t <= 1.0 && cross <= 1e-9;
}

}  // namespace

void Simulator::move(double distance) {
  if (!state_.current_plan || state_.targets.empty()) return;
  const PlannedPath& plan = *state_.current_plan;
  const WorldPose& goal = state_.targets.front().pose;

  // Cell centers, with the final center replaced by the exact goal position.
  std::vector<WorldPose> pts = plan.poses;
  pts.back() = WorldPose{goal.x, goal.y, 0.0};

  std::vector<WorldPose> poly{state_.robot};
  const std::size_t first = (pts.size() >= 2 && on_segment(state_.robot, pts[0], pts[1])) ? 1 : 0;
  poly.insert(poly.end(), pts.begin() + static_cast<std::ptrdiff_t>(first), pts.end());

  double left = distance;
  WorldPose pos = state_.robot;
  double heading = state_.robot.theta;
  for (std::size_t i = 1; i < poly.size() && left > 0.0; ++i) {
    const double seg = planar_distance(pos, poly[i]);
    if (seg == 0.0) continue;
    heading = std::atan2(poly[i].y - pos.y, poly[i].x - pos.x);
    if (seg <= left) {
      left -= seg;
      pos = WorldPose{poly[i].x, poly[i].y, 0.0};
    } else {
      const double t = left / seg;
      pos = WorldPose{pos.x + t * (poly[i].x - pos.x), pos.y + t * (poly[i].y - pos.y), 0.0};
      left = 0.0;
    }
  }
  state_.robot = WorldPose{pos.x, pos.y, heading};
}

void Simulator::trim_plan_to_robot() {
  if (!state_.current_plan) return;
  PlannedPath& plan = *state_.current_plan;
  const GridIndex here = world_to_grid(state_.robot, state_.live_grid);
  auto it = std::find(plan.cells.begin(), plan.cells.end(), here);
  std::size_t j = 0;
  if (it != plan.cells.end()) {
    j = static_cast<std::size_t>(it - plan.cells.begin());
  } else {
    // Exactly on a cell corner; fall back to the nearest plan cell.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < plan.poses.size(); ++k) {
      const double d = planar_distance(plan.poses[k], state_.robot);
      if (d < best) {
        best = d;
        j = k;
      }
    }
  }
  plan.cells.erase(plan.cells.begin(), plan.cells.begin() + static_cast<std::ptrdiff_t>(j));
  plan.poses.erase(plan.poses.begin(), plan.poses.begin() + static_cast<std::ptrdiff_t>(j));
  plan.length = path_length(plan);
  state_.monitor.rebase(plan.length);
}

void Simulator::arrive_if_close() {
  while (!state_.targets.empty() && !state_.complete) {
    const Target& t = state_.targets.front();
    if (planar_distance(state_.robot, t.pose) > scenario_.mission.goal_tolerance) return;
    const int mission_index = t.mission_index;
    if (mission_index >= 0) {
      // Instantaneous alignment to the waypoint heading.
      state_.robot.theta = t.pose.theta;
      if (std::abs(normalize_angle(state_.robot.theta - t.pose.theta)) > scenario_.mission.heading_tolerance) return;
      state_.mission_cursor = mission_index + 1;
    }
    state_.targets.erase(state_.targets.begin());
    emit(SimEventKind::WaypointReached, {}, t.query_id, mission_index);
    state_.monitor.reset();
    if (state_.targets.empty()) {
      state_.complete = true;
      state_.current_plan.reset();
      emit(SimEventKind::MissionComplete);
      return;
    }
    // New goal: its first plan becomes the reference.
    replan();
    state_.monitor.assess(state_.current_plan);
    emit(SimEventKind::PlanUpdated, "next target");
  }
}

void Simulator::step() {
  if (state_.complete) throw Error("mission already complete");
  if (state_.pending_query) throw Error("cannot step while a query is pending");

  ++state_.tick;
  state_.time = static_cast<double>(state_.tick) / scenario_.replan_rate;
  apply_due_events();
  sense();
  replan();

  if (state_.monitor.assess(state_.current_plan) == Decision::Query) {
    state_.pending_query = true;
    QueryRecord q;
    q.id = static_cast<int>(state_.query_log.size()) + 1;
    q.raised_at = state_.time;
    q.tick = state_.tick;
    q.pose = state_.robot;
    q.deviation = state_.monitor.last_deviation();
    state_.query_log.push_back(q);
    record_pose();
    emit(SimEventKind::QueryRaised, {}, q.id);
    return;
  }

  move(scenario_.speed * scenario_.dt());
  trim_plan_to_robot();
  record_pose();
  arrive_if_close();
}

void Simulator::handle_feedback(const std::vector<std::string>& phrases) {
  if (!state_.pending_query || state_.query_log.empty()) throw Error("no query is pending");
  QueryRecord& q = state_.query_log.back();
  FeedbackAttempt attempt{state_.time, phrases, {}};
  try {
    if (phrases.empty()) throw Error("feedback needs at least one phrase");
    MapQueryParams params = scenario_.map_query;
    params.seed = scenario_.seed;

    CandidateLayers layers;
    layers.robot = state_.robot;
    for (std::size_t i = 0; i < phrases.size(); ++i)
      layers.layers.push_back(candidates_for(phrases[i], static_cast<int>(i), scenario_.feature_grid,
                                             state_.live_grid, scenario_.vocabulary, params));

    const WaypointGraph graph = build_graph(layers, state_.live_grid, scenario_.planner, scenario_.effective_prune_eps());
    const SelectedRoute route = select_route(graph);
    if (route.waypoints.size() != phrases.size())
      throw Error("selected route does not have exactly one waypoint per phrase");

    std::vector<Target> queue;
    for (const WorldPose& w : route.waypoints) queue.push_back(Target{w, -1, q.id});
    if (scenario_.splice == SpliceMode::Retain) {
      const auto tail = mission_tail();
      queue.insert(queue.end(), tail.begin(), tail.end());
    }
    state_.targets = std::move(queue);

    q.attempts.push_back(attempt);
    q.resolved = true;
    q.resolved_at = state_.time;
    q.phrases = phrases;
    q.candidates = layers.layers;
    q.route = route.waypoints;
    q.route_length = route.total_length;
  } catch (const Error& e) {
    attempt.error = e.what();
    q.attempts.push_back(attempt);
    state_.errors.push_back(e.what());
    emit(SimEventKind::Error, e.what(), q.id);
    throw;
  }

  state_.pending_query = false;
  state_.monitor.reset();
  replan();
  state_.monitor.assess(state_.current_plan);
  emit(SimEventKind::PlanUpdated, "feedback applied", q.id);
  arrive_if_close();
}

SimState step(SimState state, const Scenario& scenario) {
  Simulator sim(scenario, std::move(state));
  sim.step();
  return sim.state();
}

std::vector<std::string> ScriptedFeedback::next(const QueryRecord& /*query*/) {
  if (cursor_ >= script_.size()) throw FeedbackExhausted("scripted feedback exhausted");
  return script_[cursor_++];
}

MissionReport run(const Scenario& scenario, FeedbackSource& feedback) {
  const auto wall_start = std::chrono::steady_clock::now();
  Simulator sim(scenario);
  const double timeout = effective_timeout(sim.scenario());

  MissionReport report;
  report.scenario = scenario.name;
  while (!sim.finished()) {
    if (sim.pending_query()) {
      std::vector<std::string> phrases;
      try {
        phrases = feedback.next(sim.state().query_log.back());
      } catch (const FeedbackExhausted& e) {
        report.errors.push_back(e.what());
        report.outcome = RunOutcome::Stalled;
        break;
      }
      try {
        sim.handle_feedback(phrases);
      } catch (const Error& e) {
        feedback.report_error(e.what());
      }
      continue;
    }
    if (sim.state().time >= timeout - 1e-9) {
      report.outcome = RunOutcome::Timeout;
      break;
    }
    sim.step();
  }

  const SimState& st = sim.state();
  report.reached = st.complete;
  if (st.complete) report.outcome = RunOutcome::Reached;
  report.tick_count = st.tick;
  report.final_time = st.time;
  report.executed_trajectory = st.executed_trajectory;
  report.queries = st.query_log;
  report.errors.insert(report.errors.begin(), st.errors.begin(), st.errors.end());
  report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

}  // namespace lgnav
