#include "lgnav/service.hpp"

#include <cstdio>
#include <sstream>

#include <httplib.h>

#include "lgnav/errors.hpp"
#include "lgnav/io.hpp"

namespace lgnav {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json cell_json(const GridIndex& c) { return json::array({c.row, c.col}); }

json plan_json(const std::optional<PlannedPath>& plan) {
  if (!plan) return nullptr;
  json cells = json::array();
  json poses = json::array();
  for (const auto& c : plan->cells) cells.push_back(cell_json(c));
  for (const auto& p : plan->poses) poses.push_back(to_json(p));
  return {{"cells", cells}, {"poses", poses}, {"length", plan->length}};
}

json target_json(const Target& t) {
  return {{"pose", to_json(t.pose)}, {"mission_index", t.mission_index}, {"query_id", t.query_id}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, const json& extra = json::object()) {
  json body = extra;
  body["error"] = message;
  send_json(res, status, body);
}

}  // namespace

const char* to_string(ServiceStatus status) {
  switch (status) {
    case ServiceStatus::Idle: return "idle";
    case ServiceStatus::Running: return "running";
    case ServiceStatus::Paused: return "paused";
    case ServiceStatus::QueryPending: return "query_pending";
    case ServiceStatus::Complete: return "complete";
    case ServiceStatus::Timeout: return "timeout";
  }
  return "unknown";
}

Service::Service(Scenario scenario, ServiceOptions opts)
    : scenario_(std::move(scenario)), opts_(opts), timeout_s_(effective_timeout(scenario_)) {
  std::lock_guard lock(sim_mutex_);
  reset_locked();
}

Service::~Service() { stop(); }

void Service::reset_locked() {
  sim_ = std::make_unique<Simulator>(scenario_, [this](const SimEvent& ev) { on_sim_event(ev); });
  run_requested_ = false;
  status_ = sim_->finished() ? ServiceStatus::Complete
            : sim_->pending_query() ? ServiceStatus::QueryPending
                                    : ServiceStatus::Idle;
  publish_snapshot_locked();
}

void Service::tick_locked() {
  if (sim_->finished() || sim_->pending_query() || status_ == ServiceStatus::Timeout) return;
  if (sim_->state().time >= timeout_s_) {
    status_ = ServiceStatus::Timeout;
    run_requested_ = false;
    const auto& st = sim_->state();
    staged_.push_back({"error", {{"time", st.time}, {"tick", st.tick}, {"robot", to_json(st.robot)}, {"message", "timeout"}}});
    publish_snapshot_locked();
    return;
  }
  sim_->step();
  if (sim_->finished())
    status_ = ServiceStatus::Complete;
  else if (sim_->pending_query())
    status_ = ServiceStatus::QueryPending;
  publish_snapshot_locked();
}

void Service::publish_snapshot_locked() {
  const SimState& st = sim_->state();
  json s;
  s["scenario"] = scenario_.name;
  s["tick"] = st.tick;
  s["time"] = st.time;
  s["status"] = to_string(status_);
  s["robot"] = to_json(st.robot);
  s["live_grid_digest"] = hex64(digest(st.live_grid));
  s["plan"] = plan_json(st.current_plan);
  json targets = json::array();
  for (const auto& t : st.targets) targets.push_back(target_json(t));
  s["targets"] = targets;
  s["target"] = st.targets.empty() ? json(nullptr) : target_json(st.targets.front());
  s["mission_cursor"] = st.mission_cursor;
  s["mission_size"] = scenario_.mission.waypoints.size();
  s["pending_query"] = nullptr;
  s["last_query"] = nullptr;
  if (!st.query_log.empty()) {
    const QueryRecord& q = st.query_log.back();
    s["last_query"] = to_json(q);
    if (st.pending_query) s["pending_query"] = {{"id", q.id}, {"raised_at", q.raised_at}, {"pose", to_json(q.pose)}};
  }
  json traj = json::array();
  for (const auto& tp : st.executed_trajectory)
    traj.push_back({tp.time, tp.pose.x, tp.pose.y, tp.pose.theta});
  s["trajectory"] = traj;
  s["errors"] = st.errors;
  {
    std::lock_guard lock(events_mutex_);
    s["last_event"] = next_seq_ - 1 + staged_.size();
  }
  auto snap = std::make_shared<const json>(std::move(s));
  {
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(snap);
  }
  // Events go out only after the snapshot that reflects them.
  for (auto& [type, body] : staged_) push_event(type, std::move(body));
  staged_.clear();
}

void Service::push_event(const std::string& type, json body) {
  {
    std::lock_guard lock(events_mutex_);
    body["seq"] = next_seq_;
    body["type"] = type;
    events_.push_back({next_seq_, std::move(body)});
    ++next_seq_;
  }
  events_cv_.notify_all();
}

void Service::on_sim_event(const SimEvent& ev) {
  json body = {{"time", ev.time}, {"tick", ev.tick}, {"robot", to_json(ev.robot)}};
  if (ev.query_id >= 0) body["query_id"] = ev.query_id;
  if (ev.mission_index >= 0) body["mission_index"] = ev.mission_index;
  if (!ev.message.empty()) body["message"] = ev.message;
  staged_.push_back({to_string(ev.kind), std::move(body)});
}

json Service::state_json() const {
  std::lock_guard lock(snapshot_mutex_);
  return *snapshot_;
}

std::vector<json> Service::events_since(std::uint64_t seq) const {
  std::lock_guard lock(events_mutex_);
  std::vector<json> out;
  // Sequence numbers start at 1 and are dense, so index = seq - 1.
  for (std::size_t i = seq; i < events_.size(); ++i) out.push_back(events_[i].body);
  return out;
}

void Service::ticker_loop() {
  std::unique_lock lock(sim_mutex_);
  while (!stopping_) {
    ticker_cv_.wait_for(lock, opts_.tick_period);
    if (stopping_) break;
    if (run_requested_) tick_locked();
  }
}

void Service::install_routes() {
  auto& srv = *server_;

  srv.Get("/state", [this](const httplib::Request&, httplib::Response& res) { send_json(res, 200, state_json()); });

  srv.Get("/map", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string layer = req.has_param("layer") ? req.get_param_value("layer") : "live";
    std::lock_guard lock(sim_mutex_);
    const SimState& st = sim_->state();
    if (layer == "live")
      res.set_content(to_text(st.live_grid), "text/plain");
    else if (layer == "true")
      res.set_content(to_text(st.true_grid), "text/plain");
    else if (layer == "prior")
      res.set_content(to_text(scenario_.prior_grid), "text/plain");
    else
      send_error(res, 400, "unknown layer '" + layer + "'");
  });

  srv.Post("/control", [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("action") || !body["action"].is_string())
      return send_error(res, 400, "expected {\"action\": start|pause|reset|tick}");
    const std::string action = body["action"];
    std::lock_guard lock(sim_mutex_);
    if (action == "start") {
      run_requested_ = true;
      if (status_ == ServiceStatus::Idle || status_ == ServiceStatus::Paused) status_ = ServiceStatus::Running;
    } else if (action == "pause") {
      run_requested_ = false;
      if (status_ == ServiceStatus::Running) status_ = ServiceStatus::Paused;
    } else if (action == "reset") {
      reset_locked();
    } else if (action == "tick") {
      tick_locked();
    } else {
      return send_error(res, 400, "unknown action '" + action + "'");
    }
    publish_snapshot_locked();
    ticker_cv_.notify_all();
    send_json(res, 200, {{"status", to_string(status_)}, {"tick", sim_->state().tick}});
  });

  srv.Post("/feedback", [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("phrases") || !body["phrases"].is_array())
      return send_error(res, 400, "expected {\"phrases\": [...]}");
    std::vector<std::string> phrases;
    for (const auto& p : body["phrases"]) {
      if (!p.is_string()) return send_error(res, 400, "phrases must be strings");
      phrases.push_back(p.get<std::string>());
    }
    if (phrases.empty()) return send_error(res, 400, "at least one phrase is required");

    std::lock_guard lock(sim_mutex_);
    if (!sim_->pending_query()) return send_error(res, 409, "no query is pending");
    try {
      sim_->handle_feedback(phrases);
    } catch (const UnknownPhrase& e) {
      publish_snapshot_locked();
      return send_error(res, 422, e.what(), {{"phrase", e.phrase()}});
    } catch (const NoMatch& e) {
      publish_snapshot_locked();
      return send_error(res, 422, e.what(), {{"phrase", e.phrase()}});
    } catch (const Error& e) {
      publish_snapshot_locked();
      return send_error(res, 422, e.what());
    }
    status_ = sim_->finished() ? ServiceStatus::Complete
              : run_requested_ ? ServiceStatus::Running
                               : ServiceStatus::Paused;
    publish_snapshot_locked();
    const QueryRecord& q = sim_->state().query_log.back();
    json route = json::array();
    for (const auto& p : q.route) route.push_back(to_json(p));
    send_json(res, 200, {{"query_id", q.id}, {"route", route}, {"route_length", q.route_length}});
  });

  srv.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t cursor = 0;
    try {
      if (req.has_header("Last-Event-ID"))
        cursor = std::stoull(req.get_header_value("Last-Event-ID"));
      else if (req.has_param("since"))
        cursor = std::stoull(req.get_param_value("since"));
    } catch (const std::exception&) {
      return send_error(res, 400, "bad event cursor");
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) mutable {
          std::string out;
          {
            std::unique_lock lock(events_mutex_);
            events_cv_.wait_for(lock, std::chrono::milliseconds(250),
                                [&] { return stopping_ || events_.size() > cursor; });
            if (stopping_) {
              sink.done();
              return true;
            }
            for (; cursor < events_.size(); ++cursor) {
              const Event& ev = events_[cursor];
              out += "id: " + std::to_string(ev.seq) + "\n";
              out += "event: " + ev.body["type"].get<std::string>() + "\n";
              out += "data: " + ev.body.dump() + "\n\n";
            }
          }
          // A comment line keeps idle connections probed so closed clients are noticed.
          if (out.empty()) out = ": keep-alive\n\n";
          return sink.is_writable() && sink.write(out.data(), out.size());
        });
  });
}

int Service::start(const std::string& host, int port) {
  if (server_) throw Error("service already started");
  server_ = std::make_unique<httplib::Server>();
  install_routes();
  int bound = port;
  if (port == 0)
    bound = server_->bind_to_any_port(host);
  else if (!server_->bind_to_port(host, port))
    bound = -1;
  if (bound < 0) {
    server_.reset();
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  {
    std::lock_guard lock(sim_mutex_);
    stopping_ = false;
  }
  ticker_ = std::thread([this] { ticker_loop(); });
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::wait() {
  if (server_thread_.joinable()) server_thread_.join();
}

void Service::stop() {
  {
    std::lock_guard lock(sim_mutex_);
    stopping_ = true;
  }
  {
    // Wake streaming handlers; the flag is read under events_mutex_ there.
    std::lock_guard lock(events_mutex_);
  }
  events_cv_.notify_all();
  ticker_cv_.notify_all();
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
  if (ticker_.joinable()) ticker_.join();
}

}  // namespace lgnav
