#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lgnav/sim.hpp"

namespace httplib {
class Server;
}

namespace lgnav {

struct ServiceOptions {
  std::chrono::milliseconds tick_period{200};  // wall time per simulation tick while running
};

enum class ServiceStatus { Idle, Running, Paused, QueryPending, Complete, Timeout };

const char* to_string(ServiceStatus status);

// HTTP front end over one scenario. Every mutation (control, feedback, ticks)
// runs under one lock, so requests are applied strictly between ticks.
//
//   GET  /state     snapshot JSON
//   GET  /map       live grid, P-OCC text (?layer=live|true|prior)
//   GET  /events    text/event-stream; resumes after Last-Event-ID or ?since=
//   POST /control   {"action": "start"|"pause"|"reset"|"tick"}
//   POST /feedback  {"phrases": [...]}; 409 without a pending query, 422 on
//                   phrases that cannot be resolved
class Service {
 public:
  explicit Service(Scenario scenario, ServiceOptions opts = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws Error when binding fails.
  int start(const std::string& host, int port);
  // Blocks until stop() or a fatal server error.
  void wait();
  void stop();

  nlohmann::json state_json() const;
  std::vector<nlohmann::json> events_since(std::uint64_t seq) const;

 private:
  struct Event {
    std::uint64_t seq;
    nlohmann::json body;
  };

  void install_routes();
  void ticker_loop();
  void reset_locked();
  void tick_locked();
  void publish_snapshot_locked();
  void push_event(const std::string& type, nlohmann::json body);
  void on_sim_event(const SimEvent& ev);

  Scenario scenario_;
  ServiceOptions opts_;
  double timeout_s_ = 0.0;

  mutable std::mutex sim_mutex_;  // guards sim_, status_, run_requested_, staged_
  std::unique_ptr<Simulator> sim_;
  ServiceStatus status_ = ServiceStatus::Idle;
  bool run_requested_ = false;
  std::vector<std::pair<std::string, nlohmann::json>> staged_;  // sim events awaiting the next snapshot
  std::shared_ptr<const nlohmann::json> snapshot_;  // swapped under snapshot_mutex_
  mutable std::mutex snapshot_mutex_;

  mutable std::mutex events_mutex_;
  std::condition_variable events_cv_;
  std::vector<Event> events_;
  std::uint64_t next_seq_ = 1;

  std::condition_variable ticker_cv_;
  std::atomic<bool> stopping_{false};
  std::thread ticker_;
  std::thread server_thread_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace lgnav
