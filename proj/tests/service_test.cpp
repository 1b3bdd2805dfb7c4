#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include <httplib.h>

#include "lgnav/io.hpp"
#include "lgnav/service.hpp"
#include "test_support.hpp"

using namespace lgnav;
using nlohmann::json;
using test_support::bundled;

namespace {

struct Frame {
  std::uint64_t id = 0;
  std::string type;
  json data;
};

// Parses complete "id/event/data" blocks out of `buf`, leaving any partial tail.
std::vector<Frame> take_frames(std::string& buf) {
  std::vector<Frame> out;
  std::size_t end;
  while ((end = buf.find("\n\n")) != std::string::npos) {
    std::istringstream block(buf.substr(0, end));
    buf.erase(0, end + 2);
    Frame f;
    bool any = false;
    for (std::string line; std::getline(block, line);) {
      if (line.rfind("id: ", 0) == 0) f.id = std::stoull(line.substr(4)), any = true;
      else if (line.rfind("event: ", 0) == 0) f.type = line.substr(7);
      else if (line.rfind("data: ", 0) == 0) f.data = json::parse(line.substr(6));
    }
    if (any) out.push_back(std::move(f));
  }
  return out;
}

class Harness {
 public:
  explicit Harness(const std::string& scenario, int tick_ms = 2)
      : service_(bundled(scenario), ServiceOptions{std::chrono::milliseconds(tick_ms)}),
        port_(service_.start("127.0.0.1", 0)),
        client_("127.0.0.1", port_) {
    client_.set_read_timeout(10, 0);
  }

  httplib::Result post(const std::string& path, const json& body) {
    return client_.Post(path.c_str(), body.dump(), "application/json");
  }
  httplib::Result control(const std::string& action) { return post("/control", {{"action", action}}); }
  json state() {
    auto r = client_.Get("/state");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    return json::parse(r->body);
  }

  // Reads the event stream until `stop_at` is seen (inclusive) or 10 s pass.
  std::vector<Frame> events_until(const std::string& stop_at, const httplib::Headers& headers = {},
                                  const std::string& path = "/events") {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    std::vector<Frame> frames;
    std::string buf;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
    c.Get(path.c_str(), headers, [&](const char* data, std::size_t len) {
      buf.append(data, len);
      for (auto& f : take_frames(buf)) {
        const bool last = f.type == stop_at;
        frames.push_back(std::move(f));
        if (last) return false;
      }
      return std::chrono::steady_clock::now() < deadline;
    });
    return frames;
  }

  int port() const { return port_; }
  Service& service() { return service_; }

 private:
  Service service_;
  int port_;
  httplib::Client client_;
};

bool contains(const std::vector<Frame>& fs, const std::string& type) {
  for (const auto& f : fs)
    if (f.type == type) return true;
  return false;
}

void expect_dense(const std::vector<Frame>& fs, std::uint64_t first) {
  for (std::size_t i = 0; i < fs.size(); ++i) EXPECT_EQ(fs[i].id, first + i);
}

}  // namespace

TEST(Service, NoChangeRunCompletesWithoutQuery) {
  Harness h("corridor_clear");
  EXPECT_EQ(h.state()["status"], "idle");
  auto r = h.control("start");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const auto frames = h.events_until("mission_complete");
  ASSERT_FALSE(frames.empty());
  EXPECT_EQ(frames.back().type, "mission_complete");
  EXPECT_FALSE(contains(frames, "query_raised"));
  expect_dense(frames, 1);
  for (const auto& f : frames) {
    EXPECT_EQ(f.data["seq"], f.id);
    EXPECT_EQ(f.data["type"], f.type);
  }
  const json s = h.state();
  EXPECT_EQ(s["status"], "complete");
  EXPECT_TRUE(s["pending_query"].is_null());
}

TEST(Service, QueryThenFeedback) {
  Harness h("corridor_detour_30");
  auto early = h.post("/feedback", {{"phrases", {"the green plant"}}});
  ASSERT_TRUE(early);
  EXPECT_EQ(early->status, 409);

  h.control("start");
  const auto raised = h.events_until("query_raised");
  ASSERT_FALSE(raised.empty());
  const Frame q = raised.back();
  ASSERT_EQ(q.type, "query_raised");
  EXPECT_EQ(q.data["query_id"], 1);
  ASSERT_TRUE(q.data.contains("robot"));

  const json s = h.state();
  EXPECT_EQ(s["status"], "query_pending");
  EXPECT_EQ(s["pending_query"]["id"], 1);
  EXPECT_EQ(s["pending_query"]["pose"], q.data["robot"]);
  EXPECT_EQ(s["robot"], q.data["robot"]);

  auto unknown = h.post("/feedback", {{"phrases", {"the purple elephant"}}});
  ASSERT_TRUE(unknown);
  EXPECT_EQ(unknown->status, 422);
  EXPECT_EQ(json::parse(unknown->body)["phrase"], "the purple elephant");

  auto nomatch = h.post("/feedback", {{"phrases", {"the piano"}}});
  ASSERT_TRUE(nomatch);
  EXPECT_EQ(nomatch->status, 422);
  EXPECT_EQ(json::parse(nomatch->body)["phrase"], "the piano");

  EXPECT_EQ(h.post("/feedback", {{"words", {"x"}}})->status, 400);
  EXPECT_EQ(h.post("/feedback", {{"phrases", json::array()}})->status, 400);
  EXPECT_EQ(h.post("/feedback", {{"phrases", {1, 2}}})->status, 400);
  EXPECT_EQ(h.state()["status"], "query_pending");

  auto ok = h.post("/feedback", {{"phrases", {"the green plant"}}});
  ASSERT_TRUE(ok);
  ASSERT_EQ(ok->status, 200);
  const json body = json::parse(ok->body);
  EXPECT_EQ(body["query_id"], 1);
  EXPECT_EQ(body["route"].size(), 1u);

  // Resume right after the query event; nothing is skipped or repeated.
  const auto rest = h.events_until("mission_complete", {{"Last-Event-ID", std::to_string(q.id)}});
  ASSERT_FALSE(rest.empty());
  expect_dense(rest, q.id + 1);
  ASSERT_GE(rest.size(), 3u);
  EXPECT_EQ(rest[0].type, "error");  // unknown phrase
  EXPECT_EQ(rest[1].type, "error");  // no match
  EXPECT_EQ(rest[2].type, "plan_updated");
  EXPECT_EQ(rest[2].data["query_id"], 1);
  EXPECT_EQ(rest.back().type, "mission_complete");
  EXPECT_EQ(h.state()["errors"].size(), 2u);
}

TEST(Service, SinceParameterResumes) {
  Harness h("corridor_clear");
  h.control("start");
  const auto all = h.events_until("mission_complete");
  ASSERT_GE(all.size(), 2u);
  const auto tail = h.events_until("mission_complete", {}, "/events?since=1");
  ASSERT_EQ(tail.size(), all.size() - 1);
  expect_dense(tail, 2);
  EXPECT_EQ(h.service().events_since(1).size(), all.size() - 1);
  httplib::Client c("127.0.0.1", h.port());
  auto bad = c.Get("/events?since=abc");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
}

TEST(Service, StatePlanMatchesRobotAndTarget) {
  Harness h("small_house");
  const OccupancyGrid& g = bundled("small_house").true_grid;
  for (int i = 0; i < 25; ++i) {
    auto r = h.control("tick");
    ASSERT_TRUE(r);
    const json s = h.state();
    EXPECT_EQ(s["tick"], i + 1);
    if (s["plan"].is_null()) continue;
    const auto& cells = s["plan"]["cells"];
    ASSERT_FALSE(cells.empty());
    const GridIndex robot = world_to_grid(WorldPose(s["robot"][0], s["robot"][1]), g);
    const GridIndex target = world_to_grid(WorldPose(s["target"]["pose"][0], s["target"]["pose"][1]), g);
    EXPECT_EQ(cells.front(), json::array({robot.row, robot.col}));
    EXPECT_EQ(cells.back(), json::array({target.row, target.col}));
    EXPECT_EQ(s["trajectory"].size(), static_cast<std::size_t>(i + 2));
  }
}

TEST(Service, ControlActions) {
  Harness h("corridor_clear", 1000);
  EXPECT_EQ(h.control("tick")->status, 200);
  EXPECT_EQ(h.control("tick")->status, 200);
  EXPECT_EQ(h.state()["tick"], 2);
  auto started = h.control("start");
  EXPECT_EQ(json::parse(started->body)["status"], "running");
  auto paused = h.control("pause");
  EXPECT_EQ(json::parse(paused->body)["status"], "paused");
  auto reset = h.control("reset");
  EXPECT_EQ(json::parse(reset->body)["tick"], 0);
  EXPECT_EQ(h.state()["status"], "idle");
  EXPECT_EQ(h.control("jump")->status, 400);
  EXPECT_EQ(h.post("/control", json::array())->status, 400);
}

TEST(Service, MapLayers) {
  Harness h("small_house");
  httplib::Client c("127.0.0.1", h.port());
  const Scenario s = bundled("small_house");
  auto live = c.Get("/map");
  ASSERT_TRUE(live);
  ASSERT_EQ(live->status, 200);
  std::istringstream in(live->body);
  const OccupancyGrid parsed = read_occupancy_grid(in);
  EXPECT_EQ(parsed.width(), 60);
  EXPECT_EQ(to_text(parsed), live->body);
  EXPECT_EQ(json(h.state()["live_grid_digest"]).get<std::string>().size(), 16u);
  auto truth = c.Get("/map?layer=true");
  EXPECT_EQ(truth->body, to_text(s.true_grid));
  auto prior = c.Get("/map?layer=prior");
  EXPECT_EQ(prior->body, to_text(s.prior_grid));
  EXPECT_EQ(c.Get("/map?layer=nope")->status, 400);
}

TEST(Service, StopEndsOpenStreams) {
  auto h = std::make_unique<Harness>("corridor_clear", 1000);
  const int port = h->port();
  std::thread stopper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    h->service().stop();
  });
  httplib::Client c("127.0.0.1", port);
  c.set_read_timeout(5, 0);
  const auto t0 = std::chrono::steady_clock::now();
  c.Get("/events", [](const char*, std::size_t) { return true; });
  stopper.join();
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(3));
}
