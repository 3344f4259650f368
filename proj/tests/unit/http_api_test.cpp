#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <future>

#include "support/fake_transport.hpp"
#include "swsk/bus/topic.hpp"
#include "swsk/server/http_api.hpp"

namespace swsk::server {
namespace {

using nlohmann::json;

const engine::RiskParams kPress{telemetry::Severity::S2, telemetry::Frequency::F2, telemetry::Avoidance::P2};

struct ApiRig {
  sim::Scheduler sched;
  testsupport::FakeTransport t;
  EventLog log;
  SafetyServer server{ServerConfig{}, t, sched, log};
  std::mutex mu;
  std::unique_ptr<HttpApi> api;
  int port = 0;

  ApiRig() {
    server.start();
    server.register_worker("w1", {{"name", "Ana"}});
    server.register_machine("m1", kPress);
    server.assign("w1", "m1");
    api = std::make_unique<HttpApi>(server, mu);
    port = api->bind("127.0.0.1", 0);
    api->start();
  }
  httplib::Client client() {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(5, 0);
    return c;
  }
};

TEST(HttpApi, ListsWorkersAndMachines) {
  ApiRig r;
  auto c = r.client();
  auto res = c.Get("/api/v1/workers");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  auto w = json::parse(res->body);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0]["worker_id"], "w1");
  EXPECT_EQ(w[0]["assigned_machine"], "m1");
  EXPECT_EQ(w[0]["calibrating"], true);

  res = c.Get("/api/v1/machines");
  ASSERT_TRUE(res);
  auto m = json::parse(res->body);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0]["mode"], "RUNNING");
  EXPECT_EQ(m[0]["assigned_worker"], "w1");
  EXPECT_EQ(m[0]["risk_class"], telemetry::to_string(engine::classify_risk(kPress)));
}

TEST(HttpApi, EstopAcceptedAndPublished) {
  ApiRig r;
  auto c = r.client();
  auto res = c.Post("/api/v1/machines/m1/estop", R"({"reason":"drill"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 202);
  const auto id = json::parse(res->body)["cmd_id"].get<std::string>();
  EXPECT_EQ(id.size(), 32u);
  std::lock_guard g(r.mu);
  ASSERT_TRUE(r.server.in_flight().contains(id));
  EXPECT_EQ(r.t.published.back().topic, bus::topics::command("plant", "m1"));
  EXPECT_EQ(json::parse(r.t.published.back().payload)["source"], "operator");
}

TEST(HttpApi, ErrorEnvelopes) {
  ApiRig r;
  auto c = r.client();
  auto res = c.Post("/api/v1/machines/nope/estop", "{}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  auto e = json::parse(res->body);
  EXPECT_EQ(e["code"], "NOT_FOUND");
  EXPECT_TRUE(e.contains("error"));
  EXPECT_TRUE(e.contains("detail"));

  res = c.Post("/api/v1/machines/m1/estop", "{bad", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  res = c.Get("/api/v1/workers/w1/history?from=abc");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["code"], "BAD_REQUEST");

  res = c.Get("/api/v1/workers/zz/history");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);

  res = c.Post("/api/v1/suitability", R"({"worker_id":"w1","risk_class":"z"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["detail"], "body.risk_class");

  res = c.Get("/api/v1/nothing");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body)["code"], "NOT_FOUND");
}

TEST(HttpApi, SuitabilityAndHistory) {
  ApiRig r;
  auto c = r.client();
  auto res = c.Post("/api/v1/suitability", R"({"stress_level":"L4","machine_id":"m1"})", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  auto v = json::parse(res->body);
  EXPECT_EQ(v["allowed"], false);
  EXPECT_EQ(v["max_allowed"], "NONE");

  res = c.Get("/api/v1/workers/w1/history?from=0&to=100000");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_TRUE(json::parse(res->body)["samples"].empty());
}

TEST(HttpApi, StreamDeliversEvents) {
  ApiRig r;
  std::promise<std::string> got;
  auto fut = got.get_future();
  std::atomic<bool> done{false};
  std::thread reader([&] {
    auto c = r.client();
    std::string buf;
    c.Get("/api/v1/stream", [&](const char* data, std::size_t n) {
      buf.append(data, n);
      if (buf.find("event: NOTIFICATION") != std::string::npos && !done.exchange(true)) {
        got.set_value(buf);
        return false;
      }
      return true;
    });
    if (!done.exchange(true)) got.set_value(buf);
  });
  for (int i = 0; i < 500 && r.api->stream_clients() == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_EQ(r.api->stream_clients(), 1u);
  {
    std::lock_guard g(r.mu);
    r.t.inject(bus::topics::telemetry("plant", "ghost"), "{}");
  }
  ASSERT_EQ(fut.wait_for(std::chrono::seconds(5)), std::future_status::ready);
  const auto text = fut.get();
  EXPECT_NE(text.find("event: NOTIFICATION"), std::string::npos);
  EXPECT_NE(text.find("data: {"), std::string::npos);
  r.api->stop();
  reader.join();
}

TEST(StreamFilter, SamplesTelemetryPerWorker) {
  StreamFilter f(5000);
  auto tel = [](const char* w, VirtualMs ts) { return EventRecord{1, ts, EventKind::Telemetry, {{"worker_id", w}}}; };
  EXPECT_TRUE(f.pass(tel("a", 0)));
  EXPECT_FALSE(f.pass(tel("a", 1000)));
  EXPECT_TRUE(f.pass(tel("b", 1000)));
  EXPECT_TRUE(f.pass(tel("a", 5000)));
  EXPECT_TRUE(f.pass(EventRecord{2, 0, EventKind::Alert, json::object()}));
  EXPECT_FALSE(f.pass(EventRecord{3, 0, EventKind::CommandIssued, json::object()}));
}

}  // namespace
}  // namespace swsk::server
