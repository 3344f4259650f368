#include "swsk/server/http_api.hpp"

#include <httplib.h>

#include "swsk/core/errors.hpp"
#include "swsk/core/json_reader.hpp"

namespace swsk::server {

using nlohmann::json;

std::shared_ptr<EventHub::Client> EventHub::subscribe() {
  std::lock_guard g(mu_);
  auto c = std::make_shared<Client>();
  c->closed = closed_;
  clients_.push_back(c);
  return c;
}

void EventHub::unsubscribe(const std::shared_ptr<Client>& c) {
  std::lock_guard g(mu_);
  std::erase(clients_, c);
}

void EventHub::publish(const std::string& frame) {
  {
    std::lock_guard g(mu_);
    for (auto& c : clients_) {
      c->queue.push_back(frame);
      // A stalled client loses its oldest events rather than growing without bound.
      if (c->queue.size() > kMaxQueued) c->queue.pop_front();
    }
  }
  cv_.notify_all();
}

std::optional<std::string> EventHub::next(const std::shared_ptr<Client>& c, std::chrono::milliseconds wait) {
  std::unique_lock g(mu_);
  cv_.wait_for(g, wait, [&] { return !c->queue.empty() || c->closed; });
  if (c->closed) return std::nullopt;
  std::string out;
  while (!c->queue.empty()) {
    out += c->queue.front();
    c->queue.pop_front();
  }
  return out;
}

void EventHub::close() {
  {
    std::lock_guard g(mu_);
    closed_ = true;
    for (auto& c : clients_) c->closed = true;
  }
  cv_.notify_all();
}

std::size_t EventHub::clients() const {
  std::lock_guard g(mu_);
  return clients_.size();
}

bool StreamFilter::pass(const EventRecord& e) {
  switch (e.kind) {
    case EventKind::Alert:
    case EventKind::Assessment:
    case EventKind::StateChange:
    case EventKind::Notification:
      return true;
    case EventKind::Telemetry: {
      const auto worker = e.payload.value("worker_id", "");
      auto it = last_.find(worker);
      if (it != last_.end() && e.ts - it->second < every_) return false;
      last_[worker] = e.ts;
      return true;
    }
    default:
      return false;
  }
}

std::string sse_frame(const EventRecord& e) {
  return "id: " + std::to_string(e.event_seq) + "\nevent: " + std::string(to_string(e.kind)) +
         "\ndata: " + to_json(e).dump() + "\n\n";
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& error,
                const std::string& detail = "") {
  send_json(res, status, {{"error", error}, {"code", code}, {"detail", detail}});
}

json machine_view(const std::string& id, const MachineEntry& m, const Registry& reg) {
  const auto worker = reg.worker_on(id);
  return {{"machine_id", id},
          {"params", risk_params_json(m.params)},
          {"risk_class", telemetry::to_string(m.risk_class)},
          {"mode", machine::to_string(m.status.mode)},
          {"latched", m.status.latched},
          {"last_cause", m.status.last_cause},
          {"updated_at", m.status.updated_at},
          {"assigned_worker", worker ? json(*worker) : json(nullptr)},
          {"registered", true}};
}

json unregistered_view(const machine::PublishedState& s) {
  return {{"machine_id", s.machine_id},
          {"params", nullptr},
          {"risk_class", nullptr},
          {"mode", machine::to_string(s.mode)},
          {"latched", s.latched},
          {"last_cause", s.last_cause},
          {"updated_at", s.updated_at},
          {"assigned_worker", nullptr},
          {"registered", false}};
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

HttpApi::HttpApi(SafetyServer& server, std::mutex& lock)
    : server_(server),
      lock_(lock),
      http_(std::make_unique<httplib::Server>()),
      filter_(static_cast<VirtualMs>(server.config().engine.step_s * 1000.0)) {
  {
    std::lock_guard g(lock_);
    server_.add_listener([this](const EventRecord& e) {
      if (filter_.pass(e)) hub_.publish(sse_frame(e));
    });
  }
  routes();
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
  const int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind HTTP API to " + host + ":" + std::to_string(port));
  return bound;
}

void HttpApi::start() {
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void HttpApi::stop() {
  hub_.close();
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpApi::routes() {
  auto& s = *http_;

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const NotFound& e) {
      send_error(res, 404, "NOT_FOUND", e.what());
    } catch (const SchemaError& e) {
      send_error(res, 400, "BAD_REQUEST", e.what(), e.path());
    } catch (const json::exception& e) {
      send_error(res, 400, "BAD_REQUEST", "invalid JSON body", e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, "BAD_REQUEST", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "INTERNAL", e.what());
    }
  });

  s.Get("/api/v1/workers", [this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    std::lock_guard g(lock_);
    const auto& st = server_.state();
    for (const auto& [id, w] : st.registry.workers()) {
      const auto machine = st.registry.machine_of(id);
      const auto a = st.assessments.find(id);
      const auto* session = server_.session(id);
      out.push_back({{"worker_id", id},
                     {"meta", w.meta},
                     {"session", w.session},
                     {"session_started", w.session_started},
                     {"assigned_machine", machine ? json(*machine) : json(nullptr)},
                     {"assessment", a != st.assessments.end() ? engine::to_json(a->second) : json(nullptr)},
                     {"calibrating", a == st.assessments.end() || a->second.calibrating},
                     {"last_telemetry_ts", w.last_telemetry_ts ? json(*w.last_telemetry_ts) : json(nullptr)},
                     {"active_conditions", session ? json(session->monitor().active_conditions()) : json::array()}});
    }
    send_json(res, 200, out);
  });

  s.Get(R"(/api/v1/workers/([^/]+)/history)", [this](const httplib::Request& req, httplib::Response& res) {
    auto parse_ts = [&](const char* key, VirtualMs fallback) -> VirtualMs {
      if (!req.has_param(key)) return fallback;
      const auto v = req.get_param_value(key);
      std::size_t used = 0;
      long long n = 0;
      try {
        n = std::stoll(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.size() || v.empty()) throw std::invalid_argument(std::string("query parameter '") + key + "' must be an integer (ms)");
      return n;
    };
    const VirtualMs from = parse_ts("from", 0);
    const VirtualMs to = parse_ts("to", std::numeric_limits<VirtualMs>::max());
    if (from > to) throw std::invalid_argument("'from' is after 'to'");
    const std::string id = req.matches[1];
    std::lock_guard g(lock_);
    send_json(res, 200, {{"worker_id", id}, {"from", from}, {"to", to}, {"samples", server_.history(id, from, to)}});
  });

  s.Get("/api/v1/machines", [this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    std::lock_guard g(lock_);
    const auto& reg = server_.state().registry;
    for (const auto& [id, m] : reg.machines()) out.push_back(machine_view(id, m, reg));
    for (const auto& [id, s] : server_.unregistered_machines()) out.push_back(unregistered_view(s));
    send_json(res, 200, out);
  });

  s.Post(R"(/api/v1/machines/([^/]+)/estop)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    JsonReader r(body, "body");
    const auto reason = r.string("reason", "operator remote stop");
    std::lock_guard g(lock_);
    const auto id = server_.issue_estop(req.matches[1], engine::CommandSource::Operator, reason);
    send_json(res, 202, {{"cmd_id", id}});
  });

  s.Post(R"(/api/v1/machines/([^/]+)/reset)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    JsonReader r(body, "body");
    const auto reason = r.string("reason", "operator reset");
    std::lock_guard g(lock_);
    const auto id = server_.issue_reset(req.matches[1], reason);
    send_json(res, 202, {{"cmd_id", id}});
  });

  s.Post("/api/v1/suitability", [this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    JsonReader r(body, "body");
    r.only({"worker_id", "stress_level", "machine_id", "risk_class"});
    SuitabilityQuery q;
    if (r.has("worker_id")) q.worker_id = r.string("worker_id");
    if (r.has("machine_id")) q.machine_id = r.string("machine_id");
    if (r.has("stress_level")) {
      q.stress_level = engine::parse_stress_level(r.string("stress_level"));
      if (!q.stress_level) r.fail("stress_level", "expected L0..L4");
    }
    if (r.has("risk_class")) {
      q.risk_class = telemetry::parse_risk_class(r.string("risk_class"));
      if (!q.risk_class) r.fail("risk_class", "expected a..e");
    }
    std::lock_guard g(lock_);
    send_json(res, 200, engine::to_json(server_.suitability(q)));
  });

  s.Get("/api/v1/stream", [this](const httplib::Request&, httplib::Response& res) {
    auto client = hub_.subscribe();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, client](std::size_t, httplib::DataSink& sink) {
          auto data = hub_.next(client, std::chrono::milliseconds(500));
          if (!data) return false;
          // Comment line keeps idle connections alive and detects closed peers.
          const std::string chunk = data->empty() ? std::string(": keepalive\n\n") : *data;
          return sink.write(chunk.data(), chunk.size());
        },
        [this, client](bool) { hub_.unsubscribe(client); });
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "NOT_FOUND" : "HTTP_" + std::to_string(res.status),
                 httplib::status_message(res.status));
    }
  });
}

}  // namespace swsk::server
