#include "live.hpp"

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "common.hpp"
#include "swsk/core/errors.hpp"
#include "swsk/system/live.hpp"

namespace swsk::cli {
namespace {

using namespace std::chrono_literals;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

// Blocks until SIGINT/SIGTERM, the duration runs out, or `done` says so.
template <class Done>
void wait_for_exit(double duration_s, Done done) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto end = std::chrono::steady_clock::now() + std::chrono::milliseconds(static_cast<long>(duration_s * 1000));
  while (!g_interrupted && !done()) {
    if (duration_s > 0 && std::chrono::steady_clock::now() >= end) break;
    std::this_thread::sleep_for(50ms);
  }
}

struct Common {
  system::SystemConfig config;
  std::string site;
  HostPort broker;
};

Common common(const LiveArgs& a) {
  Common c{resolve_config(a.config), "", {}};
  if (a.site) c.config.server.site = *a.site;
  c.site = c.config.server.site;
  c.broker = parse_host_port(a.broker.value_or("127.0.0.1:1883"), 1883);
  return c;
}

net::MqttClientOptions client(const HostPort& hp, std::string id) {
  net::MqttClientOptions o;
  o.host = hp.host;
  o.port = hp.port;
  o.client_id = std::move(id);
  return o;
}

int unreachable(const HostPort& hp, const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n"
            << "hint: start `swsk serve` (it hosts the bus on " << "127.0.0.1:1883 by default) or point --broker at a "
            << "running MQTT broker, then retry (tried " << hp.host << ":" << hp.port << ")\n";
  return kConnectivity;
}

// Input errors map to exit 2, connectivity to exit 3.
template <class F>
int guarded(const HostPort* hp, F f) {
  try {
    return f();
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const net::ConnectError& e) {
    return unreachable(hp ? *hp : HostPort{"127.0.0.1", 1883}, e);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConnectivity;
  }
}

system::SystemScenario load_scenario(const std::string& path) {
  try {
    return system::load_system_scenario(path);
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(path, e.what());
  }
}

const system::WorkerSpec& pick_worker(const system::SystemScenario& sc, const std::string& id) {
  if (id.empty() && sc.workers.size() == 1) return sc.workers.front();
  for (const auto& w : sc.workers) {
    if (w.id == id) return w;
  }
  throw std::invalid_argument(id.empty() ? "scenario has several workers; pass --id"
                                         : "worker '" + id + "' is not in the scenario");
}

}  // namespace

int run_serve(const ServeArgs& a) {
  HostPort remote;
  return guarded(&remote, [&] {
    auto c = common(a);
    system::ServeOptions o;
    o.config = c.config;
    if (a.broker) {
      remote = c.broker;
      o.broker = client(remote, "server");
    }
    const auto http = parse_host_port(a.http, 8080);
    o.http_host = http.host;
    o.http_port = http.port;
    const auto mqtt = parse_host_port(a.mqtt, 1883);
    o.mqtt_host = mqtt.host;
    o.mqtt_port = mqtt.port;
    o.data_dir = a.data_dir;
    if (a.scenario) o.registry = load_scenario(*a.scenario);

    system::LiveServer srv(std::move(o));
    srv.start();
    std::cerr << "serving site '" << c.site << "': http://" << http.host << ":" << srv.http_port() << "/api/v1";
    if (a.broker) {
      std::cerr << ", broker " << remote.host << ":" << remote.port;
    } else {
      std::cerr << ", embedded bus on mqtt://" << mqtt.host << ":" << srv.mqtt_port();
    }
    std::cerr << ", events in " << a.data_dir << "\n";
    wait_for_exit(a.duration_s, [] { return false; });
    srv.stop();
    std::cerr << "stopped\n";
    return kOk;
  });
}

int run_device(const LiveArgs& a) {
  HostPort hp;
  return guarded(&hp, [&] {
    if (!a.scenario) throw std::invalid_argument("device needs --scenario");
    auto c = common(a);
    hp = c.broker;
    const auto sc = load_scenario(*a.scenario);
    const auto& w = pick_worker(sc, a.id);
    system::LiveDevice dev(c.site, w, client(hp, "device:" + w.id));
    dev.start();
    std::cerr << "device " << w.id << " streaming " << sc.duration_s << " s of frames\n";
    wait_for_exit(a.duration_s, [&] { return dev.done(); });
    dev.stop();
    std::cerr << "sent " << dev.sent() << " frames\n";
    return kOk;
  });
}

int run_gateway(const LiveArgs& a) {
  HostPort hp;
  return guarded(&hp, [&] {
    if (a.id.empty()) throw std::invalid_argument("gateway needs --id <worker>");
    auto c = common(a);
    hp = c.broker;
    std::optional<device::ScenarioScript> imu;
    if (a.scenario) imu = pick_worker(load_scenario(*a.scenario), a.id).script;
    auto gc = c.config.gateway;
    gc.worker_id = a.id;
    gc.site_id = c.site;
    system::LiveGateway gw(gc, client(hp, "gateway:" + a.id), imu);
    gw.start();
    std::cerr << "gateway for " << a.id << " relaying to " << hp.host << ":" << hp.port << "\n";
    wait_for_exit(a.duration_s, [] { return false; });
    gw.stop();
    const auto s = gw.stats();
    std::cerr << "frames ok " << s.frames_ok << ", crc failures " << s.frames_crc_fail << ", published "
              << s.msgs_published << "\n";
    return kOk;
  });
}

int run_machine(const LiveArgs& a) {
  HostPort hp;
  return guarded(&hp, [&] {
    if (a.id.empty()) throw std::invalid_argument("machine needs --id");
    auto c = common(a);
    hp = c.broker;
    system::LiveMachine m(c.site, a.id, client(hp, "machine:" + a.id), c.config.controller);
    m.start();
    std::cerr << "machine " << a.id << " up, watchdog " << c.config.controller.watchdog_ms << " ms\n";
    auto last = m.state().mode;
    wait_for_exit(a.duration_s, [&] {
      const auto st = m.state();
      if (st.mode != last) {
        std::cerr << "mode " << machine::to_string(st.mode) << (st.last_cause.empty() ? "" : " (" + st.last_cause + ")") << "\n";
        last = st.mode;
      }
      return false;
    });
    m.stop();
    return kOk;
  });
}

}  // namespace swsk::cli
