#pragma once

#include <optional>
#include <string>

namespace swsk::cli {

struct LiveArgs {
  std::optional<std::string> config;
  std::optional<std::string> broker;  // host:port; serve without it hosts the bus
  std::optional<std::string> site;
  std::optional<std::string> scenario;
  std::string id;
  double duration_s = 0;  // 0 runs until interrupted
};

struct ServeArgs : LiveArgs {
  std::string http = "127.0.0.1:8080";
  std::string mqtt = "127.0.0.1:1883";
  std::string data_dir = "data";
};

int run_serve(const ServeArgs& a);
int run_device(const LiveArgs& a);
int run_gateway(const LiveArgs& a);
int run_machine(const LiveArgs& a);

}  // namespace swsk::cli
