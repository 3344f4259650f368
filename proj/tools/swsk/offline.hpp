#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "swsk/server/state.hpp"

namespace swsk::cli {

struct SimulateArgs {
  std::string scenario;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
};
int run_simulate(const SimulateArgs& a);

struct EvaluateArgs {
  std::string csv;
  std::optional<std::string> out;
  std::optional<std::string> config;
};
int run_evaluate(const EvaluateArgs& a);

struct ReplayArgs {
  std::string path;
  bool use_snapshot = false;
};
int run_replay(const ReplayArgs& a);

/// The finals a replay reports; also what simulate's report is checked against.
nlohmann::json state_summary(const server::ServerState& st);

}  // namespace swsk::cli
