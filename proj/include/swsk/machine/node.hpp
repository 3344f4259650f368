#pragma once

#include <functional>
#include <string>
#include <vector>

#include "swsk/bus/transport.hpp"
#include "swsk/machine/controller.hpp"
#include "swsk/sim/scheduler.hpp"

namespace swsk::machine {

struct Transition {
  VirtualMs at = 0;
  MachineMode from = MachineMode::Running;
  MachineMode to = MachineMode::Running;
  std::string cause;
};

// Controller attached to the bus: consumes commands and server heartbeats,
// ticks the watchdog, publishes retained state after every change and ack.
class MachineNode {
 public:
  MachineNode(std::string site, std::string machine_id, bus::Transport& transport, sim::Scheduler& scheduler,
              ControllerConfig config = {});

  /// Subscribes, publishes the initial state and starts the watchdog tick.
  void start();

  const MachineState& state() const { return state_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  std::uint64_t heartbeats_seen() const { return heartbeats_; }

 private:
  void on_command(const bus::Delivery& d);
  void apply(MachineState next, const std::optional<Ack>& ack, bool publish_anyway);
  void schedule_tick();

  std::string site_;
  bus::Transport& transport_;
  sim::Scheduler& scheduler_;
  ControllerConfig config_;
  std::string state_topic_;
  MachineState state_;
  std::vector<Transition> transitions_;
  std::uint64_t heartbeats_ = 0;
};

}  // namespace swsk::machine
