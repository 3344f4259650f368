#include "swsk/machine/node.hpp"

#include "swsk/bus/topic.hpp"

namespace swsk::machine {

MachineNode::MachineNode(std::string site, std::string machine_id, bus::Transport& transport,
                         sim::Scheduler& scheduler, ControllerConfig config)
    : site_(std::move(site)),
      transport_(transport),
      scheduler_(scheduler),
      config_(config),
      state_topic_(bus::topics::state(site_, machine_id)),
      state_(initial_state(machine_id, scheduler.now(), config)) {}

void MachineNode::start() {
  state_ = initial_state(state_.machine_id, scheduler_.now(), config_);
  transport_.publish(state_topic_, state_json(state_).dump(), bus::QoS::AtLeastOnce, true);
  transport_.subscribe(bus::topics::command(site_, state_.machine_id), bus::QoS::AtLeastOnce,
                       [this](const bus::Delivery& d) { on_command(d); });
  transport_.subscribe(bus::topics::heartbeat(site_), bus::QoS::AtMostOnce, [this](const bus::Delivery&) {
    ++heartbeats_;
    state_ = on_heartbeat(state_, scheduler_.now(), config_);
  });
  schedule_tick();
}

void MachineNode::on_command(const bus::Delivery& d) {
  auto r = handle_payload(state_, d.payload, scheduler_.now(), config_);
  apply(std::move(r.state), r.ack, true);
}

void MachineNode::apply(MachineState next, const std::optional<Ack>& ack, bool publish_anyway) {
  const bool changed = next.mode != state_.mode;
  if (changed) transitions_.push_back({scheduler_.now(), state_.mode, next.mode, next.last_cause});
  state_ = std::move(next);
  if (changed || publish_anyway) {
    transport_.publish(state_topic_, state_json(state_, ack).dump(), bus::QoS::AtLeastOnce, true);
  }
}

void MachineNode::schedule_tick() {
  scheduler_.schedule_after(config_.tick_ms, [this] {
    apply(tick(state_, scheduler_.now()), std::nullopt, false);
    schedule_tick();
  });
}

}  // namespace swsk::machine
