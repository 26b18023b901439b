#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aquanet/attacks.hpp"
#include "aquanet/detector.hpp"
#include "aquanet/devices.hpp"
#include "aquanet/sim.hpp"

namespace aquanet {

inline constexpr const char* kDefaultCncHost = "c2.ops.example";
inline constexpr const char* kCncNotifyPath = "/notify";

enum class BotState { Infected, Scanning, Armed, Attacking, Destroyed };

inline const char* bot_state_name(BotState s) {
  switch (s) {
    case BotState::Infected: return "infected";
    case BotState::Scanning: return "scanning";
    case BotState::Armed: return "armed";
    case BotState::Attacking: return "attacking";
    case BotState::Destroyed: return "destroyed";
  }
  return "?";
}

struct BotCommand {
  enum class Op { Start, Stop };
  Op op = Op::Start;
  Timestamp start_time = 0;
  Seconds duration = 0;
  std::optional<std::string> region;

  void validate() const {
    if (op == Op::Start && duration <= 0) throw ConfigError("START command needs duration > 0");
    if (start_time < 0) throw ConfigError("command start_time must be non-negative");
  }
};

// Typed handles to every device instance, for attack engagement and
// experiment bookkeeping.
struct DeviceRegistry {
  std::map<HostId, GreenIqDevice*> greeniq;
  std::map<HostId, RainMachineDevice*> rainmachine;
  std::map<HostId, BlueSprayDevice*> bluespray;

  std::optional<IrrigationKind> kind_of(const HostId& host) const {
    if (greeniq.count(host)) return IrrigationKind::GreenIq;
    if (rainmachine.count(host)) return IrrigationKind::RainMachine;
    if (bluespray.count(host)) return IrrigationKind::BlueSpray;
    return std::nullopt;
  }
};

// Which directive a bot runs against each device kind, window filled in from
// the activating command.
struct AttackPolicy {
  std::map<IrrigationKind, AttackDirective> by_kind;

  static AttackPolicy defaults() {
    AttackPolicy p;
    AttackDirective greeniq;
    greeniq.kind = AttackKind::SpoofConfig;
    AttackDirective rainmachine;
    rainmachine.kind = AttackKind::WeatherValueSpoof;
    rainmachine.band_min_milli_c = 0;
    rainmachine.band_max_milli_c = 50000;
    rainmachine.rain_milli_mm = 0;
    AttackDirective bluespray;
    bluespray.kind = AttackKind::ScheduleReplay;
    p.by_kind[IrrigationKind::GreenIq] = greeniq;
    p.by_kind[IrrigationKind::RainMachine] = rainmachine;
    p.by_kind[IrrigationKind::BlueSpray] = bluespray;
    return p;
  }
};

struct ArmedInfo {
  IrrigationKind kind = IrrigationKind::GreenIq;
  HostId device;
  Timestamp armed_at = 0;
  Seconds elapsed = 0;
};

// Bot lifecycle per the adversarial model: infection (scenario input),
// reconnaissance over the LAN from MITM position, then Armed or
// self-destruction. Hosts on a LAN are scanned concurrently inside one
// observation window, so an empty scan destroys the bot after one period.
class Bot {
 public:
  Bot(HostId host, std::string lan_id, std::string region, Timestamp infect_time,
      Seconds recon_period, HostnameTable table, std::string cnc_host = kDefaultCncHost)
      : host_(std::move(host)),
        lan_(std::move(lan_id)),
        region_(std::move(region)),
        infect_time_(infect_time),
        recon_period_(recon_period),
        table_(std::move(table)),
        cnc_host_(std::move(cnc_host)) {}

  const HostId& host() const { return host_; }
  const std::string& lan_id() const { return lan_; }
  const std::string& region() const { return region_; }
  BotState state() const { return state_; }
  const std::optional<ArmedInfo>& armed() const { return armed_; }
  const std::vector<std::string>& attack_log() const { return attack_log_; }

  void install(Simulation& sim, DeviceRegistry* registry) {
    registry_ = registry;
    sim.schedule(infect_time_, [this](Simulation& s) { begin_recon(s); });
  }

  // Reconnaissance: acquire the LAN's interceptor slot (deferring while some
  // other bot holds it), watch every other host's outgoing traffic, arm on
  // the first cloud-host match. No match within the period means the bot
  // notifies the C&C and destroys itself to cover its tracks.
  void begin_recon(Simulation& sim) {
    if (state_ != BotState::Infected) return;
    Lan& l = sim.lan(lan_);
    std::set<HostId> victims = l.hosts;
    victims.erase(host_);
    if (victims.empty()) {
      notify_and_destroy(sim);
      return;
    }
    if (l.mitm) {
      sim.schedule(sim.now() + 60, [this](Simulation& s) { begin_recon(s); });
      return;
    }
    scan_start_ = sim.now();
    sim.set_mitm(lan_, host_, std::move(victims),
                 [this](Simulation& s, const TrafficEvent& ev) { return recon_observe(s, ev); });
    holds_mitm_ = true;
    state_ = BotState::Scanning;
    recon_end_ = sim.schedule(scan_start_ + recon_period_,
                              [this](Simulation& s) { notify_and_destroy(s); });
  }

  // Delivered by the C&C at cmd.start_time. Returns true when this bot
  // activates (Armed, matching region).
  bool on_command(Simulation& sim, const BotCommand& cmd, const AttackPolicy& policy) {
    if (cmd.region && *cmd.region != region_) return false;
    if (cmd.op == BotCommand::Op::Stop) {
      if (state_ == BotState::Attacking) end_directive(sim);
      return false;
    }
    if (state_ != BotState::Armed) return false;
    auto it = policy.by_kind.find(armed_->kind);
    if (it == policy.by_kind.end()) return false;
    AttackDirective directive = it->second;
    directive.start = cmd.start_time;
    directive.end = cmd.start_time + cmd.duration;
    engage(sim, directive);
    return state_ == BotState::Attacking;
  }

 private:
  InterceptOutcome recon_observe(Simulation& sim, const TrafficEvent& ev) {
    if (state_ == BotState::Scanning && ev.direction == Direction::Request) {
      if (auto kind = table_.match(ev.dst_host)) {
        armed_ = ArmedInfo{*kind, ev.src, ev.time, ev.time - scan_start_};
        recon_end_.cancel();
        release_mitm(sim);
        state_ = BotState::Armed;
      }
    }
    return InterceptOutcome::pass();
  }

  void notify_and_destroy(Simulation& sim) {
    release_mitm(sim);
    TrafficEvent note;
    note.src = host_;
    note.dst_host = cnc_host_;
    note.method = Method::Post;
    note.path = kCncNotifyPath;
    note.payload = Document{{"bot", host_}, {"result", "no-irrigation-system"}};
    note.origin = Origin::Bot;
    note.origin_actor = host_;
    sim.send_request(std::move(note));
    state_ = BotState::Destroyed;
  }

  void engage(Simulation& sim, const AttackDirective& directive) {
    const HostId& target = armed_->device;
    directive_ = directive;
    switch (directive.kind) {
      case AttackKind::SpoofConfig: {
        auto* dev = registry_->greeniq.count(target) ? registry_->greeniq.at(target) : nullptr;
        if (!dev) return fail("spoof_config: target is not a GreenIQ device");
        greeniq_snap_ = dev->snapshot();
        if (!acquire_mitm(sim, target,
                          make_spoof_config_handler(directive.start, directive.end, host_)))
          return;
        break;
      }
      case AttackKind::PermanentDoS: {
        auto* dev = registry_->greeniq.count(target) ? registry_->greeniq.at(target) : nullptr;
        if (!dev) return fail("permanent_dos: target is not a GreenIQ device");
        const Timestamp latch = directive.dos_end.value_or(sim.horizon());
        if (!acquire_mitm(sim, target, make_spoof_config_handler(directive.start, latch, host_)))
          return;
        break;  // deliberately no snapshot: the latch must outlive the window
      }
      case AttackKind::WeatherValueSpoof: {
        auto* dev =
            registry_->rainmachine.count(target) ? registry_->rainmachine.at(target) : nullptr;
        if (!dev) return fail("weather_value_spoof: target is not a RainMachine device");
        rainmachine_snap_ = dev->snapshot();
        if (!acquire_mitm(sim, target,
                          make_weather_value_handler(directive.band_min_milli_c,
                                                     directive.band_max_milli_c,
                                                     directive.rain_milli_mm, host_)))
          return;
        break;
      }
      case AttackKind::WeatherLocationSpoof: {
        auto* dev =
            registry_->rainmachine.count(target) ? registry_->rainmachine.at(target) : nullptr;
        if (!dev) return fail("weather_location_spoof: target is not a RainMachine device");
        rainmachine_snap_ = dev->snapshot();
        if (!acquire_mitm(sim, target,
                          make_weather_location_handler(directive.fake_lat, directive.fake_lon,
                                                        host_)))
          return;
        break;
      }
      case AttackKind::ScheduleReplay: {
        auto* dev = registry_->bluespray.count(target) ? registry_->bluespray.at(target) : nullptr;
        if (!dev) return fail("schedule_replay: target is not a BlueSpray device");
        bluespray_snap_ = dev->snapshot();
        const WateringPlan plan =
            directive.plan ? *directive.plan
                           : continuous_watering_plan(directive.start, directive.end,
                                                      dev->controller().zone_count());
        if (!replay_schedule(sim, host_, target, plan))
          return fail("schedule_replay: no local endpoint on " + target);
        break;
      }
      case AttackKind::ValveToggle: {
        auto* dev = registry_->greeniq.count(target) ? registry_->greeniq.at(target) : nullptr;
        if (!dev) return fail("valve_toggle: target is not a GreenIQ device");
        toggle_ = std::make_unique<ValveToggleEngine>(host_, target, directive.toggle_period,
                                                      directive.end);
        if (!toggle_->start(sim, *dev)) {
          toggle_.reset();
          return fail("valve_toggle: ssh disabled on " + target);
        }
        break;
      }
    }
    state_ = BotState::Attacking;
    directive_end_ = sim.schedule(directive.end, [this](Simulation& s) { end_directive(s); });
  }

  // Directive end (natural or STOP): release MITM position, stop engines,
  // restore the perturbed device state so consumption returns to baseline.
  void end_directive(Simulation& sim) {
    directive_end_.cancel();
    release_mitm(sim);
    if (toggle_) {
      toggle_->stop(sim);
      toggle_.reset();
    }
    if (greeniq_snap_) {
      registry_->greeniq.at(armed_->device)->restore(sim, std::move(*greeniq_snap_));
      greeniq_snap_.reset();
    }
    if (rainmachine_snap_) {
      registry_->rainmachine.at(armed_->device)->restore(sim, std::move(*rainmachine_snap_));
      rainmachine_snap_.reset();
    }
    if (bluespray_snap_) {
      registry_->bluespray.at(armed_->device)->restore(sim, std::move(*bluespray_snap_));
      bluespray_snap_.reset();
    }
    state_ = BotState::Armed;
  }

  bool acquire_mitm(Simulation& sim, const HostId& victim, MitmHandler handler) {
    try {
      sim.set_mitm(lan_, host_, {victim}, std::move(handler));
    } catch (const SimError& e) {
      fail(std::string("mitm unavailable: ") + e.what());
      return false;
    }
    holds_mitm_ = true;
    return true;
  }

  void release_mitm(Simulation& sim) {
    if (holds_mitm_) {
      sim.clear_mitm(lan_);
      holds_mitm_ = false;
    }
  }

  void fail(std::string why) { attack_log_.push_back(std::move(why)); }

  HostId host_;
  std::string lan_;
  std::string region_;
  Timestamp infect_time_;
  Seconds recon_period_;
  HostnameTable table_;
  std::string cnc_host_;
  DeviceRegistry* registry_ = nullptr;

  BotState state_ = BotState::Infected;
  Timestamp scan_start_ = 0;
  std::optional<ArmedInfo> armed_;
  bool holds_mitm_ = false;
  EventHandle recon_end_;
  EventHandle directive_end_;
  AttackDirective directive_;
  std::optional<GreenIqDevice::Snapshot> greeniq_snap_;
  std::optional<RainMachineDevice::Snapshot> rainmachine_snap_;
  std::optional<BlueSprayDevice::Snapshot> bluespray_snap_;
  std::unique_ptr<ValveToggleEngine> toggle_;
  std::vector<std::string> attack_log_;
};

struct CommandRecord {
  BotCommand cmd;
  std::int64_t activated = 0;
  std::vector<HostId> activated_bots;
};

inline Document command_record_to_document(const CommandRecord& r) {
  Document d{{"op", r.cmd.op == BotCommand::Op::Start ? "START" : "STOP"},
             {"start_time_s", r.cmd.start_time},
             {"duration_s", r.cmd.duration},
             {"activated", r.activated},
             {"activated_bots", r.activated_bots}};
  d["region"] = r.cmd.region ? Document(*r.cmd.region) : Document(nullptr);
  return d;
}

// Central C&C: accepts bot notifications and, at each command's start time,
// delivers it to every bot over the (modeled) reliable ordered channel.
class CncServer {
 public:
  explicit CncServer(std::string host = kDefaultCncHost) : host_(std::move(host)) {}

  const std::string& host() const { return host_; }
  const std::vector<CommandRecord>& records() const { return records_; }
  std::int64_t notifications() const { return notifications_; }

  void install(Simulation& sim, std::vector<Bot*> bots, std::vector<BotCommand> commands,
               AttackPolicy policy) {
    bots_ = std::move(bots);
    policy_ = std::move(policy);
    sim.register_service(host_, [this](Simulation&, const TrafficEvent& req)
                                    -> std::optional<Document> {
      if (req.method == Method::TcpConnect) return std::nullopt;
      if (req.path == kCncNotifyPath) ++notifications_;
      return Document{{"ack", true}};
    });
    for (const auto& cmd : commands) {
      cmd.validate();
      sim.schedule(cmd.start_time, [this, cmd](Simulation& s) { broadcast(s, cmd); });
    }
  }

  // Exactly the Armed bots in the command's region (all Armed bots when no
  // region is given) activate; Destroyed bots never do.
  void broadcast(Simulation& sim, const BotCommand& cmd) {
    CommandRecord rec;
    rec.cmd = cmd;
    for (Bot* bot : bots_) {
      if (bot->on_command(sim, cmd, policy_)) {
        ++rec.activated;
        rec.activated_bots.push_back(bot->host());
      }
    }
    records_.push_back(std::move(rec));
  }

 private:
  std::string host_;
  std::vector<Bot*> bots_;
  AttackPolicy policy_;
  std::vector<CommandRecord> records_;
  std::int64_t notifications_ = 0;
};

}  // namespace aquanet
