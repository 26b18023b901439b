#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aquanet/botnet.hpp"
#include "aquanet/scenario.hpp"
#include "aquanet/services.hpp"
#include "aquanet/sim.hpp"

namespace aquanet {

struct WorldOptions {
  bool botnet = false;  // false: baseline run, bots stay dormant
  std::optional<std::uint64_t> seed_override;
};

// Assembles one simulation run from a scenario: LANs, devices, cloud and
// weather services, user-update schedule, and (optionally) the botnet. One
// World is one run; build a fresh one per trial.
class World {
 public:
  World(const Scenario& scenario, WorldOptions opts = {})
      : scenario_(&scenario),
        sim_(opts.seed_override.value_or(scenario.seed)),
        cnc_(scenario.cnc_host) {
    build(opts);
  }

  Simulation& sim() { return sim_; }
  Timestamp horizon() const { return scenario_->horizon; }

  // Runs to the scenario horizon, closing all valves at the end so
  // consumption accounting is complete.
  const Trace& run() {
    const Trace& trace = sim_.run_until(scenario_->horizon);
    finalize_controllers();
    return trace;
  }

  const Trace& trace() const { return sim_.trace(); }
  ConsumptionSeries consumption() const { return sim_.meter().series(scenario_->horizon); }

  DeviceRegistry& registry() { return registry_; }
  GreenIqCloud& greeniq_cloud() { return cloud_; }
  CncServer& cnc() { return cnc_; }

  GreenIqDevice* greeniq(const HostId& id) {
    auto it = registry_.greeniq.find(id);
    return it == registry_.greeniq.end() ? nullptr : it->second;
  }
  RainMachineDevice* rainmachine(const HostId& id) {
    auto it = registry_.rainmachine.find(id);
    return it == registry_.rainmachine.end() ? nullptr : it->second;
  }
  BlueSprayDevice* bluespray(const HostId& id) {
    auto it = registry_.bluespray.find(id);
    return it == registry_.bluespray.end() ? nullptr : it->second;
  }
  Bot* bot(const HostId& host) {
    for (auto& b : bots_)
      if (b->host() == host) return b.get();
    return nullptr;
  }
  const std::vector<std::unique_ptr<Bot>>& bots() const { return bots_; }

  // Every host with its expected classification (device kind or background
  // None), in scenario order.
  std::vector<LabeledHost> labeled_hosts() const {
    std::vector<LabeledHost> out;
    for (const auto& lan : scenario_->lans)
      for (const auto& host : lan.hosts)
        out.push_back({host.id, host.device ? std::optional<IrrigationKind>(host.device->kind)
                                            : std::nullopt});
    return out;
  }

 private:
  void build(const WorldOptions& opts) {
    sim_.set_horizon(scenario_->horizon);
    sim_.set_meter_period(scenario_->consumption_period);

    for (const auto& lan : scenario_->lans) {
      sim_.add_lan(lan.id, lan.region, lan.latency);
      for (const auto& host : lan.hosts) sim_.add_host(lan.id, host.id);
    }

    cloud_.install(sim_);
    install_sync_cloud(sim_, kRainMachineHost);
    install_sync_cloud(sim_, kBlueSprayCloudHost);
    install_sync_cloud(sim_, kBlueSprayWwwHost);
    if (!scenario_->weather_profiles.empty()) {
      weather_.emplace(scenario_->weather_profiles);
      weather_->install(sim_);
    }

    for (const auto& lan : scenario_->lans) {
      for (const auto& host : lan.hosts) {
        if (host.background) {
          backgrounds_.push_back(std::make_unique<BackgroundDevice>(sim_, host.id, *host.background));
          backgrounds_.back()->install(sim_);
          continue;
        }
        const DeviceSpec& spec = *host.device;
        switch (spec.kind) {
          case IrrigationKind::GreenIq: {
            GreenIqConfig cfg;
            cfg.id = host.id;
            cfg.zone_flow = spec.zone_flow;
            cfg.ssh_enabled = spec.ssh_enabled;
            cfg.initial_plans = spec.plans;
            cfg.gaps = spec.gaps;
            greeniq_.push_back(std::make_unique<GreenIqDevice>(sim_, std::move(cfg)));
            greeniq_.back()->install(sim_);
            registry_.greeniq[host.id] = greeniq_.back().get();
            break;
          }
          case IrrigationKind::RainMachine: {
            RainMachineConfig cfg;
            cfg.id = host.id;
            cfg.lat = spec.lat;
            cfg.lon = spec.lon;
            cfg.zone_count = spec.zone_count;
            cfg.zone_flow = spec.zone_flow;
            cfg.base_plan = spec.plans.front();
            cfg.need = scenario_->need;
            cfg.gaps = spec.gaps;
            rainmachine_.push_back(std::make_unique<RainMachineDevice>(sim_, std::move(cfg)));
            rainmachine_.back()->install(sim_);
            registry_.rainmachine[host.id] = rainmachine_.back().get();
            break;
          }
          case IrrigationKind::BlueSpray: {
            BlueSprayConfig cfg;
            cfg.id = host.id;
            cfg.zone_count = spec.zone_count;
            cfg.zone_flow = spec.zone_flow;
            cfg.initial_plans = spec.plans;
            cfg.gaps = spec.gaps;
            bluespray_.push_back(std::make_unique<BlueSprayDevice>(sim_, std::move(cfg)));
            bluespray_.back()->install(sim_);
            registry_.bluespray[host.id] = bluespray_.back().get();
            break;
          }
        }
      }
    }

    for (const auto& update : scenario_->user_updates) {
      sim_.schedule(update.time, [this, update](Simulation&) {
        cloud_.set_user_config(update.host, update.time, update.plans);
      });
    }
    for (const auto& reset : scenario_->factory_resets) {
      sim_.schedule(reset.time, [this, reset](Simulation& s) {
        if (auto* dev = greeniq(reset.host)) dev->factory_reset(s);
      });
    }

    if (opts.botnet && !scenario_->infected.empty()) {
      const HostnameTable table = HostnameTable::defaults();
      std::vector<Bot*> raw;
      for (const auto& infected : scenario_->infected) {
        const std::string& lan_id = sim_.lan_of(infected.host);
        const std::string& region = sim_.lan(lan_id).region;
        bots_.push_back(std::make_unique<Bot>(infected.host, lan_id, region, infected.time,
                                              scenario_->recon_period, table,
                                              scenario_->cnc_host));
        bots_.back()->install(sim_, &registry_);
        raw.push_back(bots_.back().get());
      }
      cnc_.install(sim_, std::move(raw), scenario_->commands, scenario_->policy);
    }
  }

  void finalize_controllers() {
    for (auto& [id, dev] : registry_.greeniq) dev->controller().finalize(sim_, scenario_->horizon);
    for (auto& [id, dev] : registry_.rainmachine)
      dev->controller().finalize(sim_, scenario_->horizon);
    for (auto& [id, dev] : registry_.bluespray) dev->controller().finalize(sim_, scenario_->horizon);
  }

  const Scenario* scenario_;
  Simulation sim_;
  GreenIqCloud cloud_;
  std::optional<WeatherService> weather_;
  CncServer cnc_;
  DeviceRegistry registry_;
  std::vector<std::unique_ptr<GreenIqDevice>> greeniq_;
  std::vector<std::unique_ptr<RainMachineDevice>> rainmachine_;
  std::vector<std::unique_ptr<BlueSprayDevice>> bluespray_;
  std::vector<std::unique_ptr<BackgroundDevice>> backgrounds_;
  std::vector<std::unique_ptr<Bot>> bots_;
};

}  // namespace aquanet
