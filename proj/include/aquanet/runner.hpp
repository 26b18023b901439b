#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aquanet/damage.hpp"
#include "aquanet/detector.hpp"
#include "aquanet/world.hpp"

namespace aquanet {

struct PhaseSet {
  bool simulate = false;
  bool detect = false;
  bool attack = false;
  bool assess = false;

  static PhaseSet all() { return {true, true, true, true}; }

  static PhaseSet parse(const std::string& csv) {
    PhaseSet p;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "simulate")
        p.simulate = true;
      else if (item == "detect")
        p.detect = true;
      else if (item == "attack")
        p.attack = true;
      else if (item == "assess")
        p.assess = true;
      else if (!item.empty())
        throw ConfigError("unknown phase: " + item);
    }
    if ((p.detect || p.attack) && !p.simulate)
      throw ConfigError("detect and attack phases require simulate");
    if (!p.simulate && !p.assess) throw ConfigError("no phases selected");
    return p;
  }
};

namespace runner_detail {

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimError("cannot write " + path.string());
  out << contents;
}

inline std::string format_m3(FlowSeconds fs) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", flow_seconds_to_m3(fs));
  return buf;
}

inline std::string trace_to_text(const Trace& trace) {
  std::string out;
  for (const auto& ev : trace) {
    out += trace_line(ev);
    out += '\n';
  }
  return out;
}

inline std::string consumption_csv(const ConsumptionSeries& series) {
  std::string out = "period_start_s,m3\n";
  for (const auto& p : series) {
    out += std::to_string(p.start);
    out += ',';
    out += format_m3(p.flow_seconds);
    out += '\n';
  }
  return out;
}

}  // namespace runner_detail

struct RunSummary {
  Document doc;
  std::vector<std::string> lines;  // human-readable phase results
};

// Orchestrates the requested phases and writes the artifact bundle. The
// bundle is a pure function of (scenario bytes, phase set, seed override):
// no timestamps, no machine state, all floats printed deterministically.
//
// Bundle layout (per phase):
//   simulate: trace.tsv, consumption_baseline.csv
//   detect:   accuracy.csv, verdicts.jsonl, features.jsonl
//   attack:   trace_attack.tsv, consumption_attack.csv, consumption_diff.csv,
//             anomalies.csv, commands.jsonl, bots.jsonl
//   assess:   damage.json
//   always:   summary.json
inline RunSummary run_scenario(const Scenario& scenario, PhaseSet phases,
                               const std::filesystem::path& outdir,
                               std::optional<std::uint64_t> seed_override = {}) {
  using namespace runner_detail;
  std::filesystem::create_directories(outdir);

  RunSummary summary;
  summary.doc["scenario_digest"] = scenario.source_digest;
  summary.doc["seed"] = seed_override.value_or(scenario.seed);
  Document phase_list = Document::array();
  if (phases.simulate) phase_list.push_back("simulate");
  if (phases.detect) phase_list.push_back("detect");
  if (phases.attack) phase_list.push_back("attack");
  if (phases.assess) phase_list.push_back("assess");
  summary.doc["phases"] = phase_list;

  std::optional<ConsumptionSeries> baseline_series;

  if (phases.simulate) {
    World baseline(scenario, {false, seed_override});
    const Trace& trace = baseline.run();
    write_file(outdir / "trace.tsv", trace_to_text(trace));
    baseline_series = baseline.consumption();
    write_file(outdir / "consumption_baseline.csv", consumption_csv(*baseline_series));
    summary.doc["simulate"] = {{"events", trace.size()},
                               {"baseline_m3", flow_seconds_to_m3(
                                                   baseline.sim().meter().total_flow_seconds())}};
    summary.lines.push_back("simulate: " + std::to_string(trace.size()) + " events");

    if (phases.detect) {
      const HostnameTable table = HostnameTable::defaults();
      const auto hosts = baseline.labeled_hosts();
      std::vector<Seconds> periods = scenario.detection_periods;
      if (periods.empty()) periods = {60, 120, 180, 300, 420, 600, 780, 900};
      const std::uint64_t seed = seed_override.value_or(scenario.seed);
      AccuracyReport report = evaluate_accuracy(
          table, hosts, scenario.horizon, periods, scenario.detection_trials, seed,
          [&](std::uint64_t trial_seed) {
            World trial(scenario, {false, trial_seed});
            return trial.run();
          });

      std::string csv = "period_s,accuracy,false_positives\n";
      std::int64_t fp_total = 0;
      for (const auto& pt : report.points) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%lld,%.6f,%lld\n",
                      static_cast<long long>(pt.period), pt.accuracy,
                      static_cast<long long>(pt.false_positives));
        csv += buf;
        fp_total += pt.false_positives;
      }
      write_file(outdir / "accuracy.csv", csv);

      // verdicts and feature rows over the baseline trace, phase 0
      Seconds max_period = 0;
      for (Seconds p : periods) max_period = std::max(max_period, p);
      std::string verdicts_out, features_out;
      for (const auto& labeled : hosts) {
        const Verdict v = is_smart_irrigation_system(trace, scenario.horizon, labeled.host, 0,
                                                     max_period, table);
        verdicts_out += verdict_to_document(labeled.host, v).dump();
        verdicts_out += '\n';
        const FeatureRow row =
            extract_features(trace, labeled.host, 0, scenario.horizon, table);
        features_out += feature_to_document(row).dump();
        features_out += '\n';
      }
      write_file(outdir / "verdicts.jsonl", verdicts_out);
      write_file(outdir / "features.jsonl", features_out);
      summary.doc["detect"] = {{"trials", report.trials},
                               {"hosts", report.hosts_per_trial},
                               {"false_positives", fp_total}};
      summary.lines.push_back("detect: " + std::to_string(report.trials) + " trials, " +
                              std::to_string(fp_total) + " false positives");
    }

    if (phases.attack) {
      World attacked(scenario, {true, seed_override});
      const Trace& trace = attacked.run();
      write_file(outdir / "trace_attack.tsv", trace_to_text(trace));
      const ConsumptionSeries attack_series = attacked.consumption();
      write_file(outdir / "consumption_attack.csv", consumption_csv(attack_series));

      std::string diff = "period_start_s,baseline_m3,attack_m3,diff_m3\n";
      for (std::size_t i = 0; i < attack_series.size(); ++i) {
        diff += std::to_string(attack_series[i].start);
        diff += ',';
        diff += format_m3((*baseline_series)[i].flow_seconds);
        diff += ',';
        diff += format_m3(attack_series[i].flow_seconds);
        diff += ',';
        diff += format_m3(attack_series[i].flow_seconds - (*baseline_series)[i].flow_seconds);
        diff += '\n';
      }
      write_file(outdir / "consumption_diff.csv", diff);

      const auto flagged =
          monitor_consumption(attack_series, *baseline_series, scenario.anomaly_threshold);
      std::string anomalies = "period_start_s,baseline_m3,observed_m3\n";
      for (Timestamp t : flagged) {
        const std::size_t idx = static_cast<std::size_t>(t / scenario.consumption_period);
        anomalies += std::to_string(t);
        anomalies += ',';
        anomalies += format_m3((*baseline_series)[idx].flow_seconds);
        anomalies += ',';
        anomalies += format_m3(attack_series[idx].flow_seconds);
        anomalies += '\n';
      }
      write_file(outdir / "anomalies.csv", anomalies);

      std::string commands_out;
      for (const auto& rec : attacked.cnc().records()) {
        commands_out += command_record_to_document(rec).dump();
        commands_out += '\n';
      }
      write_file(outdir / "commands.jsonl", commands_out);

      std::string bots_out;
      for (const auto& bot : attacked.bots()) {
        Document d{{"host", bot->host()},
                   {"lan", bot->lan_id()},
                   {"region", bot->region()},
                   {"state", bot_state_name(bot->state())},
                   {"failures", bot->attack_log()}};
        if (bot->armed()) {
          d["armed_kind"] = kind_name(bot->armed()->kind);
          d["armed_device"] = bot->armed()->device;
          d["recon_elapsed_s"] = bot->armed()->elapsed;
        }
        bots_out += d.dump();
        bots_out += '\n';
      }
      write_file(outdir / "bots.jsonl", bots_out);

      const FlowSeconds delta = attacked.sim().meter().total_flow_seconds() -
                                [&] {
                                  FlowSeconds sum = 0;
                                  for (const auto& p : *baseline_series) sum += p.flow_seconds;
                                  return sum;
                                }();
      summary.doc["attack"] = {{"added_m3", flow_seconds_to_m3(delta)},
                               {"anomalous_periods", flagged.size()}};
      summary.lines.push_back("attack: +" + format_m3(delta) + " m3 over baseline, " +
                              std::to_string(flagged.size()) + " anomalous periods");
    }
  }

  if (phases.assess) {
    if (!scenario.topology) throw ConfigError("assess phase requires a topology section");
    const FlowNetwork net = build_flow_network(*scenario.topology, scenario.w_milli);
    const MilliCubicMetersPerHour dinic = max_flow(net, MaxFlowAlgorithm::Dinic);
    const MilliCubicMetersPerHour ek = max_flow(net, MaxFlowAlgorithm::EdmondsKarp);
    if (dinic != ek) throw SimError("max-flow solvers disagree");

    double hours = 1.0;
    if (scenario.assess_hours) {
      hours = *scenario.assess_hours;
    } else {
      for (const auto& cmd : scenario.commands)
        if (cmd.op == BotCommand::Op::Start) {
          hours = static_cast<double>(cmd.duration) / 3600.0;
          break;
        }
    }
    DamageReport report;
    report.max_flow_m3_per_h = milli_to_double(dinic);
    report.duration_h = hours;
    report.tariff_per_m3 = scenario.tariff_per_m3;
    report.wasted_water_m3 = report.max_flow_m3_per_h * hours;
    report.financial = financial_damage(report.max_flow_m3_per_h, scenario.tariff_per_m3, hours);
    Document doc = report.to_document();
    if (!net.warnings.empty()) doc["warnings"] = net.warnings;
    write_file(outdir / "damage.json", doc.dump(2) + "\n");
    summary.doc["assess"] = doc;
    char line[160];
    std::snprintf(line, sizeof line,
                  "assess: max flow %.3f m3/h, wasted %.3f m3, financial %.2f over %.2f h",
                  report.max_flow_m3_per_h, report.wasted_water_m3, report.financial, hours);
    summary.lines.push_back(line);
  }

  write_file(outdir / "summary.json", summary.doc.dump(2) + "\n");
  return summary;
}

}  // namespace aquanet
