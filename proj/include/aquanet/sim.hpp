#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aquanet/metering.hpp"
#include "aquanet/rng.hpp"
#include "aquanet/traffic.hpp"
#include "aquanet/types.hpp"

namespace aquanet {

class Simulation;

using Callback = std::function<void(Simulation&)>;

// What an interceptor does with one event:
//   pass       - event continues to its destination untouched
//   modified   - the destination receives `injected` instead
//   fabricated - the destination never sees the event; `injected` is a
//                response delivered back to the victim
enum class InterceptAction { Pass, Modified, Fabricated };

struct InterceptOutcome {
  InterceptAction action = InterceptAction::Pass;
  std::optional<TrafficEvent> original;
  std::optional<TrafficEvent> injected;

  static InterceptOutcome pass() { return {}; }
  static InterceptOutcome modify(const TrafficEvent& original, TrafficEvent injected) {
    return {InterceptAction::Modified, original, std::move(injected)};
  }
  static InterceptOutcome fabricate(const TrafficEvent& original, TrafficEvent injected) {
    return {InterceptAction::Fabricated, original, std::move(injected)};
  }
};

using MitmHandler = std::function<InterceptOutcome(Simulation&, const TrafficEvent&)>;

struct Mitm {
  HostId interceptor;
  std::set<HostId> victims;
  MitmHandler handler;
};

struct Lan {
  std::string id;
  std::string region;
  std::set<HostId> hosts;
  Seconds latency = 0;  // request-to-response delay; 0 models same-step replies
  std::optional<Mitm> mitm;
};

class EventHandle {
 public:
  EventHandle() = default;
  explicit EventHandle(std::shared_ptr<bool> cancelled) : cancelled_(std::move(cancelled)) {}

  void cancel() {
    if (cancelled_) *cancelled_ = true;
  }
  bool active() const { return cancelled_ && !*cancelled_; }

 private:
  std::shared_ptr<bool> cancelled_;
};

// Single-threaded discrete-event core: a virtual clock that advances only by
// popping the event queue, simulated LANs, and an interception hook that
// models ARP-spoof MITM positioning as deterministic redirection.
//
// Trace semantics: every exchange leg is recorded once, as seen on the source
// host's LAN segment. Requests are recorded as emitted (before interception),
// responses as delivered (after interception, so a modified response shows
// its modified payload). A pass-through interceptor therefore leaves the
// trace byte-identical to an uninstrumented run.
class Simulation {
 public:
  explicit Simulation(std::uint64_t seed) : seed_(seed) {}

  Timestamp now() const { return now_; }
  std::uint64_t seed() const { return seed_; }

  void set_horizon(Timestamp h) { horizon_ = h; }
  Timestamp horizon() const { return horizon_; }

  RandomStream stream(std::string_view label) const { return RandomStream(seed_, label); }

  ConsumptionMeter& meter() { return meter_; }
  const ConsumptionMeter& meter() const { return meter_; }
  void set_meter_period(Seconds period) { meter_ = ConsumptionMeter(period); }

  // --- topology -------------------------------------------------------

  Lan& add_lan(const std::string& id, const std::string& region, Seconds latency = 0) {
    auto [it, inserted] = lans_.try_emplace(id, Lan{id, region, {}, latency, std::nullopt});
    if (!inserted) throw ConfigError("duplicate lan: " + id);
    return it->second;
  }

  void add_host(const std::string& lan_id, const HostId& host) {
    Lan& l = lan(lan_id);
    if (!host_lan_.emplace(host, lan_id).second) throw ConfigError("duplicate host: " + host);
    l.hosts.insert(host);
  }

  Lan& lan(const std::string& id) {
    auto it = lans_.find(id);
    if (it == lans_.end()) throw ConfigError("unknown lan: " + id);
    return it->second;
  }

  const std::map<std::string, Lan>& lans() const { return lans_; }

  const std::string& lan_of(const HostId& host) const {
    auto it = host_lan_.find(host);
    if (it == host_lan_.end()) throw SimError("unknown host: " + host);
    return it->second;
  }

  bool has_host(const HostId& host) const { return host_lan_.count(host) != 0; }

  // --- endpoints ------------------------------------------------------

  using ServiceFn = std::function<std::optional<Document>(Simulation&, const TrafficEvent&)>;
  using HandlerFn = std::function<Document(Simulation&, const TrafficEvent&)>;
  using InboxFn = std::function<void(Simulation&, const TrafficEvent&)>;

  // Internet-side service reachable by hostname (cloud servers, weather).
  void register_service(const std::string& hostname, ServiceFn fn) {
    services_[hostname] = std::move(fn);
  }
  bool has_service(const std::string& hostname) const { return services_.count(hostname) != 0; }

  // LAN-local HTTP endpoint exposed by a device (BlueSpray C&C interface).
  void register_local_http(const HostId& host, HandlerFn fn) {
    local_http_[host] = std::move(fn);
  }
  bool has_local_http(const HostId& host) const { return local_http_.count(host) != 0; }

  // SSH exec endpoint (GreenIQ valve control path).
  void register_ssh(const HostId& host, HandlerFn fn) { ssh_[host] = std::move(fn); }

  // Where responses addressed to a host are delivered.
  void register_inbox(const HostId& host, InboxFn fn) { inboxes_[host] = std::move(fn); }

  // Unregistered internet hostnames answer a generic 200 so background
  // profiles get plausible response traffic.
  void set_default_responder(bool on) { default_responder_ = on; }

  // --- MITM positioning -----------------------------------------------

  void set_mitm(const std::string& lan_id, const HostId& interceptor,
                std::set<HostId> victims, MitmHandler handler) {
    Lan& l = lan(lan_id);
    if (l.mitm) throw SimError("lan " + lan_id + " already has an interceptor");
    if (!l.hosts.count(interceptor)) throw SimError("unknown host: " + interceptor);
    for (const auto& v : victims) {
      if (!l.hosts.count(v)) throw SimError("unknown host: " + v);
      if (v == interceptor) throw SimError("interceptor cannot victimize itself");
    }
    l.mitm = Mitm{interceptor, std::move(victims), std::move(handler)};
  }

  bool has_mitm(const std::string& lan_id) { return lan(lan_id).mitm.has_value(); }

  void clear_mitm(const std::string& lan_id) { lan(lan_id).mitm.reset(); }

  // --- event queue ----------------------------------------------------

  EventHandle schedule(Timestamp at, Callback cb) {
    if (at < now_) throw SimError("schedule: time " + std::to_string(at) + " is in the past");
    auto cancelled = std::make_shared<bool>(false);
    auto entry = std::make_shared<Entry>(Entry{std::move(cb), cancelled});
    queue_.push(QueueItem{at, next_seq_++, std::move(entry)});
    return EventHandle(std::move(cancelled));
  }

  // Runs every event with time <= horizon, then advances the clock to the
  // horizon. Deterministic: ties are processed in insertion order.
  const Trace& run_until(Timestamp horizon) {
    if (horizon < now_) throw SimError("run_until: horizon is in the past");
    while (!queue_.empty() && queue_.top().time <= horizon) {
      QueueItem item = queue_.top();
      queue_.pop();
      if (*item.entry->cancelled) continue;
      now_ = item.time;
      item.entry->cb(*this);
    }
    now_ = horizon;
    return trace_;
  }

  const Trace& trace() const { return trace_; }

  // --- traffic --------------------------------------------------------

  // Emit a request from a LAN host. Interception, delivery, and any response
  // happen per the trace semantics above.
  void send_request(TrafficEvent ev) {
    ev.time = now_;
    ev.lan = lan_of(ev.src);
    ev.direction = Direction::Request;
    ev.id = next_event_id_++;
    record(ev);

    Lan& l = lan(ev.lan);
    if (l.mitm && ev.origin != Origin::Interceptor && l.mitm->victims.count(ev.src)) {
      // copy: the handler may legitimately tear down its own MITM position
      const MitmHandler handler = l.mitm->handler;
      InterceptOutcome out = handler(*this, ev);
      switch (out.action) {
        case InterceptAction::Pass:
          deliver_request(ev);
          return;
        case InterceptAction::Modified:
          deliver_request(*out.injected);
          return;
        case InterceptAction::Fabricated: {
          TrafficEvent resp = *out.injected;
          resp.origin = Origin::Interceptor;
          push_response(std::move(resp), l.latency);
          return;
        }
      }
    }
    deliver_request(ev);
  }

  static TrafficEvent make_response(const TrafficEvent& req, Document payload,
                                    Origin origin = Origin::Service) {
    TrafficEvent resp;
    resp.src = req.src;
    resp.dst_host = req.dst_host;
    resp.method = req.method;
    resp.path = req.path;
    resp.payload = std::move(payload);
    resp.direction = Direction::Response;
    resp.request_id = req.id;
    resp.origin = origin;
    return resp;
  }

  void log(std::string msg) { log_.push_back(std::move(msg)); }
  const std::vector<std::string>& logs() const { return log_; }

  using Observer = std::function<void(Simulation&, const TrafficEvent&)>;
  void add_observer(Observer fn) { observers_.push_back(std::move(fn)); }

 private:
  struct Entry {
    Callback cb;
    std::shared_ptr<bool> cancelled;
  };
  struct QueueItem {
    Timestamp time;
    std::uint64_t seq;
    std::shared_ptr<Entry> entry;
    bool operator>(const QueueItem& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };

  void record(const TrafficEvent& ev) {
    trace_.push_back(ev);
    for (auto& obs : observers_) obs(*this, ev);
  }

  void deliver_request(const TrafficEvent& ev) {
    if (auto it = services_.find(ev.dst_host); it != services_.end()) {
      if (auto resp = it->second(*this, ev)) {
        push_response(make_response(ev, std::move(*resp)), lan(ev.lan).latency);
      }
      return;
    }
    if (has_host(ev.dst_host)) {
      const auto& table = ev.method == Method::SshExec ? ssh_ : local_http_;
      if (auto it = table.find(ev.dst_host); it != table.end()) {
        push_response(make_response(ev, it->second(*this, ev)), lan(ev.lan).latency);
        return;
      }
      log("drop: no handler on host " + ev.dst_host + " for " + method_name(ev.method));
      return;
    }
    if (ev.method == Method::TcpConnect) return;  // connection setup only
    if (default_responder_) {
      push_response(make_response(ev, Document{{"status", 200}}), lan(ev.lan).latency);
      return;
    }
    log("drop: unreachable destination " + ev.dst_host);
  }

  void push_response(TrafficEvent resp, Seconds latency) {
    schedule(now_ + latency, [resp = std::move(resp)](Simulation& sim) mutable {
      sim.dispatch_response(std::move(resp));
    });
  }

  void dispatch_response(TrafficEvent ev) {
    ev.time = now_;
    ev.lan = lan_of(ev.src);
    Lan& l = lan(ev.lan);
    if (l.mitm && ev.origin != Origin::Interceptor && l.mitm->victims.count(ev.src)) {
      const MitmHandler handler = l.mitm->handler;
      InterceptOutcome out = handler(*this, ev);
      if (out.action != InterceptAction::Pass) ev = *out.injected;
    }
    ev.time = now_;
    ev.direction = Direction::Response;
    ev.id = next_event_id_++;
    record(ev);
    if (auto it = inboxes_.find(ev.src); it != inboxes_.end()) it->second(*this, ev);
  }

  std::uint64_t seed_;
  Timestamp now_ = 0;
  Timestamp horizon_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_event_id_ = 1;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue_;
  Trace trace_;
  std::map<std::string, Lan> lans_;
  std::map<HostId, std::string> host_lan_;
  std::map<std::string, ServiceFn> services_;
  std::map<HostId, HandlerFn> local_http_;
  std::map<HostId, HandlerFn> ssh_;
  std::map<HostId, InboxFn> inboxes_;
  std::vector<Observer> observers_;
  std::vector<std::string> log_;
  ConsumptionMeter meter_;
  bool default_responder_ = true;
};

}  // namespace aquanet
