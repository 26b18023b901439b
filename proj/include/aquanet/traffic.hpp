#pragma once

#include <string>
#include <vector>

#include "aquanet/payload.hpp"
#include "aquanet/types.hpp"

namespace aquanet {

// TCP_CONNECT marks the start of a cloud session; HTTP requests ride the
// current session. Both observables appear in the trace.
enum class Method { Get, Post, SshExec, LocalHttp, TcpConnect };

enum class Direction { Request, Response };

// Attribution for analysis; not part of the exported trace format.
enum class Origin { Device, Service, Bot, Interceptor };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Get: return "GET";
    case Method::Post: return "POST";
    case Method::SshExec: return "SSH_EXEC";
    case Method::LocalHttp: return "LOCAL_HTTP";
    case Method::TcpConnect: return "TCP_CONNECT";
  }
  return "?";
}

inline const char* direction_name(Direction d) {
  return d == Direction::Request ? "request" : "response";
}

// One simulated application-layer exchange leg as seen on the source host's
// LAN segment. `src` is always the LAN endpoint of the conversation; for
// responses, `dst_host` names the remote peer that answered.
struct TrafficEvent {
  Timestamp time = 0;
  std::string lan;
  HostId src;
  std::string dst_host;
  Method method = Method::Get;
  std::string path;
  Document payload;
  Direction direction = Direction::Request;

  std::uint64_t id = 0;          // delivery order, assigned by the simulation
  std::uint64_t request_id = 0;  // responses reference the request they answer
  Origin origin = Origin::Device;
  HostId origin_actor;  // bot or interceptor host when origin is not Device/Service
};

using Trace = std::vector<TrafficEvent>;

// Exported line format, consumed by the detector tooling and the CLI:
// time, lan, src, dst_host, method, path, direction, payload digest.
inline std::string trace_line(const TrafficEvent& e) {
  std::string out;
  out.reserve(96);
  out += std::to_string(e.time);
  out += '\t';
  out += e.lan;
  out += '\t';
  out += e.src;
  out += '\t';
  out += e.dst_host;
  out += '\t';
  out += method_name(e.method);
  out += '\t';
  out += e.path;
  out += '\t';
  out += direction_name(e.direction);
  out += '\t';
  out += payload_digest(e.payload);
  return out;
}

}  // namespace aquanet
