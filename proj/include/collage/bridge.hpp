#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "collage/geometry.hpp"
#include "collage/protocol.hpp"

namespace collage {

enum class RequestKind { Single, Collage };

/// One request line: {"id":str,"kind":"single"|"collage","image":str,"grid_s":int?}.
/// `image` is a PPM path or an inline base64 payload; the bridge passes it through unchanged.
struct BridgeRequest {
  std::string id;
  RequestKind kind = RequestKind::Single;
  std::string image;
  std::optional<int> grid_s;  // present iff kind == Collage

  friend bool operator==(const BridgeRequest&, const BridgeRequest&) = default;
};

/// One response line. Exactly one of {class_id [+ confidence], boxes, error} is populated.
struct BridgeResponse {
  std::string id;
  std::optional<int> class_id;
  std::optional<double> confidence;
  std::optional<std::vector<DetectionBox>> boxes;
  std::optional<std::string> error;

  bool is_error() const noexcept { return error.has_value(); }
  friend bool operator==(const BridgeResponse&, const BridgeResponse&) = default;
};

// Encoders produce a single line without the trailing newline. Decoders
// ignore unknown fields and throw ProtocolError quoting the offending line.
std::string encode_request(const BridgeRequest& req);
BridgeRequest decode_request(std::string_view line);
std::string encode_response(const BridgeResponse& resp);
BridgeResponse decode_response(std::string_view line);

/// decode_response, then checks the id against the expected one.
BridgeResponse decode_response(std::string_view line, std::string_view expected_id);

/// Event-log lines for recording live runs and replaying them offline.
std::string encode_event(const ProtocolEvent& ev);
ProtocolEvent decode_event(std::string_view line);

}  // namespace collage
