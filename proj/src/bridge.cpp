#include "collage/bridge.hpp"

#include <json.hpp>

#include "collage/errors.hpp"

namespace collage {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::string_view what, std::string_view line) {
  throw ProtocolError(std::string(what) + ": " + std::string(line));
}

json parse_line(std::string_view line) {
  if (line.find('\n') != std::string_view::npos) fail("embedded newline in protocol line", line);
  try {
    json j = json::parse(line);
    if (!j.is_object()) fail("protocol line is not a JSON object", line);
    return j;
  } catch (const json::parse_error&) {
    fail("malformed protocol line", line);
  }
}

json box_to_json(const DetectionBox& b) {
  return json{{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}, {"class_id", b.class_id},
              {"confidence", b.confidence}};
}

DetectionBox box_from_json(const json& j) {
  DetectionBox b;
  b.cx = j.at("cx").get<double>();
  b.cy = j.at("cy").get<double>();
  b.w = j.at("w").get<double>();
  b.h = j.at("h").get<double>();
  if (!j.at("class_id").is_number_integer()) throw DomainError("class_id must be an integer");
  b.class_id = j.at("class_id").get<int>();
  b.confidence = j.at("confidence").get<double>();
  validate_box(b);
  return b;
}

const json* field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

}  // namespace

std::string encode_request(const BridgeRequest& req) {
  json j{{"id", req.id}, {"kind", req.kind == RequestKind::Single ? "single" : "collage"}, {"image", req.image}};
  if (req.grid_s) j["grid_s"] = *req.grid_s;
  return j.dump();
}

BridgeRequest decode_request(std::string_view line) {
  const json j = parse_line(line);
  BridgeRequest r;
  try {
    r.id = j.at("id").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "single") r.kind = RequestKind::Single;
    else if (kind == "collage") r.kind = RequestKind::Collage;
    else fail("unknown request kind", line);
    r.image = j.at("image").get<std::string>();
    if (const json* g = field(j, "grid_s")) {
      if (!g->is_number_integer()) fail("grid_s must be an integer", line);
      r.grid_s = g->get<int>();
    }
  } catch (const json::exception&) {
    fail("request is missing or mistypes a field", line);
  }
  if (r.kind == RequestKind::Collage && (!r.grid_s || *r.grid_s < 1)) fail("collage request needs grid_s >= 1", line);
  if (r.kind == RequestKind::Single && r.grid_s) fail("single request must not carry grid_s", line);
  return r;
}

std::string encode_response(const BridgeResponse& resp) {
  json j{{"id", resp.id}};
  if (resp.class_id) j["class_id"] = *resp.class_id;
  if (resp.confidence) j["confidence"] = *resp.confidence;
  if (resp.boxes) {
    json arr = json::array();
    for (const auto& b : *resp.boxes) arr.push_back(box_to_json(b));
    j["boxes"] = std::move(arr);
  }
  if (resp.error) j["error"] = *resp.error;
  return j.dump();
}

BridgeResponse decode_response(std::string_view line) {
  const json j = parse_line(line);
  BridgeResponse r;
  try {
    r.id = j.at("id").get<std::string>();
    if (const json* c = field(j, "class_id")) {
      if (!c->is_number_integer()) fail("class_id must be an integer", line);
      r.class_id = c->get<int>();
    }
    if (const json* c = field(j, "confidence")) r.confidence = c->get<double>();
    if (const json* b = field(j, "boxes")) {
      if (!b->is_array()) fail("boxes must be an array", line);
      std::vector<DetectionBox> boxes;
      for (const auto& bj : *b) boxes.push_back(box_from_json(bj));
      r.boxes = std::move(boxes);
    }
    if (const json* e = field(j, "error")) r.error = e->get<std::string>();
  } catch (const json::exception&) {
    fail("response is missing or mistypes a field", line);
  } catch (const DomainError& e) {
    fail(std::string("invalid box (") + e.what() + ")", line);
  }

  const bool single_payload = r.class_id || r.confidence;
  const bool has_payload = single_payload || r.boxes;
  if (r.error && has_payload) fail("response carries both error and payload", line);
  if (!r.error && !has_payload) fail("response carries neither payload nor error", line);
  if (single_payload && r.boxes) fail("response mixes single and collage payloads", line);
  if (single_payload && !r.class_id) fail("single response needs class_id", line);
  if (r.confidence && !(*r.confidence >= 0.0 && *r.confidence <= 1.0)) fail("confidence outside [0, 1]", line);
  return r;
}

BridgeResponse decode_response(std::string_view line, std::string_view expected_id) {
  BridgeResponse r = decode_response(line);
  if (r.id != expected_id)
    fail("response id '" + r.id + "' does not match outstanding request '" + std::string(expected_id) + "'", line);
  return r;
}

std::string encode_event(const ProtocolEvent& ev) {
  json j = std::visit(
      [](const auto& e) -> json {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, SingleResult>)
          return {{"type", "single"}, {"request", e.request}, {"time", e.time}, {"class_id", e.class_id}};
        else if constexpr (std::is_same_v<E, ReissueResult>)
          return {{"type", "reissue"}, {"request", e.request}, {"time", e.time}, {"class_id", e.class_id}};
        else if constexpr (std::is_same_v<E, DeadlineTick>)
          return {{"type", "tick"}, {"time", e.time}};
        else {
          json boxes = json::array();
          for (const auto& b : e.boxes) boxes.push_back(box_to_json(b));
          return {{"type", "collage"}, {"time", e.time}, {"boxes", std::move(boxes)}};
        }
      },
      ev);
  return j.dump();
}

ProtocolEvent decode_event(std::string_view line) {
  const json j = parse_line(line);
  try {
    const auto type = j.at("type").get<std::string>();
    const double t = j.at("time").get<double>();
    if (type == "single")
      return SingleResult{j.at("request").get<std::size_t>(), t, j.at("class_id").get<int>()};
    if (type == "reissue")
      return ReissueResult{j.at("request").get<std::size_t>(), t, j.at("class_id").get<int>()};
    if (type == "tick") return DeadlineTick{t};
    if (type == "collage") {
      CollageResult c{t, {}};
      for (const auto& bj : j.at("boxes")) c.boxes.push_back(box_from_json(bj));
      return c;
    }
  } catch (const json::exception&) {
    fail("malformed event", line);
  } catch (const DomainError&) {
    fail("malformed event box", line);
  }
  fail("unknown event type", line);
}

}  // namespace collage
