#include "collage/sim_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "collage/errors.hpp"

namespace collage {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError(where.empty() ? key : where + "." + key, "unknown field");
}

const json& require_object(const json& parent, const char* key, const std::string& where) {
  if (!parent.contains(key)) throw ConfigError(where + key, "missing");
  const json& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(where + key, "must be an object");
  return v;
}

double number(const json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(where + "." + key, "missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key, "must be a number");
  return v.get<double>();
}

long long integer(const json& obj, const char* key, const std::string& where, std::optional<long long> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(where.empty() ? key : where + "." + key, "missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where.empty() ? key : where + "." + key, "must be an integer");
  return v.get<long long>();
}

LatencyModel parse_latency(const json& o, const std::string& where) {
  reject_unknown(o, where, {"mu", "median_ms", "sigma", "p_straggler", "straggler_multiplier", "floor"});
  LatencyModel m;
  if (o.contains("mu") == o.contains("median_ms"))
    throw ConfigError(where + ".mu", "give exactly one of mu or median_ms");
  if (o.contains("mu")) {
    m.mu = number(o, "mu", where);
  } else {
    const double median = number(o, "median_ms", where);
    if (!(median > 0.0)) throw ConfigError(where + ".median_ms", "must be > 0");
    m.mu = std::log(median);
  }
  m.sigma = number(o, "sigma", where, 0.0);
  m.p_straggler = number(o, "p_straggler", where, 0.0);
  m.straggler_multiplier = number(o, "straggler_multiplier", where, 1.0);
  m.floor = number(o, "floor", where, 0.0);
  m.validate(where.c_str());
  return m;
}

}  // namespace

SimulationConfig parse_simulation_config(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config", "top level must be an object");
  reject_unknown(doc, "", {"num_batches", "grid_s", "single_model", "collage_model", "protocol", "accuracy",
                           "schemes", "trace", "description"});

  SimulationConfig cfg;
  Workload& w = cfg.workload;
  const long long batches = integer(doc, "num_batches", "");
  if (batches < 1) throw ConfigError("num_batches", "must be >= 1");
  w.num_batches = static_cast<std::size_t>(batches);
  const long long s = integer(doc, "grid_s", "");
  if (s < 1 || s > 64) throw ConfigError("grid_s", "must be in [1, 64]");
  w.spec = GridSpec(static_cast<std::size_t>(s));
  w.single_latency = parse_latency(require_object(doc, "single_model", ""), "single_model");

  if (doc.contains("accuracy")) {
    const json& a = require_object(doc, "accuracy", "");
    reject_unknown(a, "accuracy", {"num_classes", "acc_single", "acc_collage", "p_miss", "box_jitter"});
    const long long k = integer(a, "num_classes", "accuracy", 10);
    if (k < 2 || k > 1'000'000) throw ConfigError("accuracy.num_classes", "must be in [2, 1000000]");
    w.accuracy.num_classes = static_cast<int>(k);
    w.accuracy.acc_single = number(a, "acc_single", "accuracy", 0.9);
    w.accuracy.acc_collage = number(a, "acc_collage", "accuracy", 0.8);
    w.accuracy.p_miss = number(a, "p_miss", "accuracy", 0.0);
    w.accuracy.box_jitter = number(a, "box_jitter", "accuracy", 0.0);
  }
  w.accuracy.validate();

  if (doc.contains("trace")) {
    if (!doc["trace"].is_string()) throw ConfigError("trace", "must be a path string");
    std::filesystem::path p = doc["trace"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("trace", "cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      w.trace = parse_trace_csv(ss.str());
    } catch (const ParseError& e) {
      throw ConfigError("trace", e.what());
    }
  }

  if (!doc.contains("schemes") || !doc["schemes"].is_array() || doc["schemes"].empty())
    throw ConfigError("schemes", "must be a non-empty array");
  const auto& schemes = doc["schemes"];
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    const std::string where = "schemes[" + std::to_string(k) + "]";
    const json& sj = schemes[k];
    if (!sj.is_object() || !sj.contains("type") || !sj["type"].is_string())
      throw ConfigError(where + ".type", "missing");
    const std::string type = sj["type"].get<std::string>();
    if (type == "no_redundancy") {
      reject_unknown(sj, where, {"type"});
      cfg.schemes.emplace_back(NoRedundancy{});
    } else if (type == "replication") {
      reject_unknown(sj, where, {"type", "r"});
      const long long r = integer(sj, "r", where);
      if (r < 1 || r > 64) throw ConfigError(where + ".r", "must be in [1, 64]");
      cfg.schemes.emplace_back(Replication{static_cast<int>(r)});
    } else if (type == "collage") {
      reject_unknown(sj, where, {"type", "collage_cost"});
      CollageCoding c;
      c.collage_cost = number(sj, "collage_cost", where, 1.0);
      if (!(c.collage_cost >= 0.0)) throw ConfigError(where + ".collage_cost", "must be >= 0");
      c.protocol.spec = w.spec;
      const json& p = require_object(doc, "protocol", "");
      reject_unknown(p, "protocol", {"straggler_deadline_ms", "reissue_deadline_ms", "collage_policy", "min_confidence"});
      c.protocol.straggler_deadline = number(p, "straggler_deadline_ms", "protocol");
      c.protocol.reissue_deadline = number(p, "reissue_deadline_ms", "protocol");
      c.protocol.min_confidence = number(p, "min_confidence", "protocol", 0.0);
      const std::string policy = p.value("collage_policy", std::string("fill_after_deadline"));
      if (policy == "fill_after_deadline") c.protocol.policy = FillPolicy::FillAfterDeadline;
      else if (policy == "fill_on_arrival") c.protocol.policy = FillPolicy::FillOnArrival;
      else throw ConfigError("protocol.collage_policy", "must be fill_after_deadline or fill_on_arrival");
      c.protocol.validate();
      c.collage_latency = parse_latency(require_object(doc, "collage_model", ""), "collage_model");
      cfg.schemes.emplace_back(std::move(c));
    } else {
      throw ConfigError(where + ".type", "unknown scheme '" + type + "'");
    }
  }
  w.validate();
  return cfg;
}

SimulationConfig load_simulation_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_simulation_config(ss.str(), path.parent_path());
}

LatencyTrace parse_trace_csv(std::string_view text) {
  LatencyTrace trace;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_start = pos;
    pos = end + 1;
    if (header) {
      if (line != "task_id,kind,latency_ms")
        throw ParseError("trace header must be task_id,kind,latency_ms", line_start);
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw ParseError("trace row needs three columns", line_start);
    const std::string_view kind = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string value(line.substr(c2 + 1));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !(v > 0.0) || !std::isfinite(v))
      throw ParseError("trace latency must be a positive number", line_start + c2 + 1);
    if (kind == "single") trace.single.push_back(v);
    else if (kind == "collage") trace.collage.push_back(v);
    else throw ParseError("trace kind must be single or collage", line_start + c1 + 1);
  }
  if (header) throw ParseError("trace is empty", 0);
  return trace;
}

}  // namespace collage
