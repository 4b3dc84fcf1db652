// collage: encode collages, decode detector boxes, simulate redundancy
// schemes, chart reports, and serve live batches against model backends.
//
// Exit codes: 0 success, 1 usage error, 2 data/protocol/config error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "collage/bridge.hpp"
#include "collage/decoder.hpp"
#include "collage/dispatch.hpp"
#include "collage/errors.hpp"
#include "collage/image.hpp"
#include "collage/ppm.hpp"
#include "collage/report.hpp"
#include "collage/sim_config.hpp"

namespace fs = std::filesystem;
using namespace collage;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << data;
  if (!out) throw DataError("failed writing " + path);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Common {
  std::uint64_t seed = 42;
  std::string out;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "PRNG seed")->capture_default_str();
  sub->add_option("--out", c.out, "Output path (stdout when omitted)");
  sub->add_option("--config", c.config, "Config file (JSON)");
}

// --- encode -----------------------------------------------------------------

struct EncodeArgs {
  std::size_t grid = 1;
  std::string cell = "64x64";
  std::vector<std::string> images;
};

int cmd_encode(const EncodeArgs& a, const Common& c) {
  const GridSpec spec(a.grid);
  if (a.images.size() != spec.cells())
    throw UsageError("--grid " + std::to_string(a.grid) + " needs " + std::to_string(spec.cells()) +
                     " images, got " + std::to_string(a.images.size()));
  CollageLayout layout{spec, 0, 0};
  if (std::sscanf(a.cell.c_str(), "%zux%zu", &layout.cell_w, &layout.cell_h) != 2 || layout.cell_w == 0 ||
      layout.cell_h == 0)
    throw UsageError("--cell must look like WxH with positive integers");
  if (c.out.empty()) throw UsageError("--out is required");

  std::vector<RasterImage> imgs;
  for (const auto& path : a.images) {
    try {
      imgs.push_back(load_ppm(path));
    } catch (const std::exception& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  save_ppm(compose_collage(imgs, layout), c.out);
  return 0;
}

// --- decode -----------------------------------------------------------------

struct DecodeArgs {
  std::size_t grid = 1;
  std::string boxes_file;
  double min_confidence = 0.0;
};

int cmd_decode(const DecodeArgs& a, const Common& c) {
  const GridSpec spec(a.grid);
  const std::string text = read_file(a.boxes_file);
  std::vector<DetectionBox> boxes;
  const bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (!blank) {
    try {
      boxes = parse_boxes_json(text);
    } catch (const ParseError& e) {
      throw DataError(a.boxes_file + ":" + std::to_string(line_of_offset(text, e.offset())) + ": " + e.what());
    } catch (const BoxFileError& e) {
      throw DataError(a.boxes_file + ":" + std::to_string(e.line()) + ": " + e.what());
    }
  }
  const DecodedCollage dc = decode_collage(boxes, spec, a.min_confidence);
  std::string out = "cell,class_id,confidence\n";
  for (std::size_t i = 0; i < dc.slots.size(); ++i) {
    if (dc.slots[i]) out += std::to_string(i) + "," + std::to_string(dc.slots[i]->class_id) + "," +
                            fmt_double(dc.slots[i]->confidence) + "\n";
    else out += std::to_string(i) + ",MISSING,MISSING\n";
  }
  write_output(c.out, out);
  return 0;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string replay;
  bool quiet = false;
};

int replay_event_file(const SimulationConfig& cfg, const SimulateArgs& a, const Common& c) {
  const CollageCoding* coding = nullptr;
  for (const auto& s : cfg.schemes)
    if (const auto* p = std::get_if<CollageCoding>(&s)) coding = p;
  if (coding == nullptr) throw DataError("--replay needs a collage scheme in the config for its protocol settings");

  const std::string text = read_file(a.replay);
  std::vector<ProtocolEvent> events;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      events.push_back(decode_event(line));
    } catch (const ProtocolError& e) {
      throw DataError(a.replay + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  const BatchState st = replay_events(cfg.workload.spec.cells(), events, coding->protocol);
  std::string out = "request,status,source,class_id,time_ms\n";
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (const auto& r = st.requests[i])
      out += std::to_string(i) + ",OK," + std::string(to_string(r->source)) + "," + std::to_string(r->class_id) +
             "," + fmt_double(r->time) + "\n";
    else out += std::to_string(i) + ",FAILED,,,\n";
  }
  write_output(c.out, out);
  return 0;
}

int cmd_simulate(const SimulateArgs& a, const Common& c) {
  if (c.config.empty()) throw UsageError("--config is required");
  const SimulationConfig cfg = load_simulation_config(c.config);
  if (!a.replay.empty()) return replay_event_file(cfg, a, c);

  std::vector<SchemeReport> reports;
  for (const auto& s : cfg.schemes) reports.push_back(run_scheme(s, cfg.workload, c.seed));
  const std::string csv = format_report_csv(reports);
  if (c.out.empty() || c.out == "-") {
    std::cout << csv;
    if (!a.quiet) std::cerr << format_report_table(reports);
  } else {
    write_output(c.out, csv);
    if (!a.quiet) std::cout << format_report_table(reports);
  }
  return 0;
}

// --- report -----------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string format = "csv";
};

int cmd_report(const ReportArgs& a, const Common& c) {
  std::vector<SchemeReport> rows;
  for (const auto& in : a.inputs) {
    const std::string text = read_file(in);
    try {
      auto part = parse_report_csv(text);
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const ParseError& e) {
      throw DataError(in + ":" + std::to_string(line_of_offset(text, e.offset())) + ": " + e.what());
    }
  }
  const auto merged = aggregate_reports(rows);
  write_output(c.out, a.format == "svg" ? render_report_svg(merged) : format_report_csv(merged));
  return 0;
}

// --- serve ------------------------------------------------------------------

struct ServeArgs {
  std::vector<std::string> images;
  std::string events_out;
};

ProtocolConfig parse_protocol(const nlohmann::json& p, const GridSpec& spec) {
  ProtocolConfig pc;
  pc.spec = spec;
  try {
    pc.straggler_deadline = p.at("straggler_deadline_ms").get<double>();
    pc.reissue_deadline = p.at("reissue_deadline_ms").get<double>();
    pc.min_confidence = p.value("min_confidence", 0.0);
    const std::string policy = p.value("collage_policy", std::string("fill_after_deadline"));
    if (policy == "fill_on_arrival") pc.policy = FillPolicy::FillOnArrival;
    else if (policy != "fill_after_deadline")
      throw ConfigError("protocol.collage_policy", "must be fill_after_deadline or fill_on_arrival");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("protocol", e.what());
  }
  pc.validate();
  return pc;
}

int cmd_serve(const ServeArgs& a, const Common& c) {
  if (c.config.empty()) throw UsageError("--config is required");
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(read_file(c.config));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
  const fs::path base = fs::path(c.config).parent_path();
  GridSpec spec(1);
  std::vector<std::string> single_cmds;
  std::string collage_cmd;
  LiveConfig live;
  LiveBatch batch;
  bool compose = true;
  std::size_t cell_w = 64, cell_h = 64;
  fs::path work_dir = base;
  try {
    const auto s = cfg.at("grid_s").get<long long>();
    if (s < 1 || s > 64) throw ConfigError("grid_s", "must be in [1, 64]");
    spec = GridSpec(static_cast<std::size_t>(s));
    single_cmds = cfg.at("single_backends").get<std::vector<std::string>>();
    if (single_cmds.empty()) throw ConfigError("single_backends", "must name at least one command");
    collage_cmd = cfg.at("collage_backend").get<std::string>();
    live.reissue_timeout_ms = cfg.value("reissue_timeout_ms", 1000.0);
    batch.id = cfg.value("batch_id", std::string("batch"));
    compose = cfg.value("compose_collage", true);
    if (cfg.contains("cell")) {
      const auto cell = cfg.at("cell").get<std::vector<std::size_t>>();
      if (cell.size() != 2 || cell[0] == 0 || cell[1] == 0) throw ConfigError("cell", "must be [w, h] > 0");
      cell_w = cell[0];
      cell_h = cell[1];
    }
    if (cfg.contains("work_dir")) work_dir = base / cfg.at("work_dir").get<std::string>();
    if (cfg.contains("collage_image")) batch.collage_image = cfg.at("collage_image").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", e.what());
  }
  if (!cfg.contains("protocol")) throw ConfigError("protocol", "missing");
  live.protocol = parse_protocol(cfg.at("protocol"), spec);

  if (a.images.size() != spec.cells())
    throw UsageError("grid_s " + std::to_string(spec.side()) + " needs " + std::to_string(spec.cells()) +
                     " images, got " + std::to_string(a.images.size()));
  batch.images = a.images;
  if (compose && batch.collage_image.empty()) {
    std::vector<RasterImage> imgs;
    for (const auto& p : a.images) {
      try {
        imgs.push_back(load_ppm(p));
      } catch (const std::exception& e) {
        throw DataError(p + ": " + e.what());
      }
    }
    const fs::path collage_path = work_dir / (batch.id + ".collage.ppm");
    save_ppm(compose_collage(imgs, CollageLayout{spec, cell_w, cell_h}), collage_path);
    batch.collage_image = collage_path.string();
  }

  std::vector<std::unique_ptr<ProcessBackend>> owned;
  for (const auto& cmd : single_cmds) owned.push_back(std::make_unique<ProcessBackend>(cmd));
  auto collage_backend = std::make_unique<ProcessBackend>(collage_cmd);
  std::vector<BackendConnection*> singles;
  for (auto& b : owned) singles.push_back(b.get());

  SteadyClock clock;
  const LiveResult res = dispatch_live(batch, singles, *collage_backend, live, clock);

  std::string out = "request,status,source,class_id,time_ms,wall_ms\n";
  bool all_ok = true;
  for (std::size_t i = 0; i < res.requests.size(); ++i) {
    const LiveCompletion& lc = res.requests[i];
    if (lc.status == LiveStatus::Ok)
      out += std::to_string(i) + ",OK," + std::string(to_string(lc.completion->source)) + "," +
             std::to_string(lc.completion->class_id) + "," + fmt_double(lc.completion->time) + "," +
             fmt_double(lc.wall_ms) + "\n";
    else {
      all_ok = false;
      out += std::to_string(i) + ",FAILED,,,," + fmt_double(lc.wall_ms) + "\n";
    }
  }
  write_output(c.out, out);
  if (!a.events_out.empty()) {
    std::string ev;
    for (const auto& e : res.events) ev += encode_event(e) + "\n";
    write_output(a.events_out, ev);
  }
  for (const auto& d : res.diagnostics) std::cerr << "serve: " << d << "\n";
  return all_ok ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collage-coded redundancy for image classification serving"};
  app.require_subcommand(1);
  app.allow_extras(false);

  Common common;

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Compose s*s PPM images into one collage PPM");
  encode->add_option("--grid", enc.grid, "Grid side s")->required()->check(CLI::Range(1, 64));
  encode->add_option("--cell", enc.cell, "Cell size WxH in pixels")->capture_default_str();
  encode->add_option("images", enc.images, "Input PPM files, row-major")->required();
  add_common(encode, common);

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Decode a JSON box list into per-cell predictions");
  decode->add_option("--grid", dec.grid, "Grid side s")->required()->check(CLI::Range(1, 64));
  decode->add_option("--min-confidence", dec.min_confidence, "Drop boxes below this confidence")
      ->check(CLI::Range(0.0, 1.0));
  decode->add_option("boxes", dec.boxes_file, "Boxes JSON file")->required();
  add_common(decode, common);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Compare redundancy schemes on synthetic or traced latencies");
  simulate->add_option("--replay", sim.replay, "Replay a recorded serve event log instead of simulating");
  simulate->add_flag("--quiet", sim.quiet, "Suppress the percentile table");
  add_common(simulate, common);

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Aggregate report CSVs or chart them as SVG");
  report->add_option("--in", rep.inputs, "Report CSV (repeatable)")->required();
  report->add_option("--format", rep.format, "csv or svg")
      ->check(CLI::IsMember({"csv", "svg"}))
      ->capture_default_str();
  add_common(report, common);

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Run one live batch against backend processes");
  serve->add_option("images", srv.images, "Request images, row-major")->required();
  serve->add_option("--events", srv.events_out, "Write the applied protocol events as JSON lines");
  add_common(serve, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*encode) return cmd_encode(enc, common);
    if (*decode) return cmd_decode(dec, common);
    if (*simulate) return cmd_simulate(sim, common);
    if (*report) return cmd_report(rep, common);
    if (*serve) return cmd_serve(srv, common);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
