#include "tmm/cli.hpp"

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tmm/device_ranker.hpp"
#include "tmm/error.hpp"
#include "tmm/scenario.hpp"
#include "tmm/service.hpp"
#include "tmm/workspace.hpp"

#ifndef TMM_FIXTURE_DIR
#define TMM_FIXTURE_DIR ""
#endif

namespace tmm {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Bare fixture names ("verify_s6.yaml") also resolve against the shipped
// fixtures directory.
fs::path find_input(const std::string& name) {
  const fs::path p(name);
  if (fs::exists(p)) return p;
  const fs::path dir(TMM_FIXTURE_DIR);
  if (!dir.empty() && !p.has_parent_path() && fs::exists(dir / p)) return dir / p;
  throw Error(ErrorCode::NotFound, "no such file: " + name);
}

Vector3 parse_vec(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) v.clear();
    } catch (const std::exception&) {
      v.clear();
      break;
    }
  }
  if (v.size() != 3) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs x,y,z");
  }
  return {v[0], v[1], v[2]};
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

void print_list(const LayerRegistry& reg, std::ostream& out) {
  out << pad("ID", 18) << pad("TIMESTAMP", 26) << pad("VERTICES", 10) << "LOADED\n";
  for (const auto& d : reg.list_rooms()) {
    std::string loaded = "-";
    if (d.ordinal) loaded = std::to_string(*d.ordinal) + " " + std::string(d.color->name);
    out << pad(d.id, 18) << pad(d.timestamp.to_iso8601(), 26)
        << pad(std::to_string(d.vertex_count), 10) << loaded << '\n';
  }
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-layered room scans: save, overlay and measure across epochs", "tmm"};
  app.require_subcommand(1);
  std::optional<std::string> library;
  app.add_option("--library", library, "library directory (default $TMM_LIBRARY or ./tmm-library)");

  auto* save = app.add_subcommand("save", "snapshot the live layer into the library");
  std::vector<std::string> load_ids;
  auto* load = app.add_subcommand("load", "overlay saved snapshots (max 6)");
  load->add_option("ids", load_ids, "snapshot ids or unique prefixes")->required();
  std::string unload_id;
  auto* unload = app.add_subcommand("unload", "remove a loaded overlay");
  unload->add_option("id", unload_id)->required();
  auto* list = app.add_subcommand("list", "list saved snapshots");
  auto* toggle = app.add_subcommand("toggle-live", "show or hide the live layer");

  auto* reset = app.add_subcommand("reset", "re-scan the room (optionally from a new scene)");
  std::optional<std::string> reset_scene;
  std::optional<std::uint64_t> reset_seed;
  std::optional<double> reset_noise, reset_edge;
  reset->add_option("--scene", reset_scene, "scene YAML file");
  reset->add_option("--seed", reset_seed);
  reset->add_option("--noise", reset_noise, "scan noise sigma (m)");
  reset->add_option("--edge", reset_edge, "scan grid edge length (m)");

  auto* move = app.add_subcommand("move", "move an object in the simulated room and re-scan");
  std::string move_object;
  std::string move_translate = "0,0,0";
  double move_yaw = 0.0;
  move->add_option("object", move_object)->required();
  move->add_option("--translate", move_translate, "x,y,z in meters");
  move->add_option("--yaw", move_yaw, "degrees about z");

  auto* measure = app.add_subcommand("measure", "place pins and report distances");
  std::vector<std::string> pin_specs;
  std::optional<std::string> measure_units;
  measure->add_option("--pin", pin_specs, "x,y,z@layer or ray:ox,oy,oz/dx,dy,dz");
  measure->add_option("--units", measure_units, "m, cm, ft or in");

  auto* clear = app.add_subcommand("clear", "remove all pins and measurements");

  auto* settings = app.add_subcommand("settings", "measurement display settings");
  std::optional<std::string> set_units, set_mode;
  std::optional<double> set_font, set_line;
  settings->add_option("--units", set_units);
  settings->add_option("--mode", set_mode, "distance or quick");
  settings->add_option("--font-size", set_font);
  settings->add_option("--line-width", set_line);

  auto* view = app.add_subcommand("view", "scale, rotate or translate the overlay view");
  double view_scale = 1.0, view_yaw = 0.0;
  std::string view_translate = "0,0,0";
  bool view_reset = false;
  view->add_option("--scale", view_scale, "multiplies the current scale");
  view->add_option("--yaw", view_yaw, "degrees");
  view->add_option("--translate", view_translate, "x,y,z");
  view->add_flag("--reset", view_reset);

  auto* rank = app.add_subcommand("rank", "weighted device scoring");
  std::string rank_csv, rank_schema;
  bool rank_pre = false;
  std::optional<std::string> rank_json;
  rank->add_option("csv", rank_csv)->required();
  rank->add_option("--schema", rank_schema)->required();
  rank->add_flag("--pre-normalized", rank_pre, "values are already fractions in [0,1]");
  rank->add_option("--json", rank_json, "also write a JSON report");

  auto* scenario = app.add_subcommand("scenario", "scripted simulations");
  scenario->require_subcommand(1);
  auto* run = scenario->add_subcommand("run", "run a scenario file");
  std::string run_file;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_report;
  std::optional<double> run_noise, run_jitter;
  bool run_timing = false;
  run->add_option("file", run_file)->required();
  run->add_option("--seed", run_seed);
  run->add_option("--report", run_report, "write the JSON report here");
  run->add_option("--noise", run_noise, "override scan noise sigma (m)");
  run->add_option("--jitter", run_jitter, "override pin jitter (m)");
  run->add_flag("--timing", run_timing, "include wall time in the report");

  auto* serve = app.add_subcommand("serve", "HTTP+JSON API on 127.0.0.1");
  int serve_port = kDefaultPort;
  serve->add_option("--port", serve_port);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*rank) {
      const auto devices = ranker::parse_devices_csv(read_text(find_input(rank_csv)));
      const auto schema = ranker::parse_schema_json(read_text(find_input(rank_schema)));
      const auto fractions = rank_pre ? ranker::as_fractions(devices, schema)
                                      : ranker::normalize(devices, schema);
      const auto report = ranker::rank(fractions, schema);
      out << ranker::format_table(report);
      if (rank_json) {
        std::ofstream f(*rank_json);
        f << ranker::report_json(report) << '\n';
        if (!f) throw Error(ErrorCode::StorageFailure, "cannot write " + *rank_json);
      }
      return 0;
    }

    if (*run) {
      const auto script = sim::load_scenario_file(find_input(run_file).string());
      sim::RunOptions opts;
      opts.seed = run_seed;
      opts.noise_sigma = run_noise;
      opts.pin_jitter = run_jitter;
      opts.include_timing = run_timing;
      sim::ScenarioReport report;
      if (library) {
        Workspace ws(*library);
        MeasurementSession session;
        report = sim::run_scenario(script, ws.registry(), session, opts);
        ws.adopt_scenario(script, report, session, report.seed,
                          run_noise.value_or(script.noise_sigma));
        ws.persist();
      } else {
        const fs::path tmp = fs::temp_directory_path() /
                             ("tmm-run-" + std::to_string(std::random_device{}()));
        {
          LayerRegistry reg(tmp);
          MeasurementSession session;
          report = sim::run_scenario(script, reg, session, opts);
        }
        std::error_code ec;
        fs::remove_all(tmp, ec);
      }
      if (run_report) {
        std::ofstream f(*run_report);
        f << report.json << '\n';
        if (!f) throw Error(ErrorCode::StorageFailure, "cannot write " + *run_report);
      }
      for (const auto& m : report.measurements) {
        out << m.label << "  " << m.display << "  (" << m.elapsed_s << " s)";
        if (m.ground_truth_m) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.4f", *m.ground_truth_m);
          out << "  truth " << buf << " m";
        }
        out << '\n';
      }
      for (const auto& a : report.assertions) {
        out << (a.passed ? "PASS " : "FAIL ") << a.measurement << " measured " << a.measured
            << " expected " << a.expected << " +/- " << a.tolerance << '\n';
      }
      return report.passed ? 0 : 1;
    }

    Workspace ws(resolve_library(library));
    auto& reg = ws.registry();

    if (*save) {
      const auto id = reg.save_room(Timestamp::now());
      ws.persist();
      for (const auto& d : reg.list_rooms()) {
        if (d.id == id) out << id << "  " << d.timestamp.to_iso8601() << '\n';
      }
    } else if (*load) {
      const auto loaded = reg.load_rooms(load_ids);
      ws.persist();
      for (const auto& d : loaded) out << d.id << "  " << d.color->name << '\n';
    } else if (*unload) {
      reg.unload_room(unload_id);
      ws.persist();
    } else if (*list) {
      print_list(reg, out);
    } else if (*toggle) {
      out << (reg.toggle_realtime_mesh() ? "live: visible" : "live: hidden") << '\n';
      ws.persist();
    } else if (*reset) {
      std::optional<sim::SceneSpec> spec;
      if (reset_scene) spec = sim::parse_scene(read_text(find_input(*reset_scene)));
      ws.reset(std::move(spec), reset_noise, reset_edge, reset_seed, Timestamp::now());
      ws.persist();
      out << "live: rescanned at " << ws.live().scanned_at.to_iso8601() << '\n';
    } else if (*move) {
      ws.move(move_object, parse_vec(move_translate, "--translate"), move_yaw, Timestamp::now());
      ws.persist();
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", ws.live().scene.net_displacement(move_object));
      out << move_object << " net displacement " << buf << " m\n";
    } else if (*measure) {
      auto& session = ws.session();
      if (measure_units) session.set_units(parse_units(*measure_units));
      std::vector<PinSpec> specs;
      for (const auto& s : pin_specs) specs.push_back(parse_pin_spec(s));
      // All-or-nothing: resolve every pin against a copy first.
      MeasurementSession trial = session;
      for (const auto& s : specs) trial.place_pin(reg.targets(s.filter), s.ray, Timestamp::now());
      session = trial;
      ws.persist();
      out << measurement_report(session).dump(2) << '\n';
    } else if (*clear) {
      ws.session().clear_measurements();
      ws.persist();
    } else if (*settings) {
      auto& session = ws.session();
      MeasurementSession trial = session;
      if (set_mode) trial.set_mode(parse_mode(*set_mode));
      if (set_units) trial.set_units(parse_units(*set_units));
      if (set_font) trial.set_font_size(*set_font);
      if (set_line) trial.set_line_width(*set_line);
      session = trial;
      ws.persist();
      out << settings_json(session).dump() << '\n';
    } else if (*view) {
      if (view_reset) ws.view() = ViewState{};
      ws.view() = manipulate_view(
          ws.view(), view_scale,
          RigidTransform::from_yaw(view_yaw * std::numbers::pi / 180.0,
                                   parse_vec(view_translate, "--translate")));
      ws.persist();
      out << view_json(ws.view()).dump() << '\n';
    } else if (*serve) {
      Service service(ws);
      HttpServer server(service);
      const int port = server.start(serve_port);
      out << "serving on http://127.0.0.1:" << port << "  library " << reg.library_path().string()
          << std::endl;
      g_stop = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      ws.persist();
    }
    return 0;
  } catch (const Error& e) {
    err << error_json(e.code(), e.what()).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << error_json(ErrorCode::InvalidArgument, e.what()).dump() << '\n';
    return 1;
  }
}

}  // namespace tmm
