// schemnet: schematic image to SPICE netlist.

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "schemnet/config.hpp"
#include "schemnet/evalx.hpp"
#include "schemnet/json_io.hpp"
#include "schemnet/pipeline.hpp"
#include "schemnet/serve.hpp"
#include "schemnet/synth.hpp"

namespace fs = std::filesystem;
using namespace schemnet;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;  // explicit per-key flags, applied last

  void attach(CLI::App* app) {
    app->add_option("--config", file, "key=value config file");
    app->add_option("--set", sets, "override one config key (key=value)");
    for (const auto& key : Config::keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app->add_option_function<std::string>(flag, [this, key](const std::string& v) { flags.emplace_back(key, v); },
                                            "config: " + key);
    }
  }

  Config build() const {
    Config cfg;
    if (!file.empty()) cfg = load_config_file(file, cfg);
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got \"" + s + "\"");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : flags) cfg.set(k, v);
    return cfg;
  }
};

std::string read_text(const fs::path& p) {
  auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& p, const std::string& s) {
  write_file(p, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

const char* stage_of(const std::exception& e) {
  if (dynamic_cast<const DecodeError*>(&e)) return "decode";
  if (dynamic_cast<const IngestError*>(&e)) return "ingest";
  if (dynamic_cast<const ParseError*>(&e)) return "netlist";
  if (dynamic_cast<const CapacityError*>(&e)) return "netlist";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  return "error";
}

struct ConvertJob {
  fs::path image;
  std::optional<fs::path> detections;
  std::optional<fs::path> ocr;
  std::optional<fs::path> overrides;
  fs::path out;  // output prefix
};

// Runs one conversion and writes its files. Returns the exit status.
int run_convert(const ConvertJob& job, const Config& cfg, bool force, const std::vector<std::string>& dumps) {
  ConvertInput in;
  in.image = load_image_file(job.image);
  if (job.detections) in.detections_json = read_text(*job.detections);
  if (job.ocr) in.ocr_json = read_text(*job.ocr);
  if (job.overrides) in.overrides = compact_overrides(parse_overrides(read_text(*job.overrides)));
  in.force = force;
  if (const char* key = std::getenv("ASSIST_API_KEY")) in.assist_api_key = key;

  ConvertResult r = convert(in, cfg);
  fs::path base = job.out;
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  auto with = [&](const std::string& suffix) { return fs::path(base.string() + suffix); };
  fs::remove(with(".cir"));
  if (r.netlist) write_text(with(".cir"), to_spice(*r.netlist));
  write_text(with(".flags.json"), flags_report(r));
  write_text(with(".detections.json"), serialize_detections(r.components, r.dims));
  write_text(with(".config"), cfg.to_text());
  if (!cfg.assist_url.empty()) {
    std::string log;
    for (const auto& l : r.assist_log) log += l + "\n";
    write_text(with(".assist.log"), log);
  }
  for (const auto& stage : dumps) {
    if (stage == "binary") {
      write_file(with(".binary.png"), encode_png(to_gray(r.binary)));
    } else if (stage == "labels") {
      write_file(with(".labels.png"), encode_png(colorize_labels(label_components(r.binary, cfg.connect.connectivity))));
    } else {
      write_text(with("." + stage + ".json"), stage_dump(r, stage));
    }
  }
  return r.exit_code();
}

std::optional<fs::path> existing(const fs::path& p) {
  return fs::exists(p) ? std::optional<fs::path>(p) : std::nullopt;
}

// Images of a corpus: <dir>/<name>/image.{pgm,png} or <dir>/<name>.{pgm,png}.
std::vector<std::pair<std::string, ConvertJob>> corpus_jobs(const fs::path& dir, const fs::path& out) {
  std::vector<std::pair<std::string, ConvertJob>> jobs;
  for (const auto& e : fs::directory_iterator(dir)) {
    ConvertJob j;
    std::string name;
    if (e.is_directory()) {
      auto in = find_job_inputs(e.path());
      if (!in) continue;
      name = e.path().filename().string();
      j.image = in->image;
      j.detections = existing(e.path() / "ingest.detections.json");
      j.ocr = existing(e.path() / "ingest.texts.json");
      j.overrides = existing(e.path() / "overrides.json");
    } else {
      auto ext = e.path().extension().string();
      if (ext != ".pgm" && ext != ".png") continue;
      name = e.path().stem().string();
      j.image = e.path();
    }
    j.out = out / name;
    jobs.emplace_back(name, std::move(j));
  }
  std::sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return jobs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convert schematic images to SPICE netlists"};
  app.require_subcommand(1);

  // convert
  auto* conv = app.add_subcommand("convert", "convert one schematic image");
  ConfigArgs conv_cfg;
  conv_cfg.attach(conv);
  std::string conv_image, conv_det, conv_ocr, conv_out, conv_overrides;
  std::vector<std::string> conv_dumps;
  bool conv_force = false;
  conv->add_option("image", conv_image, "input image (PGM or PNG)")->required();
  conv->add_option("--detections", conv_det, "detection document to ingest");
  conv->add_option("--ocr", conv_ocr, "OCR document to ingest");
  conv->add_option("-o,--out", conv_out, "output prefix (default: image path without extension)");
  conv->add_option("--overrides", conv_overrides, "review overrides to apply");
  conv->add_option("--dump-stage", conv_dumps, "write a stage artifact")
      ->check(CLI::IsMember({"binary", "labels", "detections", "texts", "nets", "bindings", "netlist"}));
  conv->add_flag("--force", conv_force, "emit despite dangling terminals (unique NC nodes)");

  // batch
  auto* batch = app.add_subcommand("batch", "convert every image of a corpus directory");
  ConfigArgs batch_cfg;
  batch_cfg.attach(batch);
  std::string batch_dir, batch_out;
  unsigned batch_jobs = std::max(1u, std::thread::hardware_concurrency());
  bool batch_force = false;
  batch->add_option("corpus", batch_dir, "corpus directory")->required();
  batch->add_option("-o,--out", batch_out, "output directory")->required();
  batch->add_option("-j,--jobs", batch_jobs, "worker threads")->check(CLI::Range(1u, 256u));
  batch->add_flag("--force", batch_force, "emit despite dangling terminals");

  // eval
  auto* ev = app.add_subcommand("eval", "score predictions against golden data");
  std::string ev_corpus, ev_pred, ev_out;
  ConfigArgs ev_cfg;
  ev_cfg.attach(ev);
  ev->add_option("corpus", ev_corpus, "corpus directory with golden files")->required();
  ev->add_option("predictions", ev_pred, "directory written by batch")->required();
  ev->add_option("-o,--out", ev_out, "report directory (default: predictions)");

  // synth
  auto* syn = app.add_subcommand("synth", "generate synthetic schematics with golden files");
  std::uint64_t syn_seed = 0;
  int syn_count = 1, syn_n = 0, syn_gaps = 0, syn_cut = -1, syn_brightness = 0, syn_scale = 1;
  bool syn_flip = false, syn_degrade = false;
  std::string syn_out, syn_drop;
  syn->add_option("--seed", syn_seed, "first seed");
  syn->add_option("--count", syn_count, "number of consecutive seeds")->check(CLI::PositiveNumber);
  syn->add_option("--n", syn_n, "components per schematic (default: 2 + seed % 19)")->check(CLI::Range(2, 20));
  syn->add_option("-o,--out", syn_out, "output directory")->required();
  syn->add_flag("--degrade", syn_degrade, "apply the degraded-corpus mix");
  syn->add_option("--gaps", syn_gaps, "1-px notches across random wires")->check(CLI::NonNegativeNumber);
  syn->add_option("--cut-wire", syn_cut, "erase the middle of wire i");
  syn->add_option("--drop-value", syn_drop, "erase the value label of this designator");
  syn->add_option("--brightness", syn_brightness, "brightness offset")->check(CLI::Range(-255, 255));
  syn->add_flag("--flip", syn_flip, "mirror horizontally");
  syn->add_option("--scale", syn_scale, "integer upscale")->check(CLI::Range(1, 4));

  // serve
  auto* srv = app.add_subcommand("serve", "HTTP API for reviewing flagged jobs");
  ConfigArgs srv_cfg;
  srv_cfg.attach(srv);
  std::string srv_root, srv_host = "127.0.0.1";
  int srv_port = 8080;
  srv->add_option("root", srv_root, "job directory")->required();
  srv->add_option("--host", srv_host, "bind address");
  srv->add_option("--port", srv_port, "port")->check(CLI::Range(0, 65535));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*conv) {
      Config cfg = conv_cfg.build();
      ConvertJob job;
      job.image = conv_image;
      if (!conv_det.empty()) job.detections = conv_det;
      if (!conv_ocr.empty()) job.ocr = conv_ocr;
      if (!conv_overrides.empty()) job.overrides = conv_overrides;
      job.out = conv_out.empty() ? fs::path(conv_image).replace_extension() : fs::path(conv_out);
      int code = run_convert(job, cfg, conv_force, conv_dumps);
      if (code == 2) std::cerr << "unresolved flags; see " << job.out.string() << ".flags.json\n";
      return code;
    }

    if (*batch) {
      Config cfg = batch_cfg.build();
      if (!fs::is_directory(batch_dir)) throw std::invalid_argument("corpus directory not found: " + batch_dir);
      fs::create_directories(batch_out);
      auto jobs = corpus_jobs(batch_dir, batch_out);
      if (jobs.empty()) throw std::invalid_argument("no images under " + batch_dir);
      std::vector<int> codes(jobs.size(), 1);
      std::vector<std::string> errors(jobs.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i; (i = next++) < jobs.size();) {
          try {
            codes[i] = run_convert(jobs[i].second, cfg, batch_force, {});
          } catch (const std::exception& e) {
            errors[i] = std::string(stage_of(e)) + ": " + e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (unsigned t = 1; t < std::min<std::size_t>(batch_jobs, jobs.size()); ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      nlohmann::json rows = nlohmann::json::array();
      int clean = 0, flagged = 0, failed = 0;
      std::string table = "name exit\n";
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        clean += codes[i] == 0;
        flagged += codes[i] == 2;
        failed += codes[i] == 1;
        nlohmann::json row = {{"name", jobs[i].first}, {"exit", codes[i]}};
        if (!errors[i].empty()) row["error"] = errors[i];
        rows.push_back(row);
        table += jobs[i].first + " " + std::to_string(codes[i]) + "\n";
      }
      nlohmann::json summary = {{"images", jobs.size()}, {"clean", clean}, {"flagged", flagged}, {"failed", failed},
                                {"config", cfg.to_text()}, {"results", rows}};
      write_text(fs::path(batch_out) / "summary.json", summary.dump(2) + "\n");
      write_text(fs::path(batch_out) / "summary.txt", table);
      std::cout << "images " << jobs.size() << "  clean " << clean << "  flagged " << flagged << "  failed " << failed
                << "\n";
      return failed ? 1 : flagged ? 2 : 0;
    }

    if (*ev) {
      Config cfg = ev_cfg.build();
      EvalReport rep = evaluate_corpus(ev_corpus, ev_pred, cfg.iou_threshold);
      fs::path out = ev_out.empty() ? fs::path(ev_pred) : fs::path(ev_out);
      fs::create_directories(out);
      std::string text = report_text(rep);
      write_text(out / "report.json", report_json(rep, cfg.to_text()));
      write_text(out / "report.txt", text);
      std::cout << text;
      return 0;
    }

    if (*syn) {
      for (int k = 0; k < syn_count; ++k) {
        std::uint64_t seed = syn_seed + static_cast<std::uint64_t>(k);
        DegradeOptions d = syn_degrade ? corpus_degradation(seed) : DegradeOptions{};
        if (syn_gaps) d.gaps = syn_gaps;
        if (syn_cut >= 0) d.cut_wire = syn_cut;
        if (!syn_drop.empty()) d.drop_value_of = syn_drop;
        if (syn_brightness) d.brightness = syn_brightness;
        if (syn_flip) d.flip = true;
        if (syn_scale > 1) d.scale = syn_scale;
        int n = syn_n ? syn_n : corpus_components(seed);
        write_golden(fs::path(syn_out) / std::to_string(seed), synthesize(seed, n, d));
      }
      return 0;
    }

    if (*srv) {
      ReviewServer server(srv_root, srv_cfg.build());
      int port = server.bind(srv_host, srv_port);
      std::cout << "serving " << server.store().ids().size() << " jobs on http://" << srv_host << ":" << port << "\n"
                << std::flush;
      server.listen();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << stage_of(e) << ": " << e.what() << "\n";
    return 1;
  }
  return 1;
}
