#include "schemnet/serve.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "schemnet/json_io.hpp"

namespace schemnet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::optional<std::string> slurp(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

void spit(const fs::path& p, const std::string& s) {
  fs::path tmp = p;
  tmp += ".tmp";
  write_file(tmp, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  fs::rename(tmp, p);
}

}  // namespace

std::optional<JobInputs> find_job_inputs(const fs::path& dir) {
  JobInputs in;
  in.dir = dir;
  for (const char* name : {"image.png", "image.pgm"})
    if (fs::exists(dir / name)) {
      in.image = dir / name;
      break;
    }
  if (in.image.empty()) return std::nullopt;
  in.detections_json = slurp(dir / "ingest.detections.json");
  in.ocr_json = slurp(dir / "ingest.texts.json");
  return in;
}

std::string_view job_status_name(JobStatus s) {
  switch (s) {
    case JobStatus::Pending: return "pending";
    case JobStatus::Flagged: return "flagged";
    case JobStatus::Complete: return "complete";
  }
  return "";
}

struct JobStore::Job {
  std::string id;
  JobInputs inputs;
  mutable std::mutex write;  // one writer per job
  mutable std::mutex snap;   // guards the two fields below
  std::shared_ptr<const ConvertResult> result;
  std::vector<Override> log;
};

JobStore::JobStore(fs::path root, Config cfg) : root_(std::move(root)), cfg_(std::move(cfg)) {
  if (!fs::is_directory(root_)) throw std::invalid_argument("job directory not found: " + root_.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root_))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    auto in = find_job_inputs(d);
    if (!in) continue;
    auto j = std::make_unique<Job>();
    j->id = d.filename().string();
    j->inputs = std::move(*in);
    if (auto text = slurp(d / "overrides.json")) j->log = compact_overrides(parse_overrides(*text));
    jobs_.push_back(std::move(j));
  }
}

JobStore::~JobStore() = default;

std::vector<std::string> JobStore::ids() const {
  std::vector<std::string> out;
  for (const auto& j : jobs_) out.push_back(j->id);
  return out;
}

bool JobStore::has(const std::string& id) const {
  return std::any_of(jobs_.begin(), jobs_.end(), [&](const auto& j) { return j->id == id; });
}

JobStore::Job& JobStore::job(const std::string& id) const {
  for (const auto& j : jobs_)
    if (j->id == id) return *j;
  throw std::out_of_range("no job " + id);
}

JobStatus JobStore::status(const std::string& id) const {
  Job& j = job(id);
  std::lock_guard lk(j.snap);
  if (!j.result) return JobStatus::Pending;
  return j.result->exit_code() == 0 ? JobStatus::Complete : JobStatus::Flagged;
}

const JobInputs& JobStore::inputs(const std::string& id) const { return job(id).inputs; }

std::vector<Override> JobStore::overrides(const std::string& id) const {
  Job& j = job(id);
  std::lock_guard lk(j.snap);
  return j.log;
}

std::shared_ptr<const ConvertResult> JobStore::run(Job& j) {
  ConvertInput in;
  in.image = load_image_file(j.inputs.image);
  in.detections_json = j.inputs.detections_json;
  in.ocr_json = j.inputs.ocr_json;
  {
    std::lock_guard lk(j.snap);
    in.overrides = j.log;
  }
  auto r = std::make_shared<const ConvertResult>(convert(in, cfg_));
  std::lock_guard lk(j.snap);
  j.result = r;
  return r;
}

std::shared_ptr<const ConvertResult> JobStore::result(const std::string& id) {
  Job& j = job(id);
  {
    std::lock_guard lk(j.snap);
    if (j.result) return j.result;
  }
  std::lock_guard w(j.write);
  {
    std::lock_guard lk(j.snap);
    if (j.result) return j.result;
  }
  return run(j);
}

std::string JobStore::add_overrides(const std::string& id, const std::vector<Override>& batch) {
  Job& j = job(id);
  auto current = result(id);
  std::lock_guard w(j.write);
  // Type changes earlier in the batch apply to later entries.
  ConvertResult view = *current;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::string err = validate_override(batch[i], view);
    if (!err.empty()) return "overrides[" + std::to_string(i) + "]: " + err;
    if (batch[i].action == OverrideAction::SetType)
      for (auto& c : view.components)
        if (component_subject(c.id) == batch[i].target || target_component(batch[i].target) == c.id)
          c.ctype = *parse_type(batch[i].value);
  }
  std::vector<Override> log;
  {
    std::lock_guard lk(j.snap);
    log = j.log;
  }
  log.insert(log.end(), batch.begin(), batch.end());
  log = compact_overrides(log);
  spit(j.inputs.dir / "overrides.json", serialize_overrides(log));
  std::lock_guard lk(j.snap);
  j.log = std::move(log);
  return "";
}

std::shared_ptr<const ConvertResult> JobStore::regenerate(const std::string& id) {
  Job& j = job(id);
  std::lock_guard w(j.write);
  return run(j);
}

namespace {

json job_summary(JobStore& store, const std::string& id) {
  return {{"id", id}, {"status", job_status_name(store.status(id))}, {"href", "/api/jobs/" + id}};
}

json job_detail(JobStore& store, const std::string& id) {
  auto r = store.result(id);
  json j = job_summary(store, id);
  j["image"] = "/api/jobs/" + id + "/image";
  j["width"] = r->dims.width;
  j["height"] = r->dims.height;
  j["scale"] = r->scale;
  j["flipped"] = r->flipped;
  j["components"] = json::parse(serialize_detections(r->components, r->dims))["components"];
  for (std::size_t i = 0; i < r->components.size(); ++i) j["components"][i]["id"] = r->components[i].id;
  j["nets"] = json::parse(serialize_nets(r->nodemap));
  j["texts"] = json::parse(serialize_ocr(r->texts));
  j["flags"] = flags_json(r->flags);
  j["unresolved"] = r->unresolved();
  j["netlist"] = r->netlist ? json(to_spice(*r->netlist)) : json(nullptr);
  if (!r->emission_error.empty()) j["emission_error"] = r->emission_error;
  json ov = json::array();
  for (const auto& o : store.overrides(id)) ov.push_back(override_json(o));
  j["overrides"] = ov;
  return j;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

}  // namespace

struct ReviewServer::Impl {
  JobStore store;
  httplib::Server server;
  std::thread thread;
  Impl(fs::path root, Config cfg) : store(std::move(root), std::move(cfg)) {}
};

ReviewServer::ReviewServer(fs::path root, Config cfg) : impl_(std::make_unique<Impl>(std::move(root), std::move(cfg))) {
  auto& srv = impl_->server;
  JobStore& store = impl_->store;

  srv.Get("/api/jobs", [&store](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& id : store.ids()) list.push_back(job_summary(store, id));
    send_json(res, 200, {{"jobs", list}});
  });

  srv.Get(R"(/api/jobs/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
    std::string id = req.matches[1];
    if (!store.has(id)) return send_error(res, 404, "unknown job " + id);
    send_json(res, 200, job_detail(store, id));
  });

  srv.Get(R"(/api/jobs/([^/]+)/image)", [&store](const httplib::Request& req, httplib::Response& res) {
    std::string id = req.matches[1];
    if (!store.has(id)) return send_error(res, 404, "unknown job " + id);
    auto r = store.result(id);
    auto png = encode_png(to_gray(r->binary));
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  });

  srv.Post(R"(/api/jobs/([^/]+)/overrides)", [&store](const httplib::Request& req, httplib::Response& res) {
    std::string id = req.matches[1];
    if (!store.has(id)) return send_error(res, 404, "unknown job " + id);
    std::vector<Override> batch;
    try {
      batch = parse_overrides(req.body);
    } catch (const IngestError& e) {
      return send_error(res, 422, e.what());
    }
    std::string err = store.add_overrides(id, batch);
    if (!err.empty()) return send_error(res, 422, err);
    json ov = json::array();
    for (const auto& o : store.overrides(id)) ov.push_back(override_json(o));
    send_json(res, 200, {{"accepted", batch.size()}, {"overrides", ov}});
  });

  srv.Post(R"(/api/jobs/([^/]+)/regenerate)", [&store](const httplib::Request& req, httplib::Response& res) {
    std::string id = req.matches[1];
    if (!store.has(id)) return send_error(res, 404, "unknown job " + id);
    auto r = store.regenerate(id);
    json remaining = json::array();
    for (const auto& f : r->flags)
      if (!f.resolved()) remaining.push_back(flag_json(f));
    send_json(res, 200,
              {{"id", id},
               {"status", job_status_name(store.status(id))},
               {"netlist", r->netlist ? json(to_spice(*r->netlist)) : json(nullptr)},
               {"flags", remaining}});
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "internal error");
    }
  });
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void ReviewServer::listen() { impl_->server.listen_after_bind(); }

void ReviewServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ReviewServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

JobStore& ReviewServer::store() { return impl_->store; }

}  // namespace schemnet
