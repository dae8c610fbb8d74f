#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "schemnet/config.hpp"
#include "schemnet/pipeline.hpp"

namespace schemnet {

/// Inputs of one review job, read from its directory:
/// image.png or image.pgm, optional ingest.detections.json / ingest.texts.json,
/// and overrides.json (the persisted review log).
struct JobInputs {
  std::filesystem::path dir;
  std::filesystem::path image;
  std::optional<std::string> detections_json;
  std::optional<std::string> ocr_json;
};

std::optional<JobInputs> find_job_inputs(const std::filesystem::path& dir);

enum class JobStatus { Pending, Flagged, Complete };
std::string_view job_status_name(JobStatus s);

class JobStore {
 public:
  JobStore(std::filesystem::path root, Config cfg);
  ~JobStore();

  std::vector<std::string> ids() const;
  bool has(const std::string& id) const;
  JobStatus status(const std::string& id) const;

  // Latest result, running the pipeline first if the job is still pending.
  std::shared_ptr<const ConvertResult> result(const std::string& id);
  std::vector<Override> overrides(const std::string& id) const;
  const JobInputs& inputs(const std::string& id) const;

  // Validates the batch against the current result; appends and persists on success.
  // Returns an error message (empty on success).
  std::string add_overrides(const std::string& id, const std::vector<Override>& batch);
  // Replays the pipeline with all overrides and swaps the result in atomically.
  std::shared_ptr<const ConvertResult> regenerate(const std::string& id);

 private:
  struct Job;
  Job& job(const std::string& id) const;
  std::shared_ptr<const ConvertResult> run(Job& j);

  std::filesystem::path root_;
  Config cfg_;
  std::vector<std::unique_ptr<Job>> jobs_;
};

class ReviewServer {
 public:
  ReviewServer(std::filesystem::path root, Config cfg);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds `host:port` (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void start();   // listen on a background thread
  void stop();

  JobStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace schemnet
