#pragma once

// HTTP job service.
//
//   POST /v1/jobs               submit; 202 {"job_id", "state"}
//   GET  /v1/jobs/{id}          job record without samples
//   GET  /v1/jobs/{id}/results  samples and elite analytics, 409 until completed
//   GET  /v1/health
//
// Submission bodies are either JSON
//   {"instance": "<triplet text>" | "catalog": "<name>",
//    "format": "qubo" | "maxcut", "sense": "minimize" | "maximize",
//    "params": {...sampler overrides...}}
// or the raw triplet text (any non-JSON content type), with format and
// sense taken from query parameters.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "qready/instance_io.hpp"
#include "qready/sampler.hpp"

namespace httplib {
class Server;
}

namespace qready {

enum class JobState { queued, running, completed, failed };

const char* to_string(JobState s);
JobState job_state_from_string(const std::string& s);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 = pick a free port
  std::size_t workers = 1;
  std::size_t max_instance_bytes = 16u << 20;
  std::filesystem::path data_dir = "qready-data";
  double default_time_limit = 1200.0;
  std::vector<CatalogEntry> catalog;
  std::filesystem::path instances_dir;
  double elite_tolerance = 1e-6;
};

struct JobRecord {
  std::string job_id;
  std::uint64_t sequence = 0;  // submission order, keeps FIFO across restarts
  JobState state = JobState::queued;
  std::string submitted_at;
  std::string started_at;
  std::string finished_at;
  std::string name;
  InstanceFormat format = InstanceFormat::qubo_triplets;
  Sense sense = Sense::minimize;
  SamplerParams params;
  nlohmann::json instance_summary;
  std::optional<nlohmann::json> result;  // present iff completed
  std::string error;                     // non-empty iff failed

  nlohmann::json to_json(bool with_result) const;
  static JobRecord from_json(const nlohmann::json& j);
};

/// Directory of <id>.json records (written via temp file + rename) plus the
/// submitted instance text in <id>.instance.
class JobStore {
 public:
  explicit JobStore(std::filesystem::path dir);

  void put(const JobRecord& r);
  void put_instance(const std::string& id, const std::string& text);
  std::string instance_text(const std::string& id) const;
  std::vector<JobRecord> load_all() const;

 private:
  std::filesystem::path dir_;
};

class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Reloads persisted jobs, starts workers and binds the listener. Jobs
  /// found running are marked failed; queued jobs are re-queued in order.
  void start();
  /// Cancels running solves, stops workers and the listener.
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  int port() const { return port_; }

  std::optional<JobRecord> job(const std::string& id) const;

 private:
  void install_routes();
  void worker_loop();
  void run_job(const std::string& id);
  void update(const JobRecord& r);

  ServiceConfig cfg_;
  JobStore store_;
  std::unique_ptr<httplib::Server> http_;
  std::thread listener_;
  std::vector<std::thread> workers_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, JobRecord> jobs_;
  std::deque<std::string> queue_;
  std::uint64_t next_sequence_ = 0;
  bool stopping_ = false;
  std::atomic<bool> cancel_{false};
};

}  // namespace qready
