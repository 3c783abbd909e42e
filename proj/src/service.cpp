#include "qready/service.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "httplib.h"

#include "qready/analytics.hpp"
#include "qready/results_json.hpp"

namespace qready {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::string new_job_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}() ^
                             static_cast<std::uint64_t>(
                                 std::chrono::steady_clock::now().time_since_epoch().count())};
  std::lock_guard lock(mu);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

bool valid_job_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

void write_atomic(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

json results_payload(const SampleSet& s, const QuboInstance& q, const std::string& name,
                     const SamplerParams& p, double tolerance) {
  json j = sample_set_to_json(s, q, name, p);
  if (s.empty()) return j;
  const AnalyticsBundle b = analyze(s, tolerance, Linkage::average, p.max_samples);
  j["elite_count"] = b.elite.size();
  j["analytics"] = summary_json(b);
  return j;
}

}  // namespace

const char* to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::completed: return "completed";
    case JobState::failed: return "failed";
  }
  return "?";
}

JobState job_state_from_string(const std::string& s) {
  if (s == "queued") return JobState::queued;
  if (s == "running") return JobState::running;
  if (s == "completed") return JobState::completed;
  if (s == "failed") return JobState::failed;
  throw std::invalid_argument("unknown job state '" + s + "'");
}

json JobRecord::to_json(bool with_result) const {
  json j = {{"job_id", job_id},
            {"sequence", sequence},
            {"state", to_string(state)},
            {"submitted_at", submitted_at},
            {"started_at", started_at.empty() ? json(nullptr) : json(started_at)},
            {"finished_at", finished_at.empty() ? json(nullptr) : json(finished_at)},
            {"name", name},
            {"format", qready::to_string(format)},
            {"sense", qready::to_string(sense)},
            {"params", params_to_json(params)},
            {"instance", instance_summary}};
  if (state == JobState::failed) j["error"] = error;
  if (result) {
    j["best_energy"] = result->value("best_energy", json(nullptr));
    j["native_best_energy"] = result->value("native_best_energy", json(nullptr));
    j["num_samples"] = result->contains("samples") ? result->at("samples").size() : 0;
    if (with_result) j["result"] = *result;
  }
  return j;
}

JobRecord JobRecord::from_json(const json& j) {
  JobRecord r;
  r.job_id = j.at("job_id").get<std::string>();
  r.sequence = j.value("sequence", std::uint64_t{0});
  r.state = job_state_from_string(j.at("state").get<std::string>());
  r.submitted_at = j.value("submitted_at", "");
  if (j.contains("started_at") && j["started_at"].is_string()) r.started_at = j["started_at"];
  if (j.contains("finished_at") && j["finished_at"].is_string()) r.finished_at = j["finished_at"];
  r.name = j.value("name", "");
  r.format = format_from_string(j.value("format", "qubo"));
  r.sense = sense_from_string(j.value("sense", "minimize"));
  r.params = params_from_json(j.at("params"));
  r.instance_summary = j.value("instance", json::object());
  if (j.contains("result")) r.result = j.at("result");
  r.error = j.value("error", "");
  return r;
}

JobStore::JobStore(fs::path dir) : dir_(std::move(dir)) {}

void JobStore::put(const JobRecord& r) {
  fs::create_directories(dir_);
  write_atomic(dir_ / (r.job_id + ".json"), r.to_json(true).dump() + "\n");
}

void JobStore::put_instance(const std::string& id, const std::string& text) {
  fs::create_directories(dir_);
  write_atomic(dir_ / (id + ".instance"), text);
}

std::string JobStore::instance_text(const std::string& id) const {
  return read_file(dir_ / (id + ".instance"));
}

std::vector<JobRecord> JobStore::load_all() const {
  std::vector<JobRecord> out;
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    try {
      out.push_back(JobRecord::from_json(json::parse(read_file(entry.path()))));
    } catch (const std::exception&) {
      // A torn or foreign file is skipped rather than taking the service down.
    }
  }
  std::sort(out.begin(), out.end(),
            [](const JobRecord& a, const JobRecord& b) { return a.sequence < b.sequence; });
  return out;
}

Service::Service(ServiceConfig cfg)
    : cfg_(std::move(cfg)), store_(cfg_.data_dir), http_(std::make_unique<httplib::Server>()) {
  if (cfg_.workers == 0) throw std::invalid_argument("worker count must be positive");
  if (cfg_.max_instance_bytes == 0) throw std::invalid_argument("size cap must be positive");
}

Service::~Service() { stop(); }

void Service::start() {
  for (JobRecord& r : store_.load_all()) {
    if (r.state == JobState::running) {
      r.state = JobState::failed;
      r.error = "interrupted by service restart";
      r.finished_at = utc_now();
      store_.put(r);
    }
    next_sequence_ = std::max(next_sequence_, r.sequence + 1);
    if (r.state == JobState::queued) queue_.push_back(r.job_id);
    jobs_[r.job_id] = std::move(r);
  }

  install_routes();
  // Leave headroom over the instance cap for the JSON envelope; oversize
  // instances are still rejected with 413 by the handler.
  http_->set_payload_max_length(cfg_.max_instance_bytes + (1u << 20));
  if (cfg_.port == 0) {
    port_ = http_->bind_to_any_port(cfg_.host);
  } else {
    port_ = http_->bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1;
  }
  if (port_ <= 0) {
    throw std::runtime_error("cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
  }
  for (std::size_t w = 0; w < cfg_.workers; ++w) workers_.emplace_back([this] { worker_loop(); });
  listener_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void Service::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && workers_.empty() && !listener_.joinable()) return;
    stopping_ = true;
  }
  cancel_ = true;
  cv_.notify_all();
  http_->stop();
  if (listener_.joinable()) listener_.join();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  workers_.clear();
}

void Service::wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return stopping_; });
}

std::optional<JobRecord> Service::job(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void Service::update(const JobRecord& r) {
  store_.put(r);
  std::lock_guard lock(mu_);
  jobs_[r.job_id] = r;
}

void Service::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
    }
    run_job(id);
  }
}

void Service::run_job(const std::string& id) {
  JobRecord r;
  {
    std::lock_guard lock(mu_);
    r = jobs_.at(id);
  }
  r.state = JobState::running;
  r.started_at = utc_now();
  update(r);

  try {
    const QuboInstance q = parse_instance(store_.instance_text(id), r.format, r.sense);
    const SampleSet s = sample(q, r.params, cancel_);
    if (cancel_) throw std::runtime_error("interrupted by service shutdown");
    r.result = results_payload(s, q, r.name, r.params, cfg_.elite_tolerance);
    r.state = JobState::completed;
  } catch (const std::exception& e) {
    r.result.reset();
    r.error = e.what();
    r.state = JobState::failed;
  }
  r.finished_at = utc_now();
  update(r);
}

void Service::install_routes() {
  http_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    std::size_t running = 0;
    for (const auto& [id, r] : jobs_) running += r.state == JobState::running;
    send_json(res, 200,
              {{"status", "ok"},
               {"workers", cfg_.workers},
               {"queued", queue_.size()},
               {"running", running},
               {"jobs", jobs_.size()}});
  });

  http_->Post("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    std::string text;
    std::string name = "submitted";
    JobRecord r;
    r.params.time_limit = cfg_.default_time_limit;

    const std::string ctype = req.get_header_value("Content-Type");
    const bool is_json = ctype.find("application/json") != std::string::npos;
    try {
      std::string format = req.has_param("format") ? req.get_param_value("format") : "qubo";
      std::string sense = req.has_param("sense") ? req.get_param_value("sense") : "minimize";
      if (is_json) {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::exception& e) {
          send_error(res, 400, std::string("request body is not valid JSON: ") + e.what());
          return;
        }
        if (!body.is_object()) {
          send_error(res, 400, "request body must be a JSON object");
          return;
        }
        for (const auto& [key, v] : body.items()) {
          if (key != "instance" && key != "catalog" && key != "format" && key != "sense" &&
              key != "params" && key != "name") {
            send_error(res, 400, "unknown field '" + key + "'");
            return;
          }
        }
        format = body.value("format", format);
        sense = body.value("sense", sense);
        if (body.contains("params")) r.params = params_from_json(body["params"], r.params);
        if (body.contains("instance") == body.contains("catalog")) {
          send_error(res, 400, "exactly one of 'instance' or 'catalog' is required");
          return;
        }
        if (body.contains("catalog")) {
          name = body["catalog"].get<std::string>();
          if (!find_entry(cfg_.catalog, name)) {
            send_error(res, 404, "unknown catalog instance '" + name + "'");
            return;
          }
          std::optional<fs::path> path;
          if (!cfg_.instances_dir.empty()) path = locate_instance_file(cfg_.instances_dir, name);
          if (!path) {
            send_error(res, 404, "no instance file for catalog entry '" + name + "'");
            return;
          }
          text = read_file(*path);
        } else {
          text = body["instance"].get<std::string>();
          name = body.value("name", name);
        }
      } else {
        text = req.body;
        if (req.has_param("name")) name = req.get_param_value("name");
      }
      r.format = format_from_string(format);
      r.sense = sense_from_string(sense);
    } catch (const std::exception& e) {
      send_error(res, 400, e.what());
      return;
    }

    if (text.size() > cfg_.max_instance_bytes) {
      send_error(res, 413,
                 "instance is " + std::to_string(text.size()) + " bytes, cap is " +
                     std::to_string(cfg_.max_instance_bytes));
      return;
    }
    try {
      const QuboInstance q = parse_instance(text, r.format, r.sense);
      if (q.num_variables() == 0) throw ParseError(0, "instance has no variables");
      r.instance_summary = instance_summary_json(q, name);
    } catch (const std::exception& e) {
      send_error(res, 400, e.what());
      return;
    }

    r.job_id = new_job_id();
    r.name = name;
    r.state = JobState::queued;
    r.submitted_at = utc_now();
    try {
      store_.put_instance(r.job_id, text);
      std::lock_guard lock(mu_);
      r.sequence = next_sequence_++;
      store_.put(r);
      jobs_[r.job_id] = r;
      queue_.push_back(r.job_id);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
      return;
    }
    cv_.notify_one();
    res.set_header("Location", "/v1/jobs/" + r.job_id);
    send_json(res, 202, {{"job_id", r.job_id}, {"state", "queued"}});
  });

  http_->Get(R"(/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto r = valid_job_id(id) ? job(id) : std::nullopt;
    if (!r) {
      send_error(res, 404, "no job '" + id + "'");
      return;
    }
    send_json(res, 200, r->to_json(false));
  });

  http_->Get(R"(/v1/jobs/([^/]+)/results)",
             [this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               const auto r = valid_job_id(id) ? job(id) : std::nullopt;
               if (!r) {
                 send_error(res, 404, "no job '" + id + "'");
                 return;
               }
               if (r->state != JobState::completed) {
                 json body = {{"error", "job is " + std::string(to_string(r->state))},
                              {"state", to_string(r->state)}};
                 if (r->state == JobState::failed) body["job_error"] = r->error;
                 send_json(res, 409, body);
                 return;
               }
               json body = *r->result;
               body["job_id"] = r->job_id;
               body["state"] = to_string(r->state);
               send_json(res, 200, body);
             });
}

}  // namespace qready
