#include "qready/results_json.hpp"

#include <algorithm>
#include <stdexcept>

namespace qready {

using nlohmann::json;

std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) s[i] = '1';
  }
  return s;
}

SolutionVector bits_from_string(const std::string& s) {
  SolutionVector out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') {
      throw std::invalid_argument("bit string may only contain '0' and '1'");
    }
    out[i] = s[i] == '1';
  }
  return out;
}

json params_to_json(const SamplerParams& p) {
  return {{"time_limit", p.time_limit},
          {"max_samples", p.max_samples},
          {"seed", p.seed},
          {"num_starts", p.num_starts == 0 ? json("auto") : json(p.num_starts)},
          {"tabu_tenure", p.tabu_tenure == 0 ? json("auto") : json(p.tabu_tenure)},
          {"stagnation_restart", p.stagnation_restart},
          {"no_progress_fraction", p.no_progress_fraction},
          {"quality_bias", to_string(p.quality_bias)},
          {"max_moves", p.max_moves}};
}

namespace {

std::size_t auto_or_count(const json& v, const char* field) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return 0;
    throw std::invalid_argument(std::string(field) + " must be a positive integer or \"auto\"");
  }
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
    throw std::invalid_argument(std::string(field) + " must be a positive integer or \"auto\"");
  }
  return v.get<std::size_t>();
}

}  // namespace

SamplerParams params_from_json(const json& j, SamplerParams p) {
  if (!j.is_object()) throw std::invalid_argument("params must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "time_limit") {
        p.time_limit = v.get<double>();
      } else if (key == "max_samples") {
        if (!v.is_number_unsigned()) throw std::invalid_argument("max_samples must be a positive integer");
        p.max_samples = v.get<std::size_t>();
      } else if (key == "seed") {
        p.seed = v.get<std::uint64_t>();
      } else if (key == "num_starts") {
        p.num_starts = auto_or_count(v, "num_starts");
      } else if (key == "tabu_tenure") {
        p.tabu_tenure = auto_or_count(v, "tabu_tenure");
      } else if (key == "stagnation_restart") {
        p.stagnation_restart = v.get<std::size_t>();
      } else if (key == "no_progress_fraction") {
        p.no_progress_fraction = v.get<double>();
      } else if (key == "quality_bias") {
        p.quality_bias = quality_bias_from_string(v.get<std::string>());
      } else if (key == "max_moves") {
        p.max_moves = v.get<std::uint64_t>();
      } else {
        throw std::invalid_argument("unknown sampler parameter '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw std::invalid_argument("bad value for '" + key + "': " + e.what());
    }
  }
  p.validate();
  return p;
}

json instance_summary_json(const QuboInstance& q, const std::string& name) {
  return {{"name", name},
          {"num_variables", q.num_variables()},
          {"num_entries", q.num_entries()},
          {"num_off_diagonal", q.num_off_diagonal()},
          {"density", q.off_diagonal_density()},
          {"sense_of_origin", to_string(q.sense_of_origin())}};
}

json sample_set_to_json(const SampleSet& s, const QuboInstance& q, const std::string& name,
                        const SamplerParams& p) {
  json samples = json::array();
  for (const auto& smp : s.samples) {
    samples.push_back(
        {{"bits", bits_to_string(smp.bits)}, {"energy", smp.energy}, {"found_at", smp.found_at}});
  }
  json trace = json::array();
  for (const auto& t : s.best_energy_trace) trace.push_back({t.time, t.energy});

  json j = {{"schema_version", kResultsSchemaVersion},
            {"instance", instance_summary_json(q, name)},
            {"params", params_to_json(p)},
            {"first_found_time", s.first_found_time},
            {"end_time", s.end_time},
            {"best_energy_trace", trace},
            {"samples", samples}};
  if (!s.empty()) {
    const double best = s.best().energy;
    j["best_energy"] = best;
    j["native_best_energy"] = q.sense_of_origin() == Sense::maximize ? -best : best;
  } else {
    j["best_energy"] = nullptr;
    j["native_best_energy"] = nullptr;
  }
  return j;
}

SampleSet sample_set_from_json(const json& j) {
  try {
    if (!j.is_object()) throw std::invalid_argument("results document must be an object");
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kResultsSchemaVersion) {
      throw std::invalid_argument("unsupported schema_version " + j.at("schema_version").dump());
    }
    SampleSet s;
    std::size_t n = 0;
    for (const auto& item : j.at("samples")) {
      Sample smp;
      smp.bits = bits_from_string(item.at("bits").get<std::string>());
      smp.energy = item.at("energy").get<double>();
      smp.found_at = item.value("found_at", 0.0);
      if (s.samples.empty()) {
        n = smp.bits.size();
      } else if (smp.bits.size() != n) {
        throw std::invalid_argument("samples have inconsistent lengths");
      }
      s.samples.push_back(std::move(smp));
    }
    std::sort(s.samples.begin(), s.samples.end(), sample_less);
    s.first_found_time = j.value("first_found_time", 0.0);
    s.end_time = j.value("end_time", 0.0);
    if (j.contains("best_energy_trace")) {
      for (const auto& t : j.at("best_energy_trace")) {
        s.best_energy_trace.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed results document: ") + e.what());
  }
}

}  // namespace qready
