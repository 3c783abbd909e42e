#pragma once

// Versioned JSON schema for sample sets ("schema_version": 1).
//
//   {
//     "schema_version": 1,
//     "instance": {"name", "num_variables", "num_entries", "num_off_diagonal",
//                  "density", "sense_of_origin"},
//     "params": {...SamplerParams...},
//     "best_energy": <minimization convention>,
//     "native_best_energy": <in the instance's original sense>,
//     "first_found_time", "end_time",
//     "best_energy_trace": [[time, energy], ...],
//     "samples": [{"bits": "0101...", "energy", "found_at"}, ...]
//   }

#include <string>

#include "json.hpp"

#include "qready/qubo.hpp"
#include "qready/sampler.hpp"

namespace qready {

inline constexpr int kResultsSchemaVersion = 1;

std::string bits_to_string(std::span<const std::uint8_t> bits);
/// Throws std::invalid_argument on characters other than '0'/'1'.
SolutionVector bits_from_string(const std::string& s);

nlohmann::json params_to_json(const SamplerParams& p);
/// Applies whichever known fields are present in j on top of `base`.
/// Throws std::invalid_argument on unknown fields or wrong types.
SamplerParams params_from_json(const nlohmann::json& j, SamplerParams base = {});

nlohmann::json instance_summary_json(const QuboInstance& q, const std::string& name);

nlohmann::json sample_set_to_json(const SampleSet& s, const QuboInstance& q,
                                  const std::string& name, const SamplerParams& p);

/// Reads "samples", timing fields and trace. Throws std::invalid_argument on
/// schema violations, including an unsupported schema_version.
SampleSet sample_set_from_json(const nlohmann::json& j);

}  // namespace qready
