#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qready/qubo.hpp"

namespace qready {

enum class InstanceFormat { qubo_triplets, maxcut_triplets };

InstanceFormat format_from_string(const std::string& s);
const char* to_string(InstanceFormat f);

/// Malformed instance or catalog input. line() is 1-based, 0 when the error
/// is not tied to a line (e.g. a missing data line at end of input).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads the MQlib triplet format:
///
///   n m
///   i j w      (m lines, 1-based indices)
///
/// '#' comment lines and blank lines are ignored everywhere. qubo_triplets
/// needs i <= j; maxcut_triplets needs i != j (either order) and is converted
/// with from_maxcut. A qubo file may be declared a maximization objective, in
/// which case coefficients are negated on ingest.
QuboInstance parse_instance(std::istream& in, InstanceFormat format,
                            Sense qubo_sense = Sense::minimize);
QuboInstance parse_instance(const std::string& text, InstanceFormat format,
                            Sense qubo_sense = Sense::minimize);
QuboInstance load_instance(const std::filesystem::path& path, InstanceFormat format,
                           Sense qubo_sense = Sense::minimize);

/// Graph-level parse for maxcut files, for callers that need cut values.
MaxCutGraph parse_maxcut_graph(std::istream& in);

/// qubo_triplets text for q, in the minimization convention. Weights use the
/// shortest representation that reads back to the same double.
std::string write_instance(const QuboInstance& q);

struct CatalogEntry {
  std::string name;
  std::size_t num_variables = 0;
  std::size_t num_nonzeros = 0;
  double density = 0.0;
  std::optional<double> best_known_energy;  // in `sense`
  Sense sense = Sense::maximize;
  bool selection_flagged = false;
};

/// CSV with header name,num_variables,num_nonzeros,density,best_known_energy,sense
/// and an optional trailing selection_flagged column. Rows failing the
/// density cross-check (±0.00005) are rejected.
std::vector<CatalogEntry> load_catalog(std::istream& in);
std::vector<CatalogEntry> load_catalog(const std::filesystem::path& path);

const CatalogEntry* find_entry(const std::vector<CatalogEntry>& catalog, const std::string& name);

/// Catalog reference converted to the minimization convention, if any.
std::optional<double> minimization_reference(const CatalogEntry& e);

/// Looks for <dir>/<name>, <dir>/<name>.txt, .qubo, .mc, .gset in that order.
std::optional<std::filesystem::path> locate_instance_file(const std::filesystem::path& dir,
                                                          const std::string& name);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

}  // namespace qready
