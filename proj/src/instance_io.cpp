#include "qready/instance_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qready {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

template <typename T>
bool parse_uint(const std::string& tok, T& out) {
  const char* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && p == end;
}

bool parse_real(const std::string& tok, double& out) {
  const char* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && p == end;
}

struct Triplet {
  std::uint32_t i, j;
  double w;
  std::size_t line;
};

struct RawInstance {
  std::size_t n = 0;
  std::vector<Triplet> rows;
};

RawInstance read_triplets(std::istream& in, bool allow_equal, bool require_ordered) {
  RawInstance raw;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::size_t declared = 0;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;

  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const auto tok = split_ws(line);
    if (!have_header) {
      if (tok.size() != 2 || !parse_uint(tok[0], raw.n) || !parse_uint(tok[1], declared)) {
        throw ParseError(lineno, "malformed header, expected \"n m\"");
      }
      if (raw.n == 0) throw ParseError(lineno, "instance must have at least one variable");
      if (raw.n > UINT32_MAX) throw ParseError(lineno, "too many variables");
      have_header = true;
      raw.rows.reserve(std::min<std::size_t>(declared, 1u << 24));
      continue;
    }
    if (raw.rows.size() == declared) {
      throw ParseError(lineno, "declared " + std::to_string(declared) +
                                   " entries, found more");
    }
    std::uint64_t i1 = 0, j1 = 0;
    double w = 0.0;
    if (tok.size() != 3 || !parse_uint(tok[0], i1) || !parse_uint(tok[1], j1) ||
        !parse_real(tok[2], w)) {
      throw ParseError(lineno, "malformed data line, expected \"i j w\"");
    }
    if (i1 < 1 || i1 > raw.n || j1 < 1 || j1 > raw.n) {
      throw ParseError(lineno, "index out of range [1, " + std::to_string(raw.n) + "]");
    }
    if (!std::isfinite(w)) throw ParseError(lineno, "non-finite weight");
    if (!allow_equal && i1 == j1) throw ParseError(lineno, "self-loop not allowed");
    if (require_ordered && i1 > j1) throw ParseError(lineno, "expected i <= j");
    const auto a = static_cast<std::uint32_t>(i1 - 1);
    const auto b = static_cast<std::uint32_t>(j1 - 1);
    const std::pair<std::uint32_t, std::uint32_t> key{std::min(a, b), std::max(a, b)};
    if (!seen.insert(key).second) {
      throw ParseError(lineno, "duplicate pair (" + std::to_string(i1) + ", " +
                                   std::to_string(j1) + ")");
    }
    raw.rows.push_back({key.first, key.second, w, lineno});
  }
  if (!have_header) throw ParseError(lineno, "missing header");
  if (raw.rows.size() != declared) {
    throw ParseError(0, "declared " + std::to_string(declared) + " entries, found " +
                            std::to_string(raw.rows.size()));
  }
  return raw;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

InstanceFormat format_from_string(const std::string& s) {
  if (s == "qubo" || s == "qubo_triplets") return InstanceFormat::qubo_triplets;
  if (s == "maxcut" || s == "maxcut_triplets") return InstanceFormat::maxcut_triplets;
  throw ParseError(0, "unknown instance format '" + s + "'");
}

const char* to_string(InstanceFormat f) {
  return f == InstanceFormat::qubo_triplets ? "qubo" : "maxcut";
}

MaxCutGraph parse_maxcut_graph(std::istream& in) {
  const RawInstance raw = read_triplets(in, false, false);
  std::vector<WeightedEdge> edges;
  edges.reserve(raw.rows.size());
  for (const auto& r : raw.rows) edges.push_back({r.i, r.j, r.w});
  return MaxCutGraph(raw.n, std::move(edges));
}

QuboInstance parse_instance(std::istream& in, InstanceFormat format, Sense qubo_sense) {
  if (format == InstanceFormat::maxcut_triplets) return from_maxcut(parse_maxcut_graph(in));

  const RawInstance raw = read_triplets(in, true, true);
  const double sign = qubo_sense == Sense::maximize ? -1.0 : 1.0;
  std::map<IndexPair, double> entries;
  for (const auto& r : raw.rows) {
    if (r.w != 0.0) entries.emplace(IndexPair{r.i, r.j}, sign * r.w);
  }
  return QuboInstance::from_entries(raw.n, entries, qubo_sense);
}

QuboInstance parse_instance(const std::string& text, InstanceFormat format, Sense qubo_sense) {
  std::istringstream in(text);
  return parse_instance(in, format, qubo_sense);
}

QuboInstance load_instance(const std::filesystem::path& path, InstanceFormat format,
                           Sense qubo_sense) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_instance(in, format, qubo_sense);
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string write_instance(const QuboInstance& q) {
  std::string out = std::to_string(q.num_variables()) + " " + std::to_string(q.num_entries()) + "\n";
  for (const auto& [ij, w] : q.entries()) {
    out += std::to_string(ij.first + 1);
    out += ' ';
    out += std::to_string(ij.second + 1);
    out += ' ';
    out += format_double(w);
    out += '\n';
  }
  return out;
}

std::vector<CatalogEntry> load_catalog(std::istream& in) {
  static const std::vector<std::string> kColumns = {
      "name", "num_variables", "num_nonzeros", "density", "best_known_energy", "sense"};
  std::vector<CatalogEntry> out;
  std::set<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  bool has_flag = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    std::vector<std::string> cells;
    std::stringstream ss(trim(line));
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && trim(line).back() == ',') cells.emplace_back();

    if (!have_header) {
      const bool base = cells.size() >= kColumns.size() &&
                        std::equal(kColumns.begin(), kColumns.end(), cells.begin());
      has_flag = cells.size() == kColumns.size() + 1 && cells.back() == "selection_flagged";
      if (!base || (cells.size() != kColumns.size() && !has_flag)) {
        throw ParseError(lineno, "catalog header mismatch");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != kColumns.size() + (has_flag ? 1 : 0)) {
      throw ParseError(lineno, "wrong number of catalog columns");
    }
    CatalogEntry e;
    e.name = cells[0];
    if (e.name.empty()) throw ParseError(lineno, "empty instance name");
    if (!parse_uint(cells[1], e.num_variables) || !parse_uint(cells[2], e.num_nonzeros) ||
        !parse_real(cells[3], e.density)) {
      throw ParseError(lineno, "malformed numeric column");
    }
    if (!cells[4].empty()) {
      double v = 0.0;
      if (!parse_real(cells[4], v) || !std::isfinite(v)) {
        throw ParseError(lineno, "malformed best_known_energy");
      }
      e.best_known_energy = v;
    }
    try {
      e.sense = sense_from_string(cells[5]);
    } catch (const ModelError& err) {
      throw ParseError(lineno, err.what());
    }
    if (has_flag) {
      if (cells[6] == "1" || cells[6] == "true") {
        e.selection_flagged = true;
      } else if (cells[6] == "0" || cells[6] == "false" || cells[6].empty()) {
        e.selection_flagged = false;
      } else {
        throw ParseError(lineno, "malformed selection_flagged");
      }
    }
    if (e.num_variables < 2 ||
        std::abs(density(e.num_variables, e.num_nonzeros) - e.density) > 0.00005) {
      throw ParseError(lineno, "density of " + e.name + " inconsistent with n and nnz");
    }
    if (!names.insert(e.name).second) throw ParseError(lineno, "duplicate name " + e.name);
    out.push_back(std::move(e));
  }
  if (!have_header) throw ParseError(lineno, "catalog is empty");
  return out;
}

std::vector<CatalogEntry> load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog " + path.string());
  return load_catalog(in);
}

const CatalogEntry* find_entry(const std::vector<CatalogEntry>& catalog, const std::string& name) {
  for (const auto& e : catalog) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::optional<double> minimization_reference(const CatalogEntry& e) {
  if (!e.best_known_energy) return std::nullopt;
  return e.sense == Sense::maximize ? -*e.best_known_energy : *e.best_known_energy;
}

std::optional<std::filesystem::path> locate_instance_file(const std::filesystem::path& dir,
                                                          const std::string& name) {
  for (const char* ext : {"", ".txt", ".qubo", ".mc", ".gset"}) {
    auto p = dir / (name + ext);
    std::error_code ec;
    if (std::filesystem::is_regular_file(p, ec)) return p;
  }
  return std::nullopt;
}

}  // namespace qready
