#include "qready/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "qready/decomposer.hpp"
#include "qready/results_json.hpp"
#include "qready/svg.hpp"

namespace qready {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTieTolerance = 1e-14;

const char* kOutcomeColor[] = {"#1f5fbf", "#2e9e44", "#c8322d", "#9a9a9a"};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// File-system friendly label for per-instance output directories.
std::string safe_name(const std::string& name) {
  std::string s = name;
  for (char& c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  if (s.empty() || s == "." || s == "..") s = "instance";
  return s;
}

struct ResolvedInstance {
  std::string name;
  fs::path path;
  std::optional<double> best_known;
};

ResolvedInstance resolve(const std::string& ref, const BenchConfig& cfg) {
  ResolvedInstance r;
  std::error_code ec;
  if (fs::is_regular_file(ref, ec)) {
    r.path = ref;
    r.name = fs::path(ref).stem().string();
  } else {
    r.name = ref;
    std::optional<fs::path> found;
    if (!cfg.instances_dir.empty()) found = locate_instance_file(cfg.instances_dir, ref);
    if (!found) {
      throw std::runtime_error("instance '" + ref + "' not found" +
                               (cfg.instances_dir.empty()
                                    ? std::string()
                                    : " in " + cfg.instances_dir.string()));
    }
    r.path = *found;
  }
  if (const CatalogEntry* e = find_entry(cfg.catalog, r.name)) {
    r.best_known = minimization_reference(*e);
  }
  return r;
}

}  // namespace

const char* to_string(SortKey k) {
  switch (k) {
    case SortKey::relative_delta_energy: return "relative_delta_energy";
    case SortKey::problem_size: return "problem_size";
    case SortKey::problem_density: return "problem_density";
  }
  return "?";
}

SortKey sort_key_from_string(const std::string& s) {
  if (s == "relative_delta_energy" || s == "rde") return SortKey::relative_delta_energy;
  if (s == "problem_size" || s == "size") return SortKey::problem_size;
  if (s == "problem_density" || s == "density") return SortKey::problem_density;
  throw std::invalid_argument("unknown sort key '" + s + "'");
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::win: return "win";
    case Outcome::tie: return "tie";
    case Outcome::loss: return "loss";
    case Outcome::unknown: return "unknown";
  }
  return "?";
}

void BenchConfig::validate() const {
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  if (subsize < 1) throw std::invalid_argument("subsize must be positive");
  if (!std::isfinite(elite_tolerance) || !(elite_tolerance > 0.0)) {
    throw std::invalid_argument("elite tolerance must be finite and positive");
  }
  sampler.validate();
}

std::size_t BenchReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(instances.begin(), instances.end(), [](const auto& r) { return !r.ok(); }));
}

std::size_t select_repeat(const std::vector<RepeatResult>& repeats) {
  if (repeats.empty()) throw std::invalid_argument("select_repeat: no repeats");
  std::size_t best = 0;
  for (std::size_t i = 1; i < repeats.size(); ++i) {
    if (repeats[i].best_energy < repeats[best].best_energy) best = i;
  }
  return best;
}

Classification classify(std::optional<double> reference, double achieved) {
  Classification c;
  if (!reference) return c;
  const double ref = *reference;
  const double diff = ref - achieved;
  if (std::abs(diff) <= kTieTolerance * std::max(1.0, std::abs(ref))) {
    c.relative_delta_energy = 0.0;
    c.outcome = Outcome::tie;
    return c;
  }
  if (ref == 0.0) {
    c.relative_delta_energy = diff;
    c.delta_is_absolute = true;
  } else {
    c.relative_delta_energy = relative_delta_energy(ref, achieved);
  }
  c.outcome = diff > 0.0 ? Outcome::win : Outcome::loss;
  return c;
}

InstanceResult evaluate_instance(const std::string& name, const QuboInstance& q,
                                 std::optional<double> best_known, const BenchConfig& cfg,
                                 const ProgressFn& progress) {
  InstanceResult res;
  res.name = name;
  res.num_variables = q.num_variables();
  res.num_nonzeros = q.num_off_diagonal();
  res.density = q.num_variables() >= 2 ? density(q.num_variables(), q.num_off_diagonal()) : 0.0;
  res.best_known_energy = best_known;

  const fs::path inst_dir = cfg.output_dir.empty() ? fs::path() : cfg.output_dir / safe_name(name);
  if (!inst_dir.empty()) fs::create_directories(inst_dir);

  std::vector<SampleSet> sets;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    SamplerParams p = cfg.sampler;
    p.seed = repeat_seed(cfg.sampler.seed, r);
    SampleSet s;
    if (cfg.decompose) {
      TabuInnerSampler inner(p.seed);
      DecomposeOptions opts;
      opts.subsize = cfg.subsize;
      s = solve_large(q, p, inner, opts);
    } else {
      s = sample(q, p);
    }
    if (s.empty()) throw std::runtime_error("sampler returned no samples");

    RepeatResult rr;
    rr.seed = p.seed;
    rr.best_energy = s.best().energy;
    rr.best_bits = s.best().bits;
    rr.first_found_time = s.first_found_time;
    rr.end_time = s.end_time;
    rr.num_samples = s.samples.size();
    rr.elite_count = elite_filter(s, cfg.elite_tolerance, cfg.sampler.max_samples).size();
    res.repeats.push_back(std::move(rr));

    if (!inst_dir.empty()) {
      write_file(inst_dir / ("repeat-" + std::to_string(r) + ".json"),
                 sample_set_to_json(s, q, name, p).dump() + "\n");
    }
    if (progress) {
      progress(name + " repeat " + std::to_string(r + 1) + "/" + std::to_string(cfg.repeats) +
               " best " + format_double(res.repeats.back().best_energy));
    }
    sets.push_back(std::move(s));
  }

  res.selected_repeat = select_repeat(res.repeats);
  const Classification c = classify(best_known, res.selected().best_energy);
  res.relative_delta_energy = c.relative_delta_energy;
  res.delta_is_absolute = c.delta_is_absolute;
  res.outcome = c.outcome;

  if (!inst_dir.empty()) {
    const AnalyticsBundle b = analyze(sets[res.selected_repeat], cfg.elite_tolerance, cfg.linkage,
                                      cfg.sampler.max_samples);
    write_analytics(b, inst_dir / "diversity", name);
  }
  return res;
}

BenchReport run_benchmark(const BenchConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  std::vector<std::string> names = cfg.instances;
  if (names.empty()) {
    for (const auto& e : cfg.catalog) names.push_back(e.name);
  }

  auto run_one = [&](const std::string& ref) {
    InstanceResult res;
    res.name = ref;
    try {
      const ResolvedInstance ri = resolve(ref, cfg);
      res.name = ri.name;
      const QuboInstance q = load_instance(ri.path, cfg.format, cfg.qubo_sense);
      res = evaluate_instance(ri.name, q, ri.best_known, cfg, progress);
    } catch (const std::exception& e) {
      res.repeats.clear();
      res.error = e.what();
      if (progress) progress(res.name + " failed: " + res.error);
    }
    return res;
  };

  BenchReport report;
  if (cfg.concurrent_instances) {
    std::vector<std::future<InstanceResult>> futures;
    for (const auto& n : names) futures.push_back(std::async(std::launch::async, run_one, n));
    for (auto& f : futures) report.instances.push_back(f.get());
  } else {
    for (const auto& n : names) report.instances.push_back(run_one(n));
  }
  return report;
}

std::vector<std::size_t> sorted_order(const BenchReport& r, SortKey key) {
  std::vector<std::size_t> order(r.instances.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& in = r.instances;
  auto by_name = [&](std::size_t a, std::size_t b) {
    if (in[a].name != in[b].name) return in[a].name < in[b].name;
    return a < b;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    switch (key) {
      case SortKey::relative_delta_energy: {
        const auto& da = in[a].relative_delta_energy;
        const auto& db = in[b].relative_delta_energy;
        if (da.has_value() != db.has_value()) return da.has_value();
        if (da && *da != *db) return *da < *db;
        break;
      }
      case SortKey::problem_size:
        if (in[a].num_variables != in[b].num_variables) return in[a].num_variables < in[b].num_variables;
        break;
      case SortKey::problem_density:
        if (in[a].density != in[b].density) return in[a].density < in[b].density;
        break;
    }
    return by_name(a, b);
  });
  return order;
}

std::string report_csv(const BenchReport& r, SortKey key) {
  std::ostringstream out;
  out << "name,num_variables,num_nonzeros,density,best_known_energy,selected_repeat,best_energy,"
         "relative_delta_energy,classification,first_found_time,end_time,elite_count,num_samples,"
         "status,error\n";
  for (std::size_t idx : sorted_order(r, key)) {
    const InstanceResult& x = r.instances[idx];
    out << csv_field(x.name) << ',' << x.num_variables << ',' << x.num_nonzeros << ','
        << format_double(x.density) << ',' << opt_num(x.best_known_energy) << ',';
    if (x.ok() && !x.repeats.empty()) {
      const RepeatResult& s = x.selected();
      out << x.selected_repeat << ',' << format_double(s.best_energy) << ','
          << opt_num(x.relative_delta_energy) << ',' << to_string(x.outcome) << ','
          << format_double(s.first_found_time) << ',' << format_double(s.end_time) << ','
          << s.elite_count << ',' << s.num_samples << ",ok,\n";
    } else {
      out << ",,,,,,,,failed," << csv_field(x.error) << '\n';
    }
  }
  return out.str();
}

json report_json(const BenchReport& r, SortKey key) {
  json rows = json::array();
  for (std::size_t idx : sorted_order(r, key)) {
    const InstanceResult& x = r.instances[idx];
    json row = {{"name", x.name},
                {"num_variables", x.num_variables},
                {"num_nonzeros", x.num_nonzeros},
                {"density", x.density},
                {"best_known_energy", opt_json(x.best_known_energy)},
                {"status", x.ok() ? "ok" : "failed"}};
    if (!x.ok()) {
      row["error"] = x.error;
    } else {
      json reps = json::array();
      for (const auto& rr : x.repeats) {
        reps.push_back({{"seed", rr.seed},
                        {"best_energy", rr.best_energy},
                        {"best_bits", bits_to_string(rr.best_bits)},
                        {"first_found_time", rr.first_found_time},
                        {"end_time", rr.end_time},
                        {"num_samples", rr.num_samples},
                        {"elite_count", rr.elite_count}});
      }
      row["repeats"] = reps;
      row["selected_repeat"] = x.selected_repeat;
      row["best_energy"] = x.selected().best_energy;
      row["relative_delta_energy"] = opt_json(x.relative_delta_energy);
      row["delta_is_absolute"] = x.delta_is_absolute;
      row["classification"] = to_string(x.outcome);
      row["first_found_time"] = x.selected().first_found_time;
      row["end_time"] = x.selected().end_time;
      row["elite_count"] = x.selected().elite_count;
      row["num_samples"] = x.selected().num_samples;
    }
    rows.push_back(std::move(row));
  }
  return {{"schema_version", kResultsSchemaVersion},
          {"sort_key", to_string(key)},
          {"instances", rows}};
}

double symlog_position(double rde, double max_magnitude, double floor) {
  if (rde == 0.0 || !std::isfinite(rde)) return 0.0;
  const double top = std::max(max_magnitude, floor);
  const double decades = std::log10(top) - std::log10(floor) + 1.0;
  const double m = std::max(std::abs(rde), floor);
  const double pos = (std::log10(m) - std::log10(floor) + 1.0) / decades;
  return std::copysign(std::min(pos, 1.0), rde);
}

namespace {

struct PlotFrame {
  double width, height, left, right, top, bottom;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
  double x_at(std::size_t i, std::size_t count) const {
    return left + plot_w() * (static_cast<double>(i) + 0.5) / static_cast<double>(std::max<std::size_t>(count, 1));
  }
};

void x_labels(SvgWriter& svg, const PlotFrame& f, const BenchReport& r,
              const std::vector<std::size_t>& order) {
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double x = f.x_at(i, order.size());
    const double y = f.height - f.bottom + 8;
    svg.text(x, y, r.instances[order[i]].name, 8, "end",
             "transform=\"rotate(-60 " + SvgWriter::num(x) + " " + SvgWriter::num(y) + ")\"");
  }
}

std::string power_label(int e) { return "1e" + std::to_string(e); }

}  // namespace

std::string render_rde_svg(const BenchReport& r, SortKey key) {
  const auto order = sorted_order(r, key);
  PlotFrame f{std::max(480.0, 60.0 + 14.0 * order.size()), 460, 70, 20, 40, 110};
  SvgWriter svg(f.width, f.height);
  svg.text(f.width / 2, 20, std::string("Relative delta energy, sorted by ") + to_string(key), 13, "middle");

  double max_mag = 1e-14;
  for (std::size_t idx : order) {
    const auto& d = r.instances[idx].relative_delta_energy;
    if (d && std::isfinite(*d)) max_mag = std::max(max_mag, std::abs(*d));
  }
  const int top_exp = static_cast<int>(std::ceil(std::log10(max_mag)));
  max_mag = std::pow(10.0, top_exp);

  const double mid = f.top + f.plot_h() / 2;
  const double half = f.plot_h() / 2;
  svg.rect(f.left, f.top, f.plot_w(), f.plot_h(), "none", "stroke=\"#444\"");

  // Decade gridlines, thinned so at most ~8 labels per half.
  const int decades = top_exp + 14;
  const int step = std::max(1, (decades + 7) / 8);
  for (int e = -14; e <= top_exp; e += step) {
    const double v = std::pow(10.0, e);
    for (double sgn : {1.0, -1.0}) {
      const double y = mid - sgn * half * symlog_position(sgn * v, max_mag);
      svg.line(f.left, y, f.left + f.plot_w(), y, "#dddddd", 0.5);
      svg.text(f.left - 4, y + 3, (sgn < 0 ? "-" : "") + power_label(e), 8, "end");
    }
  }
  svg.line(f.left, mid, f.left + f.plot_w(), mid, "#444", 1);
  svg.text(f.left - 4, mid + 3, "0", 8, "end");

  for (std::size_t i = 0; i < order.size(); ++i) {
    const InstanceResult& x = r.instances[order[i]];
    const double cx = f.x_at(i, order.size());
    if (!x.ok()) {
      svg.text(cx, mid + 3, "x", 10, "middle", "fill=\"#c8322d\"");
      continue;
    }
    if (!x.relative_delta_energy) {
      svg.circle(cx, mid, 3, kOutcomeColor[static_cast<int>(Outcome::unknown)]);
      continue;
    }
    const double y = mid - half * symlog_position(*x.relative_delta_energy, max_mag);
    svg.line(cx, mid, cx, y, "#888", 0.5);
    svg.circle(cx, y, 4, kOutcomeColor[static_cast<int>(x.outcome)]);
  }
  x_labels(svg, f, r, order);

  double lx = f.left;
  for (Outcome o : {Outcome::win, Outcome::tie, Outcome::loss, Outcome::unknown}) {
    svg.circle(lx + 5, f.top - 8, 4, kOutcomeColor[static_cast<int>(o)]);
    svg.text(lx + 12, f.top - 5, to_string(o), 9);
    lx += 70;
  }
  return svg.finish();
}

std::string render_time_svg(const BenchReport& r, SortKey key) {
  const auto order = sorted_order(r, key);
  PlotFrame f{std::max(480.0, 60.0 + 14.0 * order.size()), 420, 70, 20, 40, 110};
  SvgWriter svg(f.width, f.height);
  svg.text(f.width / 2, 20, "First-found and end times of the selected repeat", 13, "middle");

  double tmax = 0.0;
  for (const auto& x : r.instances) {
    if (x.ok() && !x.repeats.empty()) tmax = std::max(tmax, x.selected().end_time);
  }
  if (!(tmax > 0.0)) tmax = 1.0;
  svg.rect(f.left, f.top, f.plot_w(), f.plot_h(), "none", "stroke=\"#444\"");
  auto y_at = [&](double t) { return f.top + f.plot_h() * (1.0 - t / tmax); };
  for (int k = 0; k <= 4; ++k) {
    const double t = tmax * k / 4.0;
    svg.line(f.left, y_at(t), f.left + f.plot_w(), y_at(t), "#dddddd", 0.5);
    svg.text(f.left - 4, y_at(t) + 3, format_double(std::round(t * 1000.0) / 1000.0) + " s", 8, "end");
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const InstanceResult& x = r.instances[order[i]];
    if (!x.ok() || x.repeats.empty()) continue;
    const double cx = f.x_at(i, order.size());
    const double y1 = y_at(x.selected().first_found_time);
    const double y2 = y_at(x.selected().end_time);
    svg.line(cx, y1, cx, y2, "#bbbbbb", 0.8);
    svg.triangle(cx, y1, 8, true, "#1f5fbf");
    svg.triangle(cx, y2, 8, false, "#c8322d");
  }
  x_labels(svg, f, r, order);
  svg.triangle(f.left + 5, f.top - 9, 8, true, "#1f5fbf");
  svg.text(f.left + 12, f.top - 5, "best first found", 9);
  svg.triangle(f.left + 125, f.top - 9, 8, false, "#c8322d");
  svg.text(f.left + 132, f.top - 5, "search stopped", 9);
  return svg.finish();
}

std::string render_elite_svg(const BenchReport& r, SortKey key) {
  const auto order = sorted_order(r, key);
  PlotFrame f{std::max(480.0, 60.0 + 14.0 * order.size()), 420, 70, 20, 40, 110};
  SvgWriter svg(f.width, f.height);
  svg.text(f.width / 2, 20, "Solutions within tolerance of the best energy", 13, "middle");
  std::size_t cmax = 1;
  for (const auto& x : r.instances) {
    if (x.ok() && !x.repeats.empty()) cmax = std::max(cmax, x.selected().elite_count);
  }
  svg.rect(f.left, f.top, f.plot_w(), f.plot_h(), "none", "stroke=\"#444\"");
  auto y_at = [&](double c) { return f.top + f.plot_h() * (1.0 - c / static_cast<double>(cmax)); };
  for (int k = 0; k <= 4; ++k) {
    const double c = static_cast<double>(cmax) * k / 4.0;
    svg.line(f.left, y_at(c), f.left + f.plot_w(), y_at(c), "#dddddd", 0.5);
    svg.text(f.left - 4, y_at(c) + 3, format_double(std::round(c)), 8, "end");
  }
  const double bar = 0.7 * f.plot_w() / static_cast<double>(std::max<std::size_t>(order.size(), 1));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const InstanceResult& x = r.instances[order[i]];
    if (!x.ok() || x.repeats.empty()) continue;
    const double cx = f.x_at(i, order.size());
    const double c = static_cast<double>(x.selected().elite_count);
    svg.rect(cx - bar / 2, y_at(c), bar, f.top + f.plot_h() - y_at(c), "#4a7fb5");
  }
  x_labels(svg, f, r, order);
  return svg.finish();
}

void emit_report(const BenchReport& r, SortKey key, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "report.csv", report_csv(r, key));
  write_file(dir / "report.json", report_json(r, key).dump(2) + "\n");
  for (SortKey k : {SortKey::relative_delta_energy, SortKey::problem_size, SortKey::problem_density}) {
    write_file(dir / (std::string("rde-by-") + to_string(k) + ".svg"), render_rde_svg(r, k));
  }
  write_file(dir / "time-markers.svg", render_time_svg(r, key));
  write_file(dir / "elite-counts.svg", render_elite_svg(r, key));
}

}  // namespace qready
