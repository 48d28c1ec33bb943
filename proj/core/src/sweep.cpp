#include "ringswarm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "ringswarm/cbc.hpp"
#include "ringswarm/format.hpp"

namespace ringswarm {

using nlohmann::json;

namespace {

[[noreturn]] void bad_spec(const std::string &msg) {
  throw std::invalid_argument("invalid sweep spec: " + msg);
}

std::string opt_text(const std::optional<double> &v) { return v ? format_double(*v) : "NA"; }

}  // namespace

AxisScale parse_axis_scale(std::string_view s) {
  if (s == "linear") return AxisScale::linear;
  if (s == "log") return AxisScale::log;
  bad_spec("scale must be 'linear' or 'log', got '" + std::string(s) + "'");
}

std::string_view to_string(AxisScale s) { return s == AxisScale::log ? "log" : "linear"; }

std::vector<double> make_axis(double lo, double hi, std::size_t count, AxisScale scale) {
  if (count == 0) throw std::invalid_argument("axis count must be >= 1");
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
    throw std::invalid_argument("axis range must be finite with lo <= hi");
  if (scale == AxisScale::log && !(lo > 0.0))
    throw std::invalid_argument("log axis needs a positive lower bound");
  if (count == 1) return {lo};

  std::vector<double> v(count);
  const double last = static_cast<double>(count - 1);
  if (scale == AxisScale::linear) {
    for (std::size_t k = 0; k < count; ++k) v[k] = lo + (hi - lo) * (static_cast<double>(k) / last);
  } else {
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t k = 0; k < count; ++k)
      v[k] = std::pow(10.0, a + (b - a) * (static_cast<double>(k) / last));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

CrRange default_cr_range(Strategy s) {
  switch (s) {
    case Strategy::cbc: return {1e-5, 1e5, AxisScale::log};
    case Strategy::orca: return {0.1, 10.0, AxisScale::log};
    case Strategy::none:
    case Strategy::potential:
    case Strategy::gyro: break;
  }
  return {0.0, 1.0, AxisScale::linear};
}

void SweepSpec::validate() const {
  if (r.empty() || l_r.empty() || c_r.empty() || n.empty()) bad_spec("every axis needs at least one value");
  if (seeds.empty()) bad_spec("at least one seed is required");
  if (base.initial_state) bad_spec("sweeps always start from the spiral initialization");

  if (base.strategy != Strategy::none) {
    const CrRange range = default_cr_range(base.strategy);
    const double slack = 1e-12 * std::max(1.0, range.hi);
    for (double c : c_r) {
      if (c < range.lo - slack || c > range.hi + slack) {
        bad_spec("c_r=" + format_double(c) + " is outside the tested range [" +
                 format_double(range.lo) + ", " + format_double(range.hi) + "] for " +
                 std::string(to_string(base.strategy)));
      }
    }
  }
  for (const auto &job : enumerate_jobs(*this)) job_config(*this, job).validate();
}

namespace {

std::vector<double> parse_axis(const json &node, const char *name, double base_value,
                               std::optional<CrRange> defaults) {
  if (node.is_null()) return {base_value};
  if (node.is_number()) return {node.get<double>()};
  if (node.is_array()) return node.get<std::vector<double>>();
  if (!node.is_object()) bad_spec(std::string("axis '") + name + "' must be a number, list or object");

  for (const auto &[key, _] : node.items()) {
    if (key != "values" && key != "min" && key != "max" && key != "count" && key != "scale")
      bad_spec(std::string("unknown key '") + key + "' in axis '" + name + "'");
  }
  if (node.contains("values")) return node.at("values").get<std::vector<double>>();

  const bool has_range = node.contains("min") && node.contains("max");
  if (!has_range && !defaults) bad_spec(std::string("axis '") + name + "' needs values or min/max");
  const double lo = has_range ? node.at("min").get<double>() : defaults->lo;
  const double hi = has_range ? node.at("max").get<double>() : defaults->hi;
  AxisScale scale = defaults ? defaults->scale : AxisScale::linear;
  if (node.contains("scale")) scale = parse_axis_scale(node.at("scale").get<std::string>());
  const auto count = node.value("count", std::size_t{1});
  return make_axis(lo, hi, count, scale);
}

SimConfig parse_base(const json &b) {
  SimConfig c;
  if (b.is_null()) return c;
  if (!b.is_object()) bad_spec("'base' must be an object");
  SwarmParams &p = c.params;
  bool horizon_given = false;
  for (const auto &[key, v] : b.items()) {
    if (key == "n") p.n = v.get<std::size_t>();
    else if (key == "alpha") p.alpha = v.get<double>();
    else if (key == "beta") p.beta = v.get<double>();
    else if (key == "v0") p.v0 = v.get<double>();
    else if (key == "t_d") p.t_d = v.get<double>();
    else if (key == "r") p.r = v.get<double>();
    else if (key == "l_r") p.l_r = v.get<double>();
    else if (key == "c_r") p.c_r = v.get<double>();
    else if (key == "a_max") p.a_max = v.get<double>();
    else if (key == "strategy") c.strategy = parse_strategy(v.get<std::string>());
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "t_total") {
      c.t_total = v.get<double>();
      horizon_given = true;
    }
    else if (key == "t_measure") c.t_measure = v.get<double>();
    else if (key == "dt_cap") c.dt_cap = v.get<double>();
    else if (key == "record_stride") c.record_stride = v.get<std::size_t>();
    else if (key == "detect_collisions") c.detect_collisions = v.get<bool>();
    else bad_spec("unknown key '" + key + "' in 'base'");
  }
  if (!horizon_given) c.t_total = default_t_total(c.strategy);
  return c;
}

}  // namespace

SweepSpec parse_sweep_spec(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception &e) {
    bad_spec(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) bad_spec("top level must be an object");
  for (const auto &[key, _] : root.items()) {
    if (key != "base" && key != "axes" && key != "seeds") bad_spec("unknown top-level key '" + key + "'");
  }

  SweepSpec spec;
  try {
    spec.base = parse_base(root.value("base", json()));
    const json axes = root.value("axes", json::object());
    if (!axes.is_object()) bad_spec("'axes' must be an object");
    for (const auto &[key, _] : axes.items()) {
      if (key != "r" && key != "l_r" && key != "c_r" && key != "n") bad_spec("unknown axis '" + key + "'");
    }
    const SwarmParams &p = spec.base.params;
    const auto get = [&](const char *k) { return axes.contains(k) ? axes.at(k) : json(); };
    spec.r = parse_axis(get("r"), "r", p.r, std::nullopt);
    spec.l_r = parse_axis(get("l_r"), "l_r", p.l_r, std::nullopt);
    spec.c_r = parse_axis(get("c_r"), "c_r", p.c_r, default_cr_range(spec.base.strategy));
    for (double v : parse_axis(get("n"), "n", static_cast<double>(p.n), std::nullopt)) {
      if (!(v >= 1.0) || v != std::floor(v)) bad_spec("n values must be positive integers");
      spec.n.push_back(static_cast<std::size_t>(v));
    }

    const json seeds = root.value("seeds", json());
    if (seeds.is_null()) {
      spec.seeds = {spec.base.seed};
    } else if (seeds.is_array()) {
      spec.seeds = seeds.get<std::vector<std::uint64_t>>();
    } else if (seeds.is_object()) {
      const auto first = seeds.value("base", std::uint64_t{0});
      const auto count = seeds.value("count", std::uint64_t{1});
      for (std::uint64_t k = 0; k < count; ++k) spec.seeds.push_back(first + k);
    } else {
      bad_spec("'seeds' must be a list or {base, count}");
    }
  } catch (const json::exception &e) {
    bad_spec(e.what());
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) bad_spec("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_spec(ss.str());
}

std::string cell_hash(const CellKey &cell) {
  const std::string text = "r=" + format_double(cell.r) + ";l_r=" + format_double(cell.l_r) +
                           ";c_r=" + format_double(cell.c_r) + ";n=" + std::to_string(cell.n);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  auto res = std::to_chars(buf, buf + 16, h, 16);
  std::string out(buf, res.ptr);
  return std::string(16 - out.size(), '0') + out;
}

std::vector<SweepJob> enumerate_jobs(const SweepSpec &spec) {
  std::vector<SweepJob> jobs;
  jobs.reserve(spec.r.size() * spec.l_r.size() * spec.c_r.size() * spec.n.size() * spec.seeds.size());
  for (double r : spec.r)
    for (double l : spec.l_r)
      for (double c : spec.c_r)
        for (std::size_t n : spec.n)
          for (std::uint64_t s : spec.seeds) jobs.push_back({{r, l, c, n}, s});
  return jobs;
}

SimConfig job_config(const SweepSpec &spec, const SweepJob &job) {
  SimConfig c = spec.base;
  c.params.r = job.cell.r;
  c.params.l_r = job.cell.l_r;
  c.params.c_r = job.cell.c_r;
  c.params.n = job.cell.n;
  c.seed = job.seed;
  c.snapshot_times.clear();
  c.initial_state.reset();
  return c;
}

SweepRecord run_job(const SweepSpec &spec, const SweepJob &job) {
  SweepRecord rec;
  rec.cell = job.cell;
  rec.seed = job.seed;
  try {
    const MetricsSeries m = run(job_config(spec, job));
    rec.lambda = m.lambda;
    rec.mean_fatness = m.mean_fatness;
    rec.mean_tangentness = m.mean_tangentness;
    rec.collisions = m.collisions;
    rec.diagnostics = m.diagnostics;
  } catch (const SimulationAborted &e) {
    rec.error = std::string("aborted: ") + e.what();
  }
  return rec;
}

namespace {

json diagnostics_json(const Diagnostics &d) {
  return {{"qp_infeasible", d.qp_infeasible},       {"brakes", d.brakes},
          {"barrier_breaches", d.barrier_breaches}, {"b_clamps", d.b_clamps},
          {"lp_fallbacks", d.lp_fallbacks},         {"clip_saturations", d.clip_saturations},
          {"degenerate_metrics", d.degenerate_metrics}};
}

Diagnostics diagnostics_from(const json &j) {
  Diagnostics d;
  d.qp_infeasible = j.value("qp_infeasible", std::uint64_t{0});
  d.brakes = j.value("brakes", std::uint64_t{0});
  d.barrier_breaches = j.value("barrier_breaches", std::uint64_t{0});
  d.b_clamps = j.value("b_clamps", std::uint64_t{0});
  d.lp_fallbacks = j.value("lp_fallbacks", std::uint64_t{0});
  d.clip_saturations = j.value("clip_saturations", std::uint64_t{0});
  d.degenerate_metrics = j.value("degenerate_metrics", std::uint64_t{0});
  return d;
}

std::string checkpoint_key(const std::string &hash, std::uint64_t seed) {
  return hash + ':' + std::to_string(seed);
}

std::string checkpoint_line(const SweepRecord &rec) {
  nlohmann::ordered_json j;
  j["cell"] = cell_hash(rec.cell);
  j["seed"] = rec.seed;
  j["r"] = rec.cell.r;
  j["l_r"] = rec.cell.l_r;
  j["c_r"] = rec.cell.c_r;
  j["n"] = rec.cell.n;
  j["lambda"] = rec.lambda ? json(*rec.lambda) : json(nullptr);
  j["mean_fatness"] = rec.mean_fatness;
  j["mean_tangentness"] = rec.mean_tangentness;
  j["collisions"] = rec.collisions;
  j["diagnostics"] = diagnostics_json(rec.diagnostics);
  j["error"] = rec.error;
  return j.dump();
}

// Records keyed by (cell hash, seed). Unparsable lines, typically a final
// line cut short by an interruption, are ignored.
std::unordered_map<std::string, SweepRecord> load_checkpoint(const std::filesystem::path &path) {
  std::unordered_map<std::string, SweepRecord> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      SweepRecord rec;
      rec.seed = j.at("seed").get<std::uint64_t>();
      if (!j.at("lambda").is_null()) rec.lambda = j.at("lambda").get<double>();
      rec.mean_fatness = j.at("mean_fatness").get<double>();
      rec.mean_tangentness = j.at("mean_tangentness").get<double>();
      rec.collisions = j.at("collisions").get<std::uint64_t>();
      rec.diagnostics = diagnostics_from(j.at("diagnostics"));
      rec.error = j.at("error").get<std::string>();
      out[checkpoint_key(j.at("cell").get<std::string>(), rec.seed)] = std::move(rec);
    } catch (const json::exception &) {
      continue;
    }
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const SweepSpec &spec, const SweepOptions &options) {
  spec.validate();
  const std::vector<SweepJob> jobs = enumerate_jobs(spec);

  SweepResult result;
  result.records.resize(jobs.size());
  std::vector<bool> have(jobs.size(), false);

  if (!options.checkpoint.empty() && options.resume && std::filesystem::exists(options.checkpoint)) {
    auto saved = load_checkpoint(options.checkpoint);
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      auto it = saved.find(checkpoint_key(cell_hash(jobs[k].cell), jobs[k].seed));
      if (it == saved.end()) continue;
      SweepRecord rec = it->second;
      rec.cell = jobs[k].cell;
      result.records[k] = std::move(rec);
      have[k] = true;
      ++result.resumed;
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t k = 0; k < jobs.size(); ++k)
    if (!have[k]) pending.push_back(k);

  std::ofstream log;
  if (!options.checkpoint.empty()) {
    log.open(options.checkpoint, options.resume ? std::ios::app : std::ios::trunc);
    if (!log) throw std::runtime_error("cannot open checkpoint " + options.checkpoint.string());
  }

  const std::size_t budget = options.stop_after.value_or(pending.size());
  std::atomic<std::size_t> next{0};
  std::mutex sink;
  std::size_t done = result.resumed;

  auto worker = [&] {
    for (;;) {
      const std::size_t ticket = next.fetch_add(1);
      if (ticket >= pending.size() || ticket >= budget) return;
      const std::size_t k = pending[ticket];
      SweepRecord rec = run_job(spec, jobs[k]);

      const std::lock_guard lock(sink);
      if (log.is_open()) log << checkpoint_line(rec) << '\n' << std::flush;
      result.records[k] = std::move(rec);
      have[k] = true;
      ++result.computed;
      ++done;
      if (options.progress) options.progress(done, jobs.size());
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, pending.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  result.complete = std::all_of(have.begin(), have.end(), [](bool b) { return b; });
  if (!result.complete) {
    std::vector<SweepRecord> partial;
    for (std::size_t k = 0; k < jobs.size(); ++k)
      if (have[k]) partial.push_back(std::move(result.records[k]));
    result.records = std::move(partial);
  }
  return result;
}

std::vector<CellAggregate> aggregate_cells(const std::vector<SweepRecord> &records) {
  std::vector<CellAggregate> cells;
  std::vector<double> lambda_sum;
  std::vector<double> collision_sum;
  std::map<std::string, std::size_t> index;
  for (const auto &rec : records) {
    auto [it, inserted] = index.try_emplace(cell_hash(rec.cell), cells.size());
    if (inserted) {
      cells.push_back({rec.cell, std::nullopt, 0, 0, 0.0});
      lambda_sum.push_back(0.0);
      collision_sum.push_back(0.0);
    }
    const std::size_t k = it->second;
    ++cells[k].seeds_total;
    collision_sum[k] += static_cast<double>(rec.collisions);
    if (rec.lambda) {
      ++cells[k].seeds_ok;
      lambda_sum[k] += *rec.lambda;
    }
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (cells[k].seeds_ok > 0) cells[k].mean_lambda = lambda_sum[k] / static_cast<double>(cells[k].seeds_ok);
    cells[k].mean_collisions = collision_sum[k] / static_cast<double>(cells[k].seeds_total);
  }
  return cells;
}

std::vector<FlatRow> flatten_best_cr(const std::vector<CellAggregate> &cells) {
  std::vector<FlatRow> rows;
  for (const auto &c : cells) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const FlatRow &f) {
      return f.r == c.cell.r && f.l_r == c.cell.l_r && f.n == c.cell.n;
    });
    if (it == rows.end()) {
      rows.push_back({c.cell.r, c.cell.l_r, c.cell.n, std::nullopt, std::nullopt});
      it = std::prev(rows.end());
    }
    if (!c.mean_lambda) continue;
    const double lam = *c.mean_lambda;
    if (!it->best_lambda || lam > *it->best_lambda ||
        (lam == *it->best_lambda && c.cell.c_r < *it->best_c_r)) {
      it->best_lambda = lam;
      it->best_c_r = c.cell.c_r;
    }
  }
  return rows;
}

std::vector<SizeRow> average_over_lr(const std::vector<FlatRow> &flat) {
  std::vector<SizeRow> rows;
  std::vector<double> sums;
  for (const auto &f : flat) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const SizeRow &s) { return s.r == f.r && s.n == f.n; });
    if (it == rows.end()) {
      rows.push_back({f.r, f.n, std::nullopt, 0});
      sums.push_back(0.0);
      it = std::prev(rows.end());
    }
    if (!f.best_lambda) continue;
    const auto k = static_cast<std::size_t>(it - rows.begin());
    sums[k] += *f.best_lambda;
    ++it->count;
  }
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (rows[k].count > 0) rows[k].mean_lambda = sums[k] / static_cast<double>(rows[k].count);
  return rows;
}

std::vector<ScalingRow> scaling_table(const std::vector<CellAggregate> &cells) {
  std::map<std::pair<std::size_t, double>, std::pair<double, std::size_t>> acc;
  for (const auto &c : cells) {
    auto &[sum, count] = acc[{c.cell.n, c.cell.c_r}];
    if (c.mean_lambda) {
      sum += *c.mean_lambda * static_cast<double>(c.seeds_ok);
      count += c.seeds_ok;
    }
  }
  std::vector<ScalingRow> rows;
  for (const auto &[key, v] : acc) {
    ScalingRow row{key.first, key.second, std::nullopt, v.second};
    if (v.second > 0) row.mean_lambda = v.first / static_cast<double>(v.second);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ScalingRow> scaling_study(SweepSpec spec, const SweepOptions &options) {
  if (spec.base.strategy != Strategy::cbc && spec.base.strategy != Strategy::orca)
    bad_spec("the scaling study is defined for cbc and orca only");
  SwarmParams &p = spec.base.params;
  p.r = 0.15;
  p.l_r = 1.0;
  p.alpha = 0.001;
  p.t_d = 2.5;
  p.beta = 1.0;
  p.v0 = 0.12;
  p.a_max = 0.6;
  spec.r = {p.r};
  spec.l_r = {p.l_r};
  const SweepResult result = run_sweep(spec, options);
  return scaling_table(aggregate_cells(result.records));
}

void write_records_csv(std::ostream &out, const std::vector<SweepRecord> &records) {
  out << "r,l_r,c_r,n,seed,lambda,mean_fatness,mean_tangentness,collisions,"
         "qp_infeasible,brakes,barrier_breaches,b_clamps,lp_fallbacks,clip_saturations,"
         "degenerate_metrics,error\n";
  for (const auto &rec : records) {
    const Diagnostics &d = rec.diagnostics;
    std::string err = rec.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << format_double(rec.cell.r) << ',' << format_double(rec.cell.l_r) << ','
        << format_double(rec.cell.c_r) << ',' << rec.cell.n << ',' << rec.seed << ','
        << opt_text(rec.lambda) << ',' << format_double(rec.mean_fatness) << ','
        << format_double(rec.mean_tangentness) << ',' << rec.collisions << ',' << d.qp_infeasible
        << ',' << d.brakes << ',' << d.barrier_breaches << ',' << d.b_clamps << ','
        << d.lp_fallbacks << ',' << d.clip_saturations << ',' << d.degenerate_metrics << ','
        << err << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_field(const std::string &s, const char *what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument(std::string("records csv: bad ") + what + " '" + s + "'");
  return v;
}

}  // namespace

std::vector<SweepRecord> read_records_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("records csv: empty input");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
  for (const char *need : {"r", "l_r", "c_r", "n", "seed", "lambda"}) {
    if (!col.count(need)) throw std::invalid_argument(std::string("records csv: missing column ") + need);
  }
  auto field = [&](const std::vector<std::string> &f, const char *name) -> std::string {
    auto it = col.find(name);
    return it != col.end() && it->second < f.size() ? f[it->second] : std::string();
  };
  auto count = [&](const std::vector<std::string> &f, const char *name) -> std::uint64_t {
    const std::string s = field(f, name);
    return s.empty() ? 0 : parse_field<std::uint64_t>(s, name);
  };

  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    SweepRecord rec;
    rec.cell.r = parse_field<double>(field(f, "r"), "r");
    rec.cell.l_r = parse_field<double>(field(f, "l_r"), "l_r");
    rec.cell.c_r = parse_field<double>(field(f, "c_r"), "c_r");
    rec.cell.n = parse_field<std::size_t>(field(f, "n"), "n");
    rec.seed = parse_field<std::uint64_t>(field(f, "seed"), "seed");
    const std::string lam = field(f, "lambda");
    if (lam != "NA") rec.lambda = parse_field<double>(lam, "lambda");
    if (const auto s = field(f, "mean_fatness"); !s.empty()) rec.mean_fatness = parse_field<double>(s, "mean_fatness");
    if (const auto s = field(f, "mean_tangentness"); !s.empty())
      rec.mean_tangentness = parse_field<double>(s, "mean_tangentness");
    rec.collisions = count(f, "collisions");
    rec.diagnostics.qp_infeasible = count(f, "qp_infeasible");
    rec.diagnostics.brakes = count(f, "brakes");
    rec.diagnostics.barrier_breaches = count(f, "barrier_breaches");
    rec.diagnostics.b_clamps = count(f, "b_clamps");
    rec.diagnostics.lp_fallbacks = count(f, "lp_fallbacks");
    rec.diagnostics.clip_saturations = count(f, "clip_saturations");
    rec.diagnostics.degenerate_metrics = count(f, "degenerate_metrics");
    rec.error = field(f, "error");
    out.push_back(std::move(rec));
  }
  return out;
}

void write_cells_csv(std::ostream &out, const std::vector<CellAggregate> &cells) {
  out << "r,l_r,c_r,n,mean_lambda,seeds_ok,seeds_total,mean_collisions\n";
  for (const auto &c : cells) {
    out << format_double(c.cell.r) << ',' << format_double(c.cell.l_r) << ','
        << format_double(c.cell.c_r) << ',' << c.cell.n << ',' << opt_text(c.mean_lambda) << ','
        << c.seeds_ok << ',' << c.seeds_total << ',' << format_double(c.mean_collisions) << '\n';
  }
}

void write_flat_csv(std::ostream &out, const std::vector<FlatRow> &rows) {
  out << "r,l_r,n,best_lambda,best_c_r\n";
  for (const auto &f : rows) {
    out << format_double(f.r) << ',' << format_double(f.l_r) << ',' << f.n << ','
        << opt_text(f.best_lambda) << ',' << opt_text(f.best_c_r) << '\n';
  }
}

void write_size_csv(std::ostream &out, const std::vector<SizeRow> &rows) {
  out << "r,n,mean_lambda,count\n";
  for (const auto &s : rows) {
    out << format_double(s.r) << ',' << s.n << ',' << opt_text(s.mean_lambda) << ',' << s.count << '\n';
  }
}

void write_scaling_csv(std::ostream &out, const std::vector<ScalingRow> &rows) {
  out << "n,c_r,mean_lambda,seeds_ok\n";
  for (const auto &s : rows) {
    out << s.n << ',' << format_double(s.c_r) << ',' << opt_text(s.mean_lambda) << ','
        << s.seeds_ok << '\n';
  }
}

void write_sweep_summary_json(std::ostream &out, const SweepSpec &spec, const SweepResult &result) {
  const auto cells = aggregate_cells(result.records);
  std::size_t missing = 0;
  for (const auto &rec : result.records)
    if (!rec.lambda) ++missing;

  // Cells whose sensing radius is below the barrier filter's guarantee.
  std::size_t below_bound = 0;
  if (spec.base.strategy == Strategy::cbc) {
    const SwarmParams &p = spec.base.params;
    for (const auto &c : cells) {
      const double need = cbc_min_sensing_radius(c.cell.c_r, p.a_max, 2.0 * p.v0, 2.1 * c.cell.r);
      if (c.cell.l_r < need) ++below_bound;
    }
  }

  Diagnostics total;
  std::uint64_t collisions = 0;
  for (const auto &rec : result.records) {
    total += rec.diagnostics;
    collisions += rec.collisions;
  }

  nlohmann::ordered_json j;
  j["strategy"] = std::string(to_string(spec.base.strategy));
  j["records"] = result.records.size();
  j["cells"] = cells.size();
  j["complete"] = result.complete;
  j["missing_lambda"] = missing;
  j["collisions"] = collisions;
  j["cbc_cells_below_sensing_bound"] = below_bound;
  j["axes"] = {{"r", spec.r}, {"l_r", spec.l_r}, {"c_r", spec.c_r}, {"n", spec.n}};
  j["seeds"] = spec.seeds;
  j["t_total"] = spec.base.t_total;
  j["t_measure"] = spec.base.t_measure;
  j["diagnostics"] = diagnostics_json(total);
  out << j.dump(2) << '\n';
}

}  // namespace ringswarm
