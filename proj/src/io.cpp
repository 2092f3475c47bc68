#include "svi/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

namespace svi {

namespace {

using nlohmann::json;

constexpr const char* kInstanceSchema = "svi-instance/1";
constexpr const char* kSolutionSchema = "svi-solution/1";
constexpr const char* kExperimentSchema = "svi-experiment/1";

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
}

void require_schema(const json& j, const char* expected) {
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string())
    throw IoError(std::string("missing schema tag; expected ") + expected);
  const std::string got = j["schema"].get<std::string>();
  if (got != expected)
    throw IoError("schema mismatch: expected " + std::string(expected) + ", got " + got);
}

const json& field(const json& j, const char* name) {
  if (!j.contains(name)) throw IoError(std::string("missing field: ") + name);
  return j[name];
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const json& a, const char* what) {
  if (!a.is_array()) throw IoError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (const auto& e : a) {
    if (!e.is_number()) throw IoError(std::string(what) + " has a non-numeric entry");
    v[i++] = e.get<double>();
  }
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty())
    throw IoError(std::string(what) + " must be a non-empty array of rows");
  const auto nrows = static_cast<Eigen::Index>(rows.size());
  const auto ncols = static_cast<Eigen::Index>(rows[0].size());
  Matrix m(nrows, ncols);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != ncols)
      throw IoError(std::string(what) + " rows have inconsistent lengths");
    for (Eigen::Index j = 0; j < ncols; ++j) {
      if (!row[j].is_number())
        throw IoError(std::string(what) + " has a non-numeric entry");
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

// Box bounds: null stands for the missing (infinite) bound.
json bound_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isinf(v[i]))
      a.push_back(nullptr);
    else
      a.push_back(v[i]);
  }
  return a;
}

Vector bound_from_json(const json& a, double infinity, const char* what) {
  if (!a.is_array()) throw IoError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (const auto& e : a) {
    if (e.is_null())
      v[i] = infinity;
    else if (e.is_number())
      v[i] = e.get<double>();
    else
      throw IoError(std::string(what) + " entries must be numbers or null");
    ++i;
  }
  return v;
}

json policy_to_json(const PolicyVector& p) {
  json scenarios = json::array();
  for (Eigen::Index s = 0; s < p.values.cols(); ++s)
    scenarios.push_back(vector_to_json(p.values.col(s)));
  return scenarios;
}

PolicyVector policy_from_json(const json& a, const char* what) {
  if (!a.is_array() || a.empty())
    throw IoError(std::string(what) + " must be a non-empty array of scenario columns");
  Vector first = vector_from_json(a[0], what);
  PolicyVector p;
  p.values.resize(first.size(), static_cast<Eigen::Index>(a.size()));
  p.values.col(0) = first;
  for (std::size_t s = 1; s < a.size(); ++s) {
    Vector col = vector_from_json(a[s], what);
    if (col.size() != first.size())
      throw IoError(std::string(what) + " scenario columns have inconsistent lengths");
    p.values.col(static_cast<Eigen::Index>(s)) = col;
  }
  return p;
}

std::string nonempty_csv_field(const std::string& s, const char* what) {
  if (s.empty()) throw IoError(std::string(what) + " must not be empty");
  if (s.find_first_of(",\n\r\"") != std::string::npos)
    throw IoError(std::string(what) + " must not contain commas, quotes or newlines: " + s);
  return s;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) {
    // from_chars does not accept "nan"/"inf" on all standard libraries.
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw IoError(std::string("bad numeric field for ") + what + ": '" + s + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& s, const char* what) {
  Int v{};
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw IoError(std::string("bad integer field for ") + what + ": '" + s + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

constexpr const char* kRunHeader =
    "experiment,cell-id,seed,method,scenarios,m1,m2,r,sigma,outer_iters,"
    "inner_iters_total,wall_ms,stop_quantity,residual,status";

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw IoError("value does not format");
  return std::string(buf, p);
}

std::string instance_to_json(const SviInstance& inst) {
  const ScenarioSpace& space = inst.space;
  json j;
  j["schema"] = kInstanceSchema;

  json& sp = j["space"];
  sp["probabilities"] = vector_to_json(space.probabilities());
  sp["stage_dims"] = space.stage_dims();
  sp["partitions"] = space.info_partitions();

  json& mp = j["mapping"];
  mp["matrices"] = json::array();
  mp["offsets"] = json::array();
  for (int s = 0; s < space.scenario_count(); ++s) {
    mp["matrices"].push_back(matrix_to_json(inst.mapping.matrix(s)));
    mp["offsets"].push_back(vector_to_json(inst.mapping.offset(s)));
  }

  json& cj = j["constraints"];
  const ConstraintFamily& c = inst.constraints;
  switch (c.kind()) {
    case ConstraintKind::Orthant:
      cj["kind"] = "orthant";
      break;
    case ConstraintKind::Box: {
      cj["kind"] = "box";
      cj["lower"] = json::array();
      cj["upper"] = json::array();
      for (int s = 0; s < c.scenario_count(); ++s) {
        cj["lower"].push_back(bound_to_json(c.box_lower()[s]));
        cj["upper"].push_back(bound_to_json(c.box_upper()[s]));
      }
      break;
    }
    case ConstraintKind::CappedPair: {
      cj["kind"] = "capped-pair";
      cj["pairs"] = json::array();
      for (const auto& [a, b] : c.pair_indices()) cj["pairs"].push_back({a, b});
      cj["caps"] = json::array();
      for (int s = 0; s < c.scenario_count(); ++s)
        cj["caps"].push_back(vector_to_json(c.pair_caps()[s]));
      break;
    }
    case ConstraintKind::Custom:
      throw IoError("custom constraint projections cannot be serialized");
  }
  return j.dump(2) + "\n";
}

SviInstance instance_from_json(const std::string& text) {
  const json j = parse_json(text);
  require_schema(j, kInstanceSchema);

  const json& sp = field(j, "space");
  Vector probabilities = vector_from_json(field(sp, "probabilities"), "probabilities");
  std::vector<int> stage_dims;
  std::vector<StagePartition> partitions;
  try {
    stage_dims = field(sp, "stage_dims").get<std::vector<int>>();
    partitions = field(sp, "partitions").get<std::vector<StagePartition>>();
  } catch (const json::exception& e) {
    throw IoError(std::string("bad space description: ") + e.what());
  }
  ScenarioSpace space(std::move(probabilities), std::move(stage_dims),
                      std::move(partitions));

  const json& mp = field(j, "mapping");
  const json& jm = field(mp, "matrices");
  const json& jb = field(mp, "offsets");
  if (!jm.is_array() || !jb.is_array() || jm.size() != jb.size())
    throw IoError("mapping needs parallel 'matrices' and 'offsets' arrays");
  std::vector<Matrix> matrices;
  std::vector<Vector> offsets;
  matrices.reserve(jm.size());
  offsets.reserve(jb.size());
  for (std::size_t s = 0; s < jm.size(); ++s) {
    matrices.push_back(matrix_from_json(jm[s], "mapping matrix"));
    offsets.push_back(vector_from_json(jb[s], "mapping offset"));
  }
  AffineMapping mapping(std::move(matrices), std::move(offsets));

  const json& cj = field(j, "constraints");
  const std::string kind = field(cj, "kind").get<std::string>();
  const int dim = mapping.dim();
  const int scenario_count = space.scenario_count();
  if (kind == "orthant")
    return SviInstance(std::move(space), std::move(mapping),
                       ConstraintFamily::orthant(dim, scenario_count));
  if (kind == "box") {
    const json& jl = field(cj, "lower");
    const json& ju = field(cj, "upper");
    if (!jl.is_array() || !ju.is_array() || jl.size() != ju.size())
      throw IoError("box constraints need parallel 'lower' and 'upper' arrays");
    std::vector<Vector> lower, upper;
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < jl.size(); ++s) {
      lower.push_back(bound_from_json(jl[s], -inf, "box lower bound"));
      upper.push_back(bound_from_json(ju[s], inf, "box upper bound"));
    }
    return SviInstance(std::move(space), std::move(mapping),
                       ConstraintFamily::box(std::move(lower), std::move(upper)));
  }
  if (kind == "capped-pair") {
    std::vector<std::pair<int, int>> pairs;
    try {
      pairs = field(cj, "pairs").get<std::vector<std::pair<int, int>>>();
    } catch (const json::exception& e) {
      throw IoError(std::string("bad pair list: ") + e.what());
    }
    const json& jc = field(cj, "caps");
    if (!jc.is_array()) throw IoError("'caps' must be an array");
    std::vector<Vector> caps;
    for (const auto& e : jc) caps.push_back(vector_from_json(e, "pair caps"));
    return SviInstance(std::move(space), std::move(mapping),
                       ConstraintFamily::capped_pairs(dim, std::move(pairs),
                                                      std::move(caps)));
  }
  throw IoError("unknown constraint kind: " + kind);
}

std::string solution_to_json(const PolicyVector& x, const PolicyVector& w) {
  json j;
  j["schema"] = kSolutionSchema;
  j["x"] = policy_to_json(x);
  j["w"] = policy_to_json(w);
  return j.dump(2) + "\n";
}

std::pair<PolicyVector, PolicyVector> solution_from_json(const std::string& text) {
  const json j = parse_json(text);
  require_schema(j, kSolutionSchema);
  PolicyVector x = policy_from_json(field(j, "x"), "x");
  PolicyVector w = policy_from_json(field(j, "w"), "w");
  if (x.values.rows() != w.values.rows() || x.values.cols() != w.values.cols())
    throw IoError("x and w have different shapes");
  return {std::move(x), std::move(w)};
}

std::string experiment_to_json(const ExperimentConfig& config) {
  json j;
  j["schema"] = kExperimentSchema;
  j["kind"] = to_string(config.kind);
  j["name"] = config.name;
  j["scenario_counts"] = config.scenario_counts;
  j["dims"] = config.dims;
  j["r_offsets"] = config.r_offsets;
  j["methods"] = json::array();
  for (SubsolverMethod m : config.methods) j["methods"].push_back(to_string(m));
  j["sigma"] = config.sigma;
  j["stop_tol"] = config.stop_tol;
  j["repetitions"] = config.repetitions;
  j["master_seed"] = config.master_seed;
  j["max_outer_iters"] = config.max_outer_iters;
  j["max_inner_iters"] = config.max_inner_iters;
  j["threads"] = config.threads;
  json& r = j["ranges"];
  r["alpha1"] = config.ranges.alpha1;
  r["a1"] = config.ranges.a1;
  r["c1"] = config.ranges.c1;
  r["alpha2"] = config.ranges.alpha2;
  r["a2"] = config.ranges.a2;
  r["c2"] = config.ranges.c2;
  r["cap"] = config.ranges.cap;
  r["min_probability"] = config.ranges.min_probability;
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_from_json(const std::string& text) {
  const json j = parse_json(text);
  require_schema(j, kExperimentSchema);
  ExperimentConfig c;
  try {
    c.kind = experiment_kind_from_string(field(j, "kind").get<std::string>());
    c.name = field(j, "name").get<std::string>();
    c.scenario_counts = field(j, "scenario_counts").get<std::vector<int>>();
    c.dims = field(j, "dims").get<std::vector<std::pair<int, int>>>();
    c.r_offsets = field(j, "r_offsets").get<std::vector<double>>();
    c.methods.clear();
    for (const auto& m : field(j, "methods"))
      c.methods.push_back(method_from_string(m.get<std::string>()));
    c.sigma = field(j, "sigma").get<double>();
    c.stop_tol = field(j, "stop_tol").get<double>();
    c.repetitions = field(j, "repetitions").get<int>();
    c.master_seed = field(j, "master_seed").get<std::uint64_t>();
    c.max_outer_iters = field(j, "max_outer_iters").get<long long>();
    c.max_inner_iters = field(j, "max_inner_iters").get<long long>();
    c.threads = field(j, "threads").get<int>();
    if (j.contains("ranges")) {
      const json& r = j["ranges"];
      c.ranges.alpha1 = field(r, "alpha1").get<std::array<double, 2>>();
      c.ranges.a1 = field(r, "a1").get<std::array<double, 2>>();
      c.ranges.c1 = field(r, "c1").get<std::array<double, 2>>();
      c.ranges.alpha2 = field(r, "alpha2").get<std::array<double, 2>>();
      c.ranges.a2 = field(r, "a2").get<std::array<double, 2>>();
      c.ranges.c2 = field(r, "c2").get<std::array<double, 2>>();
      c.ranges.cap = field(r, "cap").get<std::array<double, 2>>();
      c.ranges.min_probability = field(r, "min_probability").get<double>();
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("bad experiment description: ") + e.what());
  }
  return c;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return buf.str();
}

std::string history_to_csv(const std::vector<IterationRecord>& history) {
  std::string out =
      "k,stop_quantity,stop_quantity_minus,alt_stop_quantity,direction_norm,"
      "delta_norm,sigma,alpha,tau,inner_iterations,certificate_retries,"
      "fallback_sweeps,inner_target,nonanticipativity_error,multiplier_error,"
      "natural_residual\n";
  for (const IterationRecord& r : history) {
    out += std::to_string(r.k);
    out += ',';
    out += format_double(r.stop_quantity);
    out += ',';
    out += format_double(r.stop_quantity_minus);
    out += ',';
    out += format_double(r.alt_stop_quantity);
    out += ',';
    out += format_double(r.direction_norm);
    out += ',';
    out += format_double(r.delta_norm);
    out += ',';
    out += format_double(r.sigma);
    out += ',';
    out += format_double(r.alpha);
    out += ',';
    out += format_double(r.tau);
    out += ',';
    out += std::to_string(r.inner_iterations);
    out += ',';
    out += std::to_string(r.certificate_retries);
    out += ',';
    out += std::to_string(r.fallback_sweeps);
    out += ',';
    out += format_double(r.inner_target);
    out += ',';
    out += format_double(r.nonanticipativity_error);
    out += ',';
    out += format_double(r.multiplier_error);
    out += ',';
    out += format_double(r.natural_residual);
    out += '\n';
  }
  return out;
}

std::string emit_csv(const std::vector<RunRecord>& records) {
  if (records.empty()) throw IoError("refusing to emit a CSV with no run records");
  std::string out = kRunHeader;
  out += '\n';
  for (const RunRecord& r : records) {
    out += nonempty_csv_field(r.experiment, "experiment");
    out += ',';
    out += nonempty_csv_field(r.cell_id, "cell-id");
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += nonempty_csv_field(r.method, "method");
    out += ',';
    out += std::to_string(r.scenarios);
    out += ',';
    out += std::to_string(r.m1);
    out += ',';
    out += std::to_string(r.m2);
    out += ',';
    out += format_double(r.r);
    out += ',';
    out += format_double(r.sigma);
    out += ',';
    out += std::to_string(r.outer_iters);
    out += ',';
    out += std::to_string(r.inner_iters_total);
    out += ',';
    out += format_double(r.wall_ms);
    out += ',';
    out += format_double(r.stop_quantity);
    out += ',';
    out += format_double(r.residual);
    out += ',';
    out += nonempty_csv_field(r.status, "status");
    out += '\n';
  }
  return out;
}

std::vector<RunRecord> parse_run_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty run CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunHeader)
    throw IoError("unexpected run CSV header: '" + line + "'");
  std::vector<RunRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 15)
      throw IoError("line " + std::to_string(lineno) + ": expected 15 fields, got " +
                    std::to_string(f.size()));
    RunRecord r;
    r.experiment = f[0];
    r.cell_id = f[1];
    r.seed = parse_int<std::uint64_t>(f[2], "seed");
    r.method = f[3];
    r.scenarios = parse_int<int>(f[4], "scenarios");
    r.m1 = parse_int<int>(f[5], "m1");
    r.m2 = parse_int<int>(f[6], "m2");
    r.r = parse_double(f[7], "r");
    r.sigma = parse_double(f[8], "sigma");
    r.outer_iters = parse_int<long long>(f[9], "outer_iters");
    r.inner_iters_total = parse_int<long long>(f[10], "inner_iters_total");
    r.wall_ms = parse_double(f[11], "wall_ms");
    r.stop_quantity = parse_double(f[12], "stop_quantity");
    r.residual = parse_double(f[13], "residual");
    r.status = f[14];
    out.push_back(std::move(r));
  }
  return out;
}

std::string emit_aggregate_csv(const std::vector<CellAggregate>& aggregates) {
  if (aggregates.empty())
    throw IoError("refusing to emit a CSV with no aggregate records");
  std::string out =
      "cell-id,method,scenarios,m1,m2,r_mean,runs,converged,mean_outer_iters,"
      "mean_inner_iters,mean_wall_ms\n";
  for (const CellAggregate& a : aggregates) {
    out += nonempty_csv_field(a.cell_id, "cell-id");
    out += ',';
    out += nonempty_csv_field(a.method, "method");
    out += ',';
    out += std::to_string(a.scenarios);
    out += ',';
    out += std::to_string(a.m1);
    out += ',';
    out += std::to_string(a.m2);
    out += ',';
    out += format_double(a.r_mean);
    out += ',';
    out += std::to_string(a.runs);
    out += ',';
    out += std::to_string(a.converged);
    out += ',';
    out += format_double(a.mean_outer_iters);
    out += ',';
    out += format_double(a.mean_inner_iters);
    out += ',';
    out += format_double(a.mean_wall_ms);
    out += '\n';
  }
  return out;
}

}  // namespace svi
