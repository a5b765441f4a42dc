#include "gauge_rig/io.hpp"

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace gauge_rig::io {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ParseError("unknown key '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

double require_number(const json& value, const std::string& where) {
  if (!value.is_number()) throw ParseError(where + " must be a number");
  return value.get<double>();
}

std::string require_string(const json& value, const std::string& where) {
  if (!value.is_string()) throw ParseError(where + " must be a string");
  return value.get<std::string>();
}

// Line and column of a byte offset, for parse diagnostics.
std::string locate(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double parse_double(std::string_view s, const std::string& what) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0;
  const auto first = s.data();
  const auto last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ParseError("invalid number '" + std::string(s) + "' in " + what);
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

FrameworkDocument parse_framework(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at " + locate(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("framework document must be a JSON object");
  reject_unknown_keys(doc, {"dimension", "vertices", "edges", "positions"}, "framework document");

  int dimension = 2;
  if (auto it = doc.find("dimension"); it != doc.end()) {
    if (!it->is_number_integer()) throw ParseError("'dimension' must be an integer");
    dimension = it->get<int>();
  }

  const json& vertices = require(doc, "vertices", "framework document");
  if (!vertices.is_array()) throw ParseError("'vertices' must be an array");
  std::vector<std::string> ids;
  std::vector<double> masses;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::string where = "vertices[" + std::to_string(i) + "]";
    const json& v = vertices[i];
    if (!v.is_object()) throw ParseError(where + " must be an object");
    reject_unknown_keys(v, {"id", "mass"}, where);
    ids.push_back(require_string(require(v, "id", where), where + ".id"));
    masses.push_back(require_number(require(v, "mass", where), where + ".mass"));
  }

  const json& edges = require(doc, "edges", "framework document");
  if (!edges.is_array()) throw ParseError("'edges' must be an array");
  std::vector<RodFramework<double>::EdgeSpec> specs;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "edges[" + std::to_string(k) + "]";
    const json& e = edges[k];
    if (!e.is_object()) throw ParseError(where + " must be an object");
    reject_unknown_keys(e, {"ends", "length"}, where);
    const json& ends = require(e, "ends", where);
    if (!ends.is_array() || ends.size() != 2) throw ParseError(where + ".ends must be a pair of vertex ids");
    specs.push_back({require_string(ends[0], where + ".ends[0]"), require_string(ends[1], where + ".ends[1]"),
                     require_number(require(e, "length", where), where + ".length")});
  }

  FrameworkDocument out{RodFramework<double>(ids, masses, specs, dimension), std::nullopt};

  if (auto it = doc.find("positions"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("'positions' must be an object keyed by vertex id");
    PointSet<double> q(out.framework.vertex_count(), dimension);
    std::vector<bool> seen(std::size_t(out.framework.vertex_count()), false);
    for (const auto& [id, value] : it->items()) {
      int v = 0;
      try {
        v = out.framework.vertex_index(id);
      } catch (const InvalidFramework&) {
        throw ParseError("position given for unknown vertex '" + id + "'");
      }
      if (!value.is_array() || int(value.size()) != dimension)
        throw ParseError("position of vertex '" + id + "' must have " + std::to_string(dimension) + " coordinates");
      for (int c = 0; c < dimension; ++c)
        q(v, c) = require_number(value[std::size_t(c)], "position of vertex '" + id + "'");
      seen[std::size_t(v)] = true;
    }
    for (std::size_t v = 0; v < seen.size(); ++v) {
      if (!seen[v]) throw ParseError("missing position for vertex '" + out.framework.vertex_ids()[v] + "'");
    }
    out.configuration = Configuration<double>{std::move(q)};
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FrameworkDocument load_framework(const std::filesystem::path& path) {
  try {
    return parse_framework(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string framework_to_json(const RodFramework<double>& fw, const Configuration<double>* config) {
  json doc;
  doc["dimension"] = fw.dimension();
  json vertices = json::array();
  for (int i = 0; i < fw.vertex_count(); ++i)
    vertices.push_back({{"id", fw.vertex_ids()[std::size_t(i)]}, {"mass", fw.mass(i)}});
  doc["vertices"] = vertices;
  json edges = json::array();
  for (int k = 0; k < fw.edge_count(); ++k) {
    const Edge& e = fw.edge(k);
    edges.push_back({{"ends", {fw.vertex_ids()[std::size_t(e.first)], fw.vertex_ids()[std::size_t(e.second)]}},
                     {"length", fw.rest_length(k)}});
  }
  doc["edges"] = edges;
  if (config) {
    json positions = json::object();
    for (int i = 0; i < fw.vertex_count(); ++i) {
      json row = json::array();
      for (int c = 0; c < fw.dimension(); ++c) row.push_back(config->positions(i, c));
      positions[fw.vertex_ids()[std::size_t(i)]] = row;
    }
    doc["positions"] = positions;
  }
  return doc.dump(2) + "\n";
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ParseError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> trajectory_csv_header(const RodFramework<double>& fw) {
  static constexpr const char* axes[] = {"x", "y", "z"};
  std::vector<std::string> cols{"t"};
  for (const char* prefix : {"q_", "p_"}) {
    for (const auto& id : fw.vertex_ids())
      for (int c = 0; c < fw.dimension(); ++c) cols.push_back(prefix + id + "_" + axes[c]);
  }
  for (int k = 0; k < fw.edge_count(); ++k) cols.push_back("tension_" + fw.edge_label(std::size_t(k)));
  for (const char* c : {"energy", "c1_max", "c2_max", "c3_max"}) cols.push_back(c);
  return cols;
}

std::string trajectory_to_csv(const RodFramework<double>& fw, const Trajectory<double>& traj) {
  std::string out;
  const auto header = trajectory_csv_header(fw);
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const auto& st = traj.states[s];
    out += format_number(traj.times[s]);
    for (const auto* m : {&st.positions(), &st.momenta()}) {
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index c = 0; c < m->cols(); ++c) out += "," + format_number((*m)(i, c));
    }
    for (Eigen::Index k = 0; k < st.tensions().size(); ++k) out += "," + format_number(st.tensions()(k));
    for (double v : {traj.energy[s], traj.c1_max[s], traj.c2_max[s], traj.c3_max[s]}) out += "," + format_number(v);
    out += '\n';
  }
  return out;
}

std::string trajectory_to_json(const RodFramework<double>& fw, const Trajectory<double>& traj) {
  json doc;
  doc["policy"] = traj.policy_name;
  doc["vertices"] = fw.vertex_ids();
  json edges = json::array();
  for (int k = 0; k < fw.edge_count(); ++k) edges.push_back(fw.edge_label(std::size_t(k)));
  doc["edges"] = edges;
  json samples = json::array();
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const auto& st = traj.states[s];
    json q = json::object(), p = json::object(), tension = json::object();
    for (int i = 0; i < fw.vertex_count(); ++i) {
      const auto& id = fw.vertex_ids()[std::size_t(i)];
      q[id] = {st.positions()(i, 0), st.positions()(i, 1)};
      p[id] = {st.momenta()(i, 0), st.momenta()(i, 1)};
    }
    for (int k = 0; k < fw.edge_count(); ++k) tension[fw.edge_label(std::size_t(k))] = st.tensions()(k);
    samples.push_back({{"t", traj.times[s]},
                       {"q", q},
                       {"p", p},
                       {"tension", tension},
                       {"energy", traj.energy[s]},
                       {"c1_max", traj.c1_max[s]},
                       {"c2_max", traj.c2_max[s]},
                       {"c3_max", traj.c3_max[s]}});
  }
  doc["samples"] = samples;
  return doc.dump(1) + "\n";
}

std::vector<TrajectorySample> parse_trajectory(const RodFramework<double>& fw, std::string_view text, Format format) {
  const int n = fw.vertex_count();
  const int ne = fw.edge_count();
  std::vector<TrajectorySample> out;
  if (format == Format::json) {
    json doc;
    try {
      doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      throw ParseError("malformed trajectory JSON at " + locate(text, e.byte == 0 ? 0 : e.byte - 1));
    }
    for (const auto& sample : require(doc, "samples", "trajectory")) {
      PointSet<double> q(n, 2), p(n, 2);
      VectorX<double> tension(ne);
      for (int i = 0; i < n; ++i) {
        const auto& id = fw.vertex_ids()[std::size_t(i)];
        const auto& qi = require(require(sample, "q", "sample"), id.c_str(), "sample.q");
        const auto& pi = require(require(sample, "p", "sample"), id.c_str(), "sample.p");
        for (int c = 0; c < 2; ++c) {
          q(i, c) = require_number(qi[std::size_t(c)], "q");
          p(i, c) = require_number(pi[std::size_t(c)], "p");
        }
      }
      for (int k = 0; k < ne; ++k) {
        const auto label = fw.edge_label(std::size_t(k));
        tension(k) = require_number(require(require(sample, "tension", "sample"), label.c_str(), "sample.tension"),
                                    "tension");
      }
      out.push_back({require_number(require(sample, "t", "sample"), "t"),
                     PhasePoint<double>(std::move(q), std::move(tension), std::move(p))});
    }
    return out;
  }

  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> column;
  const auto header = trajectory_csv_header(fw);
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (column.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) column[std::string(trim(cells[i]))] = i;
      for (const auto& name : header) {
        if (name == "energy" || name.rfind("c", 0) == 0) continue;
        if (!column.count(name)) throw ParseError("trajectory CSV lacks column '" + name + "'");
      }
      continue;
    }
    const std::string where = "trajectory line " + std::to_string(line_no);
    if (cells.size() != column.size()) throw ParseError(where + ": wrong number of cells");
    auto cell = [&](const std::string& name) { return parse_double(trim(cells[column.at(name)]), where); };
    PointSet<double> q(n, 2), p(n, 2);
    VectorX<double> tension(ne);
    static constexpr const char* axes[] = {"x", "y"};
    for (int i = 0; i < n; ++i) {
      const auto& id = fw.vertex_ids()[std::size_t(i)];
      for (int c = 0; c < 2; ++c) {
        q(i, c) = cell("q_" + id + "_" + axes[c]);
        p(i, c) = cell("p_" + id + "_" + axes[c]);
      }
    }
    for (int k = 0; k < ne; ++k) tension(k) = cell("tension_" + fw.edge_label(std::size_t(k)));
    out.push_back({cell("t"), PhasePoint<double>(std::move(q), std::move(tension), std::move(p))});
  }
  if (column.empty()) throw ParseError("trajectory CSV is empty");
  return out;
}

std::string reduced_trajectory_to_csv(const std::vector<double>& times, const std::vector<ReducedState<double>>& states,
                                      const std::vector<double>& energies) {
  std::string out = "t,x,y,theta,p_x,p_y,p_theta,H_R\n";
  for (std::size_t s = 0; s < times.size(); ++s) {
    const auto& r = states[s];
    for (double v : {times[s], r.x, r.y, r.theta, r.p_x, r.p_y, r.p_theta}) out += format_number(v) + ",";
    out += format_number(energies[s]) + "\n";
  }
  return out;
}

GaugePolicy<double> parse_policy(std::string_view raw) {
  const auto spec = trim(raw);
  const std::string name(spec);
  if (spec.empty()) throw ParseError("empty gauge policy");
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    const double c = parse_double(spec, "policy '" + name + "'");
    return GaugePolicy<double>::of_time(name, [c](double) { return c; });
  }
  const auto shape = spec.substr(0, colon);
  const auto args = split(spec.substr(colon + 1), ',');
  std::vector<double> values;
  for (auto a : args) values.push_back(parse_double(trim(a), "policy '" + name + "'"));
  if (shape == "const") {
    if (values.size() != 1) throw ParseError("policy 'const:<c>' takes one value");
    const double c = values[0];
    return GaugePolicy<double>::of_time(name, [c](double) { return c; });
  }
  if (shape == "cos" || shape == "sin") {
    if (values.size() != 2) throw ParseError("policy '" + std::string(shape) + ":<a>,<w>' takes two values");
    const double a = values[0], w = values[1];
    if (shape == "cos") return GaugePolicy<double>::of_time(name, [a, w](double t) { return a * std::cos(w * t); });
    return GaugePolicy<double>::of_time(name, [a, w](double t) { return a * std::sin(w * t); });
  }
  throw ParseError("unknown policy shape '" + std::string(shape) + "' (expected const, cos or sin)");
}

int parse_edge(const RodFramework<double>& fw, std::string_view spec) {
  auto sep = spec.find('-');
  if (sep == std::string_view::npos) sep = spec.find(',');
  if (sep == std::string_view::npos) throw ParseError("edge '" + std::string(spec) + "' must be written a-b");
  const int k = fw.find_edge(std::string(trim(spec.substr(0, sep))), std::string(trim(spec.substr(sep + 1))));
  if (k < 0) throw ParseError("no rod '" + std::string(spec) + "' in the framework");
  return k;
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), std::streamsize(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into '" + path.string() + "'");
  }
}

}  // namespace gauge_rig::io
