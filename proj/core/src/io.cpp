#include "trapkit/io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace trapkit {

json site_to_json(const Site& s, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(s[i]);
  return a;
}

Site site_from_json(const json& j) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("site must be a coordinate array of length 1.." + std::to_string(kMaxDim));
  }
  Site s;
  for (std::size_t i = 0; i < j.size(); ++i) s[static_cast<int>(i)] = j[i].get<std::int32_t>();
  return s;
}

json to_json(const InverseCdfTable& t) { return json{{"u", t.u}, {"tau", t.tau}}; }

InverseCdfTable inverse_cdf_from_json(const json& j) {
  InverseCdfTable t{j.at("u").get<std::vector<double>>(), j.at("tau").get<std::vector<double>>()};
  t.validate();
  return t;
}

json to_json(const EnvParams& p) {
  json j{{"alpha", p.alpha}, {"d", p.dim}, {"seed", p.seed}};
  j["law"] = p.table ? to_json(*p.table) : json("pareto");
  return j;
}

EnvParams env_params_from_json(const json& j) {
  EnvParams p;
  p.alpha = j.value("alpha", p.alpha);
  p.dim = j.value("d", p.dim);
  p.seed = j.value("seed", p.seed);
  if (j.contains("law")) {
    const json& law = j.at("law");
    if (law.is_string()) {
      if (law.get<std::string>() != "pareto") throw std::invalid_argument("unknown law '" + law.get<std::string>() + "'");
    } else if (law.is_object() && law.contains("constant")) {
      p.table = InverseCdfTable::constant(law.at("constant").get<double>());
    } else {
      p.table = inverse_cdf_from_json(law);
    }
  }
  p.validate();
  return p;
}

json to_json(const DynamicsSpec& s) {
  json j{{"variant", to_string(s.variant)}};
  if (s.variant == Variant::BouchaudA) j["a"] = s.a;
  return j;
}

DynamicsSpec dynamics_from_json(const json& j) {
  DynamicsSpec s;
  s.variant = variant_from_string(j.value("variant", std::string("bouchaud")));
  s.a = s.variant == Variant::BouchaudA ? j.value("a", s.a) : 0.0;
  s.validate();
  return s;
}

json to_json(const EnvWindow& w) {
  json values = json::array();
  for (std::size_t k = 0; k < w.raw().size(); ++k) {
    if (w.masked() && w.offset_of(k) == Site::origin()) {
      values.push_back(nullptr);
    } else {
      values.push_back(w.raw()[k]);
    }
  }
  return json{{"center", site_to_json(w.center(), w.dim())},
              {"radius", w.radius()},
              {"masked", w.masked()},
              {"values", values}};
}

EnvWindow env_window_from_json(const json& j) {
  const Site c = site_from_json(j.at("center"));
  const int dim = static_cast<int>(j.at("center").size());
  std::vector<double> v;
  for (const auto& x : j.at("values")) v.push_back(x.is_null() ? 1.0 : x.get<double>());
  return EnvWindow(dim, c, j.at("radius").get<int>(), j.at("masked").get<bool>(), std::move(v));
}

json to_json(const GreenEstimate& g) {
  json j{{"value", g.value}, {"n", g.box_n}, {"method", to_string(g.method)}, {"residual", g.residual}};
  j["bounds"] = (g.lower && g.upper) ? json::array({*g.lower, *g.upper}) : json(nullptr);
  j["std_error"] = g.std_error;
  j["iterations"] = g.iterations;
  return j;
}

GreenEstimate green_estimate_from_json(const json& j) {
  GreenEstimate g;
  g.value = j.at("value").get<double>();
  g.box_n = j.at("n").get<int>();
  g.method = green_method_from_string(j.at("method").get<std::string>());
  g.residual = j.value("residual", 0.0);
  if (j.contains("bounds") && j.at("bounds").is_array()) {
    g.lower = j.at("bounds")[0].get<double>();
    g.upper = j.at("bounds")[1].get<double>();
  }
  g.std_error = j.value("std_error", 0.0);
  g.iterations = j.value("iterations", 0);
  return g;
}

namespace {

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> number_or_null(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

json to_json(const DeepTrapRecord& r, int dim) {
  json j{{"n", r.n},
         {"site", site_to_json(r.site, dim)},
         {"T", r.discovery_time},
         {"depth", r.depth},
         {"scaled_depth", r.scaled_depth},
         {"l", r.local_time},
         {"visited", r.visited},
         {"e", optional_number(r.excess)},
         {"green_at_trap", optional_number(r.green_at_trap)},
         {"green_bar", optional_number(r.green_bar)}};
  j["env_window"] = r.env_window ? to_json(*r.env_window) : json(nullptr);
  return j;
}

DeepTrapRecord deep_trap_from_json(const json& j) {
  DeepTrapRecord r;
  r.n = j.at("n").get<std::size_t>();
  r.site = site_from_json(j.at("site"));
  r.discovery_time = j.at("T").get<double>();
  r.depth = j.at("depth").get<double>();
  r.scaled_depth = j.at("scaled_depth").get<double>();
  r.local_time = j.at("l").get<double>();
  r.visited = j.at("visited").get<bool>();
  r.excess = number_or_null(j, "e");
  r.green_at_trap = number_or_null(j, "green_at_trap");
  r.green_bar = number_or_null(j, "green_bar");
  if (j.contains("env_window") && !j.at("env_window").is_null()) r.env_window = env_window_from_json(j.at("env_window"));
  return r;
}

json to_json(const Verdict& v) {
  json j{{"name", v.name}, {"statistic", v.statistic}, {"threshold", v.threshold}, {"pass", v.pass}};
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  v.name = j.at("name").get<std::string>();
  v.statistic = j.at("statistic").get<double>();
  v.threshold = j.at("threshold").get<double>();
  v.pass = j.at("pass").get<bool>();
  v.note = j.value("note", std::string());
  return v;
}

void write_path_jsonl(std::ostream& os, const PathSample& path, const Environment& env) {
  os << json{{"t", 0.0}, {"site", site_to_json(path.start, path.dim)}, {"tau", env.tau_at(path.start)}}.dump()
     << '\n';
  for (const Jump& j : path.jumps) {
    os << json{{"t", j.time}, {"site", site_to_json(j.site, path.dim)}, {"tau", env.tau_at(j.site)}}.dump() << '\n';
  }
  os << json{{"horizon", path.horizon}}.dump() << '\n';
}

TimeChangedWalk read_path_jsonl(std::istream& is) {
  TimeChangedWalk w;
  std::vector<double> breaks, slopes;
  std::string line;
  bool closed = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.contains("horizon")) {
      w.path.horizon = j.at("horizon").get<double>();
      closed = true;
      break;
    }
    const double t = j.at("t").get<double>();
    const Site s = site_from_json(j.at("site"));
    if (breaks.empty()) {
      w.path.dim = static_cast<int>(j.at("site").size());
      w.path.start = s;
    } else {
      w.path.jumps.push_back({t, s});
    }
    breaks.push_back(t);
    slopes.push_back(j.at("tau").get<double>());
  }
  if (breaks.empty() || !closed) throw std::runtime_error("path stream is empty or lacks its horizon record");
  w.clock = ClockPath(std::move(breaks), std::move(slopes), w.path.horizon);
  return w;
}

}  // namespace trapkit
