#include "asse/app/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "asse/errors.hpp"
#include "asse/sse/document.hpp"

namespace asse::app {

using nlohmann::json;

std::string method_name(Method m) {
  switch (m) {
    case Method::MC: return "MC";
    case Method::ASSE: return "ASSE";
    case Method::SPCE: return "SPCE";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "MC") return Method::MC;
  if (up == "ASSE") return Method::ASSE;
  if (up == "SPCE") return Method::SPCE;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected MC, ASSE or SPCE)");
}

std::vector<Method> parse_method_list(std::string_view list) {
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto end = std::min(list.find(',', pos), list.size());
    auto tok = list.substr(pos, end - pos);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    if (!tok.empty()) {
      const Method m = parse_method(tok);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    pos = end + 1;
  }
  if (out.empty()) throw ConfigError("empty method list");
  return out;
}

uncertainty::RandomVector ExperimentConfig::random_vector() const {
  std::vector<uncertainty::MarginalDistribution> ms;
  for (const auto& in : inputs) ms.push_back(in.marginal);
  return uncertainty::RandomVector(std::move(ms));
}

sse::SseConfig ExperimentConfig::sse_config() const {
  sse::SseConfig c;
  c.n_ref_min = n_ref_min;
  c.k_max = k_max;
  c.fit = fit;
  return c;
}

bool ExperimentConfig::has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::vector<double> float_range(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ConfigError("invalid range");
  std::vector<double> v;
  for (int k = 0;; ++k) {
    const double x = std::round((lo + k * step) * 1e12) / 1e12;
    if (x > hi + 1e-12) break;
    v.push_back(x);
  }
  return v;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void parse_inputs(const json& arr, ExperimentConfig& cfg) {
  if (!arr.is_array()) throw ConfigError("inputs: expected an array");
  cfg.inputs.clear();
  for (std::size_t i = 0; i < arr.size(); ++i) {
    json m = arr[i];
    const std::string where = "inputs[" + std::to_string(i) + "]";
    const auto type = m.at("type").get<std::string>();
    if (type == "gaussian")
      check_keys(m, where, {"name", "type", "mean", "sd"});
    else if (type == "weibull")
      check_keys(m, where, {"name", "type", "scale", "shape"});
    else if (type == "beta")
      check_keys(m, where, {"name", "type", "a", "b"});
    else if (type == "uniform")
      check_keys(m, where, {"name", "type", "lower", "upper"});
    std::string name = m.value("name", "x" + std::to_string(i + 1));
    m.erase("name");
    try {
      cfg.inputs.push_back({name, sse::marginal_from_json(m)});
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

void parse_pce(const json& j, ExperimentConfig& cfg) {
  check_keys(j, "pce", {"orders", "max_order", "q_values", "q_range"});
  if (j.contains("orders") && j.contains("max_order")) throw ConfigError("pce: give either orders or max_order");
  if (j.contains("orders")) cfg.fit.orders = j.at("orders").get<std::vector<int>>();
  if (j.contains("max_order")) {
    const int h = j.at("max_order").get<int>();
    if (h < 0) throw ConfigError("pce: max_order must be >= 0");
    cfg.fit.orders.clear();
    for (int k = 0; k <= h; ++k) cfg.fit.orders.push_back(k);
  }
  if (j.contains("q_values") && j.contains("q_range")) throw ConfigError("pce: give either q_values or q_range");
  if (j.contains("q_values")) cfg.fit.q_values = j.at("q_values").get<std::vector<double>>();
  if (j.contains("q_range")) {
    const auto& r = j.at("q_range");
    check_keys(r, "pce.q_range", {"start", "stop", "step"});
    cfg.fit.q_values = float_range(r.at("start").get<double>(), r.at("stop").get<double>(), r.at("step").get<double>());
  }
  if (cfg.fit.orders.empty() || cfg.fit.q_values.empty()) throw ConfigError("pce: empty (H, q) grid");
  for (int h : cfg.fit.orders)
    if (h < 0) throw ConfigError("pce: negative order");
  for (double q : cfg.fit.q_values)
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("pce: q must lie in (0, 1]");
}

std::vector<std::size_t> parse_n_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<std::size_t>>();
  check_keys(j, "sweep.n_ed", {"start", "stop", "step"});
  const auto lo = j.at("start").get<std::size_t>(), hi = j.at("stop").get<std::size_t>(),
             step = j.at("step").get<std::size_t>();
  if (step == 0 || hi < lo) throw ConfigError("sweep.n_ed: invalid range");
  std::vector<std::size_t> v;
  for (std::size_t n = lo; n <= hi; n += step) v.push_back(n);
  return v;
}

ExperimentConfig from_json(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "config", {"case", "inputs", "mapping", "res", "design", "pce", "sse", "methods", "responses",
                           "report", "sweep", "workers", "output_dir", "description"});
  ExperimentConfig cfg;
  if (!j.contains("case")) throw ConfigError("config: missing 'case'");
  cfg.case_path = j.at("case").get<std::string>();
  if (cfg.case_path.is_relative()) cfg.case_path = base_dir / cfg.case_path;
  if (!j.contains("inputs")) throw ConfigError("config: missing 'inputs'");
  parse_inputs(j.at("inputs"), cfg);

  if (j.contains("mapping")) {
    const auto& m = j.at("mapping");
    check_keys(m, "mapping", {"load_buses"});
    read(m, "load_buses", cfg.mapping.load_buses);
  }
  if (j.contains("res")) {
    const auto& r = j.at("res");
    check_keys(r, "res", {"wind", "pv", "replace_generators"});
    if (r.contains("wind")) {
      const auto& w = r.at("wind");
      check_keys(w, "res.wind", {"cut_in", "rated", "cut_out", "capacity_mw", "bus"});
      read(w, "cut_in", cfg.res.wind.cut_in);
      read(w, "rated", cfg.res.wind.rated);
      read(w, "cut_out", cfg.res.wind.cut_out);
      read(w, "capacity_mw", cfg.res.wind.capacity);
      read(w, "bus", cfg.res.wind.bus);
    }
    if (r.contains("pv")) {
      const auto& p = r.at("pv");
      check_keys(p, "res.pv", {"capacity_mw", "bus"});
      read(p, "capacity_mw", cfg.res.pv.capacity);
      read(p, "bus", cfg.res.pv.bus);
    }
    read(r, "replace_generators", cfg.res.replace_generators);
  }
  if (j.contains("design")) {
    const auto& d = j.at("design");
    check_keys(d, "design", {"n_ed", "n_val", "qmc_skip", "validation_skip"});
    read(d, "n_ed", cfg.n_ed);
    read(d, "n_val", cfg.n_val);
    read(d, "qmc_skip", cfg.qmc_skip);
    read(d, "validation_skip", cfg.validation_skip);
  }
  if (j.contains("pce")) parse_pce(j.at("pce"), cfg);
  if (j.contains("sse")) {
    const auto& s = j.at("sse");
    check_keys(s, "sse", {"n_ref_min", "k_max"});
    read(s, "n_ref_min", cfg.n_ref_min);
    read(s, "k_max", cfg.k_max);
  }
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j.at("methods")) {
      const Method x = parse_method(m.get<std::string>());
      if (!cfg.has(x)) cfg.methods.push_back(x);
    }
    if (cfg.methods.empty()) throw ConfigError("methods: empty list");
  }
  read(j, "responses", cfg.responses);
  if (j.contains("report")) {
    const auto& r = j.at("report");
    check_keys(r, "report", {"quantiles", "cdf_points"});
    read(r, "quantiles", cfg.quantiles);
    read(r, "cdf_points", cfg.cdf_points);
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, "sweep", {"n_ed"});
    if (s.contains("n_ed")) cfg.sweep_n_ed = parse_n_list(s.at("n_ed"));
  }
  read(j, "workers", cfg.workers);
  if (j.contains("output_dir")) {
    cfg.output_dir = j.at("output_dir").get<std::string>();
    if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
  }

  if (cfg.n_ed < 1) throw ConfigError("design.n_ed must be >= 1");
  if (cfg.n_val < cfg.n_ed) throw ConfigError("design.n_val must be >= design.n_ed");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.n_ref_min < 1) throw ConfigError("sse.n_ref_min must be >= 1");
  for (double p : cfg.quantiles)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("report.quantiles must lie in [0, 1]");
  for (std::size_t n : cfg.sweep_n_ed)
    if (n < 1) throw ConfigError("sweep.n_ed entries must be >= 1");
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(), line_of(text, e.byte));
  }
  try {
    return from_json(j, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void validate_config(const ExperimentConfig& cfg, const grid::PowerSystemCase& pcase) {
  if (cfg.inputs.size() != cfg.mapping.dimension())
    throw ConfigError("config declares " + std::to_string(cfg.inputs.size()) + " inputs but the mapping needs " +
                      std::to_string(cfg.mapping.dimension()));
  cfg.res.validate();
  auto need_bus = [&](int bus, const std::string& what) {
    try {
      (void)pcase.bus_index(bus);
    } catch (const std::exception&) {
      throw ConfigError(what + " bus " + std::to_string(bus) + " not found in case '" + pcase.name + "'");
    }
  };
  need_bus(cfg.res.wind.bus, "wind");
  need_bus(cfg.res.pv.bus, "pv");
  for (int b : cfg.mapping.load_buses) need_bus(b, "load");
  if (cfg.n_val < cfg.n_ed) throw ConfigError("design.n_val must be >= design.n_ed");
}

}  // namespace asse::app
