#include "asse/app/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "asse/errors.hpp"
#include "asse/grid/res.hpp"
#include "asse/sse/document.hpp"

namespace asse::app {

using nlohmann::json;
using uncertainty::SampleMatrix;
using uncertainty::SampleSpace;
namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Experiment

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)),
      case_(grid::load_matpower_case(config_.case_path, &warnings_)),
      rv_(config_.random_vector()) {
  validate_config(config_, case_);
  for (std::size_t g = 0; g < case_.generators.size(); ++g) columns_.push_back("Pg_" + std::to_string(g + 1));
  for (std::size_t g = 0; g < case_.generators.size(); ++g) columns_.push_back("Qg_" + std::to_string(g + 1));
  for (const auto& b : case_.buses) columns_.push_back("V_" + std::to_string(b.id));
  for (const auto& b : case_.buses) columns_.push_back("theta_" + std::to_string(b.id));
  columns_.push_back("objective");

  std::set<std::size_t> seen;
  auto add = [&](std::size_t c) {
    if (seen.insert(c).second) responses_.push_back(c);
  };
  for (const auto& r : config_.responses) {
    const auto exact = std::find(columns_.begin(), columns_.end(), r);
    if (exact != columns_.end()) {
      add(static_cast<std::size_t>(exact - columns_.begin()));
      continue;
    }
    bool group = false;
    if (r == "Pg" || r == "Qg" || r == "V" || r == "theta") {
      for (std::size_t c = 0; c < columns_.size(); ++c)
        if (columns_[c].rfind(r + "_", 0) == 0) {
          add(c);
          group = true;
        }
    }
    if (!group) throw ConfigError("unknown response '" + r + "'");
  }
  if (responses_.empty()) throw ConfigError("no responses configured");
}

std::vector<std::string> Experiment::response_names() const {
  std::vector<std::string> out;
  for (std::size_t c : responses_) out.push_back(columns_[c]);
  return out;
}

std::vector<double> Experiment::outputs(const grid::OpfSolution& sol) const {
  std::vector<double> out;
  out.reserve(columns_.size());
  out.insert(out.end(), sol.pg.begin(), sol.pg.end());
  out.insert(out.end(), sol.qg.begin(), sol.qg.end());
  for (Eigen::Index i = 0; i < sol.voltage.vm.size(); ++i) out.push_back(sol.voltage.vm(i));
  for (Eigen::Index i = 0; i < sol.voltage.va.size(); ++i) out.push_back(sol.voltage.va(i));
  out.push_back(sol.objective);
  if (out.size() != columns_.size()) throw ShapeError("OPF solution does not match the case layout");
  return out;
}

// ---------------------------------------------------------------------------
// Batch OPF

std::size_t BatchResult::converged() const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), grid::OpfStatus::Converged));
}

std::vector<Eigen::Index> BatchResult::converged_rows(std::size_t n) const {
  n = std::min(n, status.size());
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < n; ++i)
    if (status[i] == grid::OpfStatus::Converged) rows.push_back(static_cast<Eigen::Index>(i));
  return rows;
}

BatchResult evaluate_batch(const Experiment& exp, std::size_t n, std::uint64_t skip, std::size_t workers,
                           const ProgressFn& progress) {
  const auto& cfg = exp.config();
  const std::size_t m = cfg.inputs.size();
  SampleMatrix unit = n > 0 ? uncertainty::sample_qmc(n, m, skip)
                            : SampleMatrix(Eigen::MatrixXd(0, static_cast<Eigen::Index>(m)), SampleSpace::Unit);
  SampleMatrix phys = uncertainty::to_physical(unit, exp.random_vector());

  const auto ncol = static_cast<Eigen::Index>(exp.output_columns().size());
  Eigen::MatrixXd outputs = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), ncol,
                                                      std::numeric_limits<double>::quiet_NaN());
  std::vector<grid::OpfStatus> status(n, grid::OpfStatus::InfeasibleOrMaxIter);
  std::vector<std::size_t> clamped(n, 0);
  std::vector<std::exception_ptr> errors(n);

  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  auto solve_one = [&](std::size_t i) {
    std::vector<double> zeta(m);
    for (std::size_t j = 0; j < m; ++j)
      zeta[j] = phys(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    grid::ApplyDiagnostics diag;
    const auto sample_case = grid::apply_uncertainty(exp.base_case(), cfg.res, cfg.mapping, zeta, &diag);
    clamped[i] = diag.clamped_loads;
    const auto sol = grid::solve_ac_opf(sample_case);
    status[i] = sol.status;
    if (sol.converged()) {
      const auto row = exp.outputs(sol);
      for (Eigen::Index c = 0; c < ncol; ++c) outputs(static_cast<Eigen::Index>(i), c) = row[static_cast<std::size_t>(c)];
    }
  };
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= n) return;
      try {
        solve_one(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      const std::size_t d = ++done;
      if (progress && (d % 1000 == 0 || d == n)) {
        std::lock_guard lock(progress_mutex);
        progress("  OPF " + std::to_string(d) + "/" + std::to_string(n));
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw std::runtime_error("sample " + std::to_string(i) + ": " + e.what());
      }
    }

  BatchResult out{std::move(unit), std::move(phys), std::move(status), std::move(outputs), 0};
  for (std::size_t c : clamped) out.clamped_loads += c;
  return out;
}

sse::SseTree fit_surrogate(const Experiment& exp, const BatchResult& design, std::size_t n, std::size_t column,
                           Method method) {
  if (method == Method::MC) throw DomainError("fit_surrogate: MC is not a surrogate method");
  const auto rows = design.converged_rows(n);
  if (rows.empty()) throw EmptyDataError("no converged design samples among the first " + std::to_string(n));
  const auto m = design.unit.cols();
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), m);
  Eigen::VectorXd z(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    pts.row(r) = design.unit.points().row(rows[k]);
    z(r) = design.outputs(rows[k], static_cast<Eigen::Index>(column));
  }
  SampleMatrix sm(std::move(pts), SampleSpace::Unit);
  const auto cfg = exp.config().sse_config();
  if (method == Method::SPCE) return sse::init_asse(sm, z, cfg, exp.random_vector());
  return sse::fit_asse(sm, z, cfg, exp.random_vector());
}

// ---------------------------------------------------------------------------
// Output helpers

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class CsvFile {
 public:
  explicit CsvFile(const fs::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }
  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("error writing '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

/// Times named stages; a throwing stage leaves a FAILED marker and becomes a StageError.
class StageRunner {
 public:
  StageRunner(fs::path out_dir, const ProgressFn& progress) : out_(std::move(out_dir)), progress_(progress) {}

  template <class F>
  void run(const std::string& name, F&& f) {
    if (progress_) progress_("[" + name + "]");
    const auto t0 = Clock::now();
    try {
      f();
    } catch (const std::exception& e) {
      fail(name, e.what());
    }
    stages.push_back({name, seconds_since(t0)});
  }

  [[noreturn]] void fail(const std::string& stage, const std::string& message) {
    try {
      fs::create_directories(out_);
      write_text(out_ / "FAILED", "stage: " + stage + "\nerror: " + message + "\n");
    } catch (...) {
    }
    throw StageError(stage, message);
  }

  std::vector<StageTime> stages;

 private:
  fs::path out_;
  const ProgressFn& progress_;
};

std::vector<std::string> zeta_header(std::size_t m) {
  std::vector<std::string> h;
  for (std::size_t j = 0; j < m; ++j) h.push_back("zeta_" + std::to_string(j + 1));
  return h;
}

const char* status_name(grid::OpfStatus s) {
  return s == grid::OpfStatus::Converged ? "converged" : "infeasible";
}

void write_design_csv(const fs::path& path, const Experiment& exp, const BatchResult& b) {
  CsvFile f(path);
  auto header = zeta_header(b.physical.cols());
  header.insert(header.begin(), "sample_id");
  header.push_back("status");
  for (const auto& c : exp.output_columns()) header.push_back(c);
  f.row(header);
  for (Eigen::Index i = 0; i < b.physical.rows(); ++i) {
    std::vector<std::string> r{std::to_string(i)};
    for (Eigen::Index j = 0; j < b.physical.cols(); ++j) r.push_back(format_number(b.physical(i, j)));
    r.push_back(status_name(b.status[static_cast<std::size_t>(i)]));
    for (Eigen::Index c = 0; c < b.outputs.cols(); ++c) r.push_back(format_number(b.outputs(i, c)));
    f.row(r);
  }
  f.close();
}

std::vector<Method> surrogate_methods(const ExperimentConfig& cfg) {
  std::vector<Method> out;
  for (Method m : cfg.methods)
    if (m != Method::MC) out.push_back(m);
  return out;
}

std::string surrogate_file(Method m, const std::string& response) {
  return method_name(m) + "_" + response + ".json";
}

json manifest_base(const std::string& command, const Experiment& exp) {
  json j;
  j["format"] = "asse-run-manifest";
  j["command"] = command;
  j["case"] = exp.config().case_path.string();
  json methods = json::array();
  for (Method m : exp.config().methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  j["responses"] = exp.response_names();
  return j;
}

json stages_json(const std::vector<StageTime>& stages) {
  json arr = json::array();
  for (const auto& s : stages) arr.push_back({{"name", s.name}, {"seconds", s.seconds}});
  return arr;
}

std::vector<double> column_subset(const Eigen::MatrixXd& m, Eigen::Index col, const std::vector<Eigen::Index>& rows) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (Eigen::Index r : rows) v.push_back(m(r, col));
  return v;
}

std::vector<double> subset(const Eigen::VectorXd& x, const std::vector<Eigen::Index>& rows) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (Eigen::Index r : rows) v.push_back(x(r));
  return v;
}

void clear_marker(const fs::path& out) {
  std::error_code ec;
  fs::remove(out / "FAILED", ec);
}

}  // namespace

// ---------------------------------------------------------------------------
// run

RunResult cmd_run(const ExperimentConfig& config, const fs::path& out_dir, const ProgressFn& progress) {
  const auto t_start = Clock::now();
  StageRunner stage(out_dir, progress);
  RunResult result;

  std::optional<Experiment> exp;
  stage.run("setup", [&] {
    fs::create_directories(out_dir);
    clear_marker(out_dir);
    exp.emplace(config);
  });
  const auto& cfg = exp->config();
  const auto resp_names = exp->response_names();
  const auto& resp = exp->responses();
  const auto methods = surrogate_methods(cfg);
  std::vector<std::string> artifacts;

  std::optional<BatchResult> design;
  stage.run("opf_design", [&] {
    design.emplace(evaluate_batch(*exp, cfg.n_ed, cfg.qmc_skip, cfg.workers, progress));
    result.excluded_design = cfg.n_ed - design->converged();
    write_design_csv(out_dir / "design.csv", *exp, *design);
    artifacts.push_back("design.csv");
  });

  // trees[method][response]
  std::vector<std::vector<sse::SseTree>> trees(methods.size());
  stage.run("fit", [&] {
    if (!methods.empty()) fs::create_directories(out_dir / "surrogates");
    for (std::size_t a = 0; a < methods.size(); ++a)
      for (std::size_t k = 0; k < resp.size(); ++k) {
        if (progress) progress("  " + method_name(methods[a]) + " " + resp_names[k]);
        trees[a].push_back(fit_surrogate(*exp, *design, cfg.n_ed, resp[k], methods[a]));
        json doc = sse::to_document(trees[a].back());
        doc["method"] = method_name(methods[a]);
        doc["response"] = resp_names[k];
        const auto name = "surrogates/" + surrogate_file(methods[a], resp_names[k]);
        write_text(out_dir / name, doc.dump(1) + "\n");
        artifacts.push_back(name);
      }
  });

  const bool with_mc = cfg.has(Method::MC);
  std::optional<BatchResult> val;
  stage.run("opf_validation", [&] {
    if (with_mc) {
      val.emplace(evaluate_batch(*exp, cfg.n_val, cfg.validation_skip, cfg.workers, progress));
    } else {
      auto unit = uncertainty::sample_qmc(cfg.n_val, cfg.inputs.size(), cfg.validation_skip);
      auto phys = uncertainty::to_physical(unit, exp->random_vector());
      val.emplace(BatchResult{std::move(unit), std::move(phys), {}, Eigen::MatrixXd(), 0});
    }
    result.excluded_validation = with_mc ? cfg.n_val - val->converged() : 0;
  });

  std::vector<std::vector<Eigen::VectorXd>> pred(methods.size());
  std::size_t clamped_points = 0;
  stage.run("predict", [&] {
    for (std::size_t a = 0; a < methods.size(); ++a)
      for (std::size_t k = 0; k < resp.size(); ++k) {
        auto ev = sse::evaluate_sse(trees[a][k], val->unit.points());
        clamped_points += ev.clamped;
        pred[a].push_back(std::move(ev.values));
      }
    CsvFile f(out_dir / "validation.csv");
    auto header = zeta_header(cfg.inputs.size());
    header.insert(header.begin(), "sample_id");
    if (with_mc) {
      header.push_back("status");
      for (const auto& r : resp_names) header.push_back("truth_" + r);
    }
    for (Method m : methods)
      for (const auto& r : resp_names) header.push_back(method_name(m) + "_" + r);
    f.row(header);
    for (Eigen::Index i = 0; i < val->physical.rows(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      for (Eigen::Index j = 0; j < val->physical.cols(); ++j) row.push_back(format_number(val->physical(i, j)));
      if (with_mc) {
        row.push_back(status_name(val->status[static_cast<std::size_t>(i)]));
        for (std::size_t c : resp) row.push_back(format_number(val->outputs(i, static_cast<Eigen::Index>(c))));
      }
      for (std::size_t a = 0; a < methods.size(); ++a)
        for (std::size_t k = 0; k < resp.size(); ++k) row.push_back(format_number(pred[a][k](i)));
      f.row(row);
    }
    f.close();
    artifacts.push_back("validation.csv");
  });

  stage.run("report", [&] {
    const auto truth_rows = with_mc ? val->converged_rows(cfg.n_val) : std::vector<Eigen::Index>{};
    if (with_mc) {
      analytics::SurrogateReport mc{"MC", 0, truth_rows.size(), 0.0, {}};
      for (std::size_t k = 0; k < resp.size(); ++k)
        mc.responses.push_back({resp_names[k],
                                analytics::summarize(column_subset(val->outputs, static_cast<Eigen::Index>(resp[k]), truth_rows),
                                                     cfg.quantiles, cfg.cdf_points),
                                std::nullopt});
      result.reports.push_back(std::move(mc));
    }
    for (std::size_t a = 0; a < methods.size(); ++a) {
      analytics::SurrogateReport rep{method_name(methods[a]), cfg.n_ed - result.excluded_design, cfg.n_val, 0.0, {}};
      for (std::size_t k = 0; k < resp.size(); ++k) {
        const auto& p = pred[a][k];
        analytics::ResponseReport rr{resp_names[k],
                                     analytics::summarize(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                                                          cfg.quantiles, cfg.cdf_points),
                                     std::nullopt};
        if (with_mc) {
          rr.e_val = analytics::validation_error(
              column_subset(val->outputs, static_cast<Eigen::Index>(resp[k]), truth_rows), subset(p, truth_rows));
          result.e_val[{rep.method, resp_names[k]}] = *rr.e_val;
        }
        rep.responses.push_back(std::move(rr));
      }
      result.reports.push_back(std::move(rep));
    }

    {
      CsvFile f(out_dir / "summary.csv");
      std::vector<std::string> header{"method", "response", "n", "mean", "variance"};
      for (double p : cfg.quantiles) header.push_back("q" + format_number(p));
      header.push_back("e_val");
      f.row(header);
      for (const auto& rep : result.reports)
        for (const auto& rr : rep.responses) {
          std::vector<std::string> row{rep.method, rr.name, std::to_string(rr.summary.n), format_number(rr.summary.mean),
                                       format_number(rr.summary.variance)};
          for (double q : rr.summary.quantiles) row.push_back(format_number(q));
          if (rep.method == "MC")
            row.push_back("");
          else
            row.push_back(rr.e_val ? format_number(*rr.e_val) : "baseline_absent");
          f.row(row);
        }
      f.close();
      artifacts.push_back("summary.csv");
    }
    if (with_mc) {
      CsvFile f(out_dir / "comparison.csv");
      f.row({"method", "response", "statistic", "value", "error_pct"});
      for (const auto& r : analytics::compare_methods(result.reports, "MC"))
        f.row({r.method, r.response, r.statistic, format_number(r.value), r.error_pct ? format_number(*r.error_pct) : ""});
      f.close();
      artifacts.push_back("comparison.csv");
    }
    {
      CsvFile f(out_dir / "cdf.csv");
      f.row({"method", "response", "x", "cdf"});
      for (const auto& rep : result.reports)
        for (const auto& rr : rep.responses)
          for (std::size_t i = 0; i < rr.summary.cdf_x.size(); ++i)
            f.row({rep.method, rr.name, format_number(rr.summary.cdf_x[i]), format_number(rr.summary.cdf_y[i])});
      f.close();
      artifacts.push_back("cdf.csv");
    }
    {
      CsvFile f(out_dir / "pdf.csv");
      f.row({"method", "response", "bin_lower", "bin_upper", "density"});
      for (const auto& rep : result.reports)
        for (const auto& rr : rep.responses)
          for (std::size_t i = 0; i < rr.summary.pdf.density.size(); ++i)
            f.row({rep.method, rr.name, format_number(rr.summary.pdf.edges[i]),
                   format_number(rr.summary.pdf.edges[i + 1]), format_number(rr.summary.pdf.density[i])});
      f.close();
      artifacts.push_back("pdf.csv");
    }
  });

  result.stages = stage.stages;
  result.total_seconds = seconds_since(t_start);
  for (auto& rep : result.reports) {
    for (const auto& s : result.stages)
      if ((rep.method == "MC" && (s.name == "opf_validation")) ||
          (rep.method != "MC" && (s.name == "opf_design" || s.name == "fit" || s.name == "predict")))
        rep.wall_time_s += s.seconds;
  }

  json man = manifest_base("run", *exp);
  man["status"] = "ok";
  man["n_ed"] = cfg.n_ed;
  man["n_val"] = cfg.n_val;
  man["excluded"] = {{"design", result.excluded_design}, {"validation", result.excluded_validation}};
  man["clamped_loads"] = {{"design", design->clamped_loads}, {"validation", val->clamped_loads}};
  man["clamped_validation_points"] = clamped_points;
  man["comparison"] = with_mc ? "comparison.csv" : "baseline absent";
  man["case_warnings"] = exp->case_warnings();
  man["artifacts"] = artifacts;
  man["stages"] = stages_json(result.stages);
  man["total_seconds"] = result.total_seconds;
  write_text(out_dir / "manifest.json", man.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// sweep

SweepResult cmd_sweep(const ExperimentConfig& config, const fs::path& out_dir, std::vector<std::size_t> n_list,
                      const ProgressFn& progress) {
  const auto t_start = Clock::now();
  StageRunner stage(out_dir, progress);
  SweepResult result;

  std::optional<Experiment> exp;
  std::vector<Method> methods;
  stage.run("setup", [&] {
    fs::create_directories(out_dir);
    clear_marker(out_dir);
    exp.emplace(config);
    if (n_list.empty()) n_list = exp->config().sweep_n_ed;
    if (n_list.empty()) throw ConfigError("sweep: empty N_ED list");
    for (std::size_t n : n_list)
      if (n < 1) throw ConfigError("sweep: N_ED entries must be >= 1");
    methods = surrogate_methods(exp->config());
    if (methods.empty()) throw ConfigError("sweep: no surrogate method (ASSE or SPCE) selected");
    if (*std::max_element(n_list.begin(), n_list.end()) > exp->config().n_val)
      throw ConfigError("sweep: N_ED exceeds N_Val");
  });
  const auto& cfg = exp->config();
  const auto& resp = exp->responses();
  result.responses = exp->response_names();

  std::optional<BatchResult> val;
  stage.run("opf_validation",
            [&] { val.emplace(evaluate_batch(*exp, cfg.n_val, cfg.validation_skip, cfg.workers, progress)); });
  const auto truth_rows = val->converged_rows(cfg.n_val);

  std::optional<BatchResult> design;
  const std::size_t n_max = *std::max_element(n_list.begin(), n_list.end());
  stage.run("opf_design", [&] { design.emplace(evaluate_batch(*exp, n_max, cfg.qmc_skip, cfg.workers, progress)); });

  stage.run("fit", [&] {
    for (std::size_t n : n_list) {
      if (progress) progress("  N_ED " + std::to_string(n));
      for (Method m : methods) {
        SweepRow row{n, method_name(m), design->converged_rows(n).size(), {}};
        for (std::size_t c : resp) {
          const auto tree = fit_surrogate(*exp, *design, n, c, m);
          const auto p = sse::evaluate_sse(tree, val->unit.points()).values;
          row.e_val.push_back(analytics::validation_error(
              column_subset(val->outputs, static_cast<Eigen::Index>(c), truth_rows), subset(p, truth_rows)));
        }
        result.rows.push_back(std::move(row));
      }
    }
  });

  stage.run("report", [&] {
    CsvFile f(out_dir / "sweep.csv");
    std::vector<std::string> header{"n_ed", "method", "n_train"};
    for (const auto& r : result.responses) header.push_back("e_val_" + r);
    f.row(header);
    for (const auto& row : result.rows) {
      std::vector<std::string> r{std::to_string(row.n_ed), row.method, std::to_string(row.n_train)};
      for (double e : row.e_val) r.push_back(format_number(e));
      f.row(r);
    }
    f.close();
  });

  result.stages = stage.stages;
  result.total_seconds = seconds_since(t_start);
  json man = manifest_base("sweep", *exp);
  man["status"] = "ok";
  man["n_ed"] = n_list;
  man["n_val"] = cfg.n_val;
  man["excluded"] = {{"design", n_max - design->converged()}, {"validation", cfg.n_val - val->converged()}};
  man["case_warnings"] = exp->case_warnings();
  man["artifacts"] = {"sweep.csv"};
  man["stages"] = stages_json(result.stages);
  man["total_seconds"] = result.total_seconds;
  write_text(out_dir / "manifest.json", man.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// eval

namespace {

std::vector<std::string> split_csv(const std::string& line) {
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
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

Eigen::MatrixXd read_points_csv(const fs::path& path, std::size_t dimension) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open points file '" + path.string() + "'");
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < dimension; ++j) cols.push_back(j);
  std::size_t width = dimension;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (first) {
      first = false;
      double tmp;
      const bool header = std::any_of(fields.begin(), fields.end(), [&](const std::string& f) { return !parse_double(f, tmp); });
      if (header) {
        width = fields.size();
        std::vector<std::size_t> named;
        for (std::size_t j = 0; j < dimension; ++j) {
          const auto it = std::find(fields.begin(), fields.end(), "zeta_" + std::to_string(j + 1));
          if (it == fields.end()) break;
          named.push_back(static_cast<std::size_t>(it - fields.begin()));
        }
        if (named.size() == dimension)
          cols = named;
        else if (fields.size() != dimension)
          throw ParseError("header has " + std::to_string(fields.size()) + " columns and no zeta_1..zeta_" +
                               std::to_string(dimension) + " names; expected " + std::to_string(dimension) + " columns",
                           lineno);
        continue;
      }
    }
    if (fields.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()), lineno);
    std::vector<double> r(dimension);
    for (std::size_t j = 0; j < dimension; ++j)
      if (!parse_double(fields[cols[j]], r[j]))
        throw ParseError("non-numeric value '" + fields[cols[j]] + "'", lineno);
    rows.push_back(std::move(r));
  }
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < dimension; ++j) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return pts;
}

Eigen::VectorXd cmd_eval(const fs::path& document, const fs::path& points, const fs::path& out, PointSpace space) {
  std::ifstream in(document);
  if (!in) throw std::runtime_error("cannot open surrogate document '" + document.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("surrogate document: ") + e.what());
  }
  const auto tree = sse::from_document(doc);
  const Eigen::MatrixXd pts = read_points_csv(points, tree.dimension());
  if (space == PointSpace::Auto) space = tree.random_vector() ? PointSpace::Physical : PointSpace::Unit;

  Eigen::VectorXd values(0);
  if (pts.rows() > 0) {
    if (space == PointSpace::Physical)
      values = sse::evaluate_sse(tree, SampleMatrix(pts, SampleSpace::Physical)).values;
    else
      values = sse::evaluate_sse(tree, pts).values;
  }
  CsvFile f(out);
  f.row({"row", "prediction"});
  for (Eigen::Index i = 0; i < values.size(); ++i) f.row({std::to_string(i), format_number(values(i))});
  f.close();
  return values;
}

}  // namespace asse::app
