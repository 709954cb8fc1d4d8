#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "asse/analytics/statistics.hpp"
#include "asse/app/config.hpp"
#include "asse/grid/opf.hpp"
#include "asse/sse/tree.hpp"
#include "asse/uncertainty/sampling.hpp"

namespace asse::app {

/// Failure inside a named pipeline stage. The output directory keeps whatever
/// was written plus a FAILED marker.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

using ProgressFn = std::function<void(std::string_view)>;

/// Case, marginals and response columns of one experiment config.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const grid::PowerSystemCase& base_case() const noexcept { return case_; }
  const uncertainty::RandomVector& random_vector() const noexcept { return rv_; }
  const std::vector<std::string>& case_warnings() const noexcept { return warnings_; }

  /// Every OPF output column: Pg_g, Qg_g (generator ordinal), V_b, theta_b (bus id), objective.
  const std::vector<std::string>& output_columns() const noexcept { return columns_; }
  /// Configured responses resolved into indices of output_columns().
  const std::vector<std::size_t>& responses() const noexcept { return responses_; }
  std::vector<std::string> response_names() const;

  std::vector<double> outputs(const grid::OpfSolution& sol) const;

 private:
  ExperimentConfig config_;
  grid::PowerSystemCase case_;
  uncertainty::RandomVector rv_;
  std::vector<std::string> warnings_;
  std::vector<std::string> columns_;
  std::vector<std::size_t> responses_;
};

/// OPF results over a sample set, in sample order.
struct BatchResult {
  uncertainty::SampleMatrix unit;
  uncertainty::SampleMatrix physical;
  std::vector<grid::OpfStatus> status;
  Eigen::MatrixXd outputs;  ///< one row per sample, columns as Experiment::output_columns()
  std::size_t clamped_loads = 0;

  std::size_t converged() const;
  /// Indices of converged rows among the first `n`.
  std::vector<Eigen::Index> converged_rows(std::size_t n) const;
};

/// n QMC points from sequence index `skip`, each solved by AC-OPF on `workers` threads.
BatchResult evaluate_batch(const Experiment& exp, std::size_t n, std::uint64_t skip, std::size_t workers,
                           const ProgressFn& progress = {});

/// Surrogate of one response fitted on the first `n` design rows (infeasible rows skipped).
sse::SseTree fit_surrogate(const Experiment& exp, const BatchResult& design, std::size_t n, std::size_t column,
                           Method method);

struct StageTime {
  std::string name;
  double seconds = 0.0;
};

struct RunResult {
  std::vector<analytics::SurrogateReport> reports;
  /// e_Val per (method, response); absent when MC is not run.
  std::map<std::pair<std::string, std::string>, double> e_val;
  std::size_t excluded_design = 0;
  std::size_t excluded_validation = 0;
  std::vector<StageTime> stages;
  double total_seconds = 0.0;
};

/// Design CSV, surrogate documents, validation CSV, summary/comparison/cdf/pdf
/// CSVs and manifest.json under `out_dir`.
RunResult cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                  const ProgressFn& progress = {});

struct SweepRow {
  std::size_t n_ed = 0;
  std::string method;
  std::size_t n_train = 0;
  std::vector<double> e_val;  ///< per response
};

struct SweepResult {
  std::vector<std::string> responses;
  std::vector<SweepRow> rows;
  std::vector<StageTime> stages;
  double total_seconds = 0.0;
};

/// e_Val of every surrogate method for each N_ED in `n_list` (config sweep list
/// when empty). One validation set; designs are nested prefixes of one QMC run.
SweepResult cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      std::vector<std::size_t> n_list = {}, const ProgressFn& progress = {});

/// Reads a points CSV. With a header holding zeta_1..zeta_M those columns are
/// used; otherwise every row must have exactly `dimension` numeric fields.
Eigen::MatrixXd read_points_csv(const std::filesystem::path& path, std::size_t dimension);

enum class PointSpace { Auto, Unit, Physical };

/// Evaluates a surrogate document on a points CSV and writes `row,prediction`.
/// Auto treats points as physical when the document carries marginals.
Eigen::VectorXd cmd_eval(const std::filesystem::path& document, const std::filesystem::path& points,
                         const std::filesystem::path& out, PointSpace space = PointSpace::Auto);

/// Shortest decimal that round-trips; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

}  // namespace asse::app
