#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "asse/grid/case.hpp"
#include "asse/grid/res.hpp"
#include "asse/pce/model.hpp"
#include "asse/sse/tree.hpp"
#include "asse/uncertainty/marginal.hpp"

namespace asse::app {

enum class Method { MC, ASSE, SPCE };

std::string method_name(Method m);
/// Case-insensitive.
Method parse_method(std::string_view name);
std::vector<Method> parse_method_list(std::string_view comma_separated);

struct InputSpec {
  std::string name;
  uncertainty::MarginalDistribution marginal;
};

/// One experiment. Parsed from JSON (comments allowed); relative paths are
/// resolved against the config file's directory.
struct ExperimentConfig {
  std::filesystem::path case_path;
  std::vector<InputSpec> inputs;  ///< wind speed, irradiance, then one per load bus
  grid::ResModel res;
  grid::UncertaintyMapping mapping;

  std::size_t n_ed = 60;
  std::size_t n_val = 10000;
  std::uint64_t qmc_skip = 1;
  std::uint64_t validation_skip = std::uint64_t{1} << 16;

  pce::FitOptions fit;
  std::size_t n_ref_min = 10;
  std::size_t k_max = 1000;

  std::vector<Method> methods{Method::MC, Method::ASSE, Method::SPCE};
  /// Exact column names (Pg_2, V_5, objective) or whole groups (Pg, Qg, V, theta).
  std::vector<std::string> responses{"Pg", "objective"};
  std::vector<double> quantiles{0.05, 0.5, 0.95};
  std::size_t cdf_points = 201;
  std::vector<std::size_t> sweep_n_ed;

  std::size_t workers = 1;
  std::filesystem::path output_dir = "out";

  uncertainty::RandomVector random_vector() const;
  sse::SseConfig sse_config() const;
  bool has(Method m) const;
};

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks the config against a parsed case: dimensions, bus references,
/// N_Val >= N_ED and the response names.
void validate_config(const ExperimentConfig& config, const grid::PowerSystemCase& pcase);

}  // namespace asse::app
