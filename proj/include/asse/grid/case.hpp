#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace asse::grid {

enum class BusType { PQ = 1, PV = 2, Slack = 3 };

struct Bus {
  int id = 0;
  BusType type = BusType::PQ;
  double pd = 0.0;  ///< MW
  double qd = 0.0;  ///< MVAr
  double gs = 0.0;  ///< MW at V = 1 p.u.
  double bs = 0.0;  ///< MVAr at V = 1 p.u.
  int area = 1;
  double vm = 1.0;
  double va = 0.0;  ///< degrees
  double base_kv = 0.0;
  int zone = 1;
  double vmax = 1.1;
  double vmin = 0.9;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b = 0.0;       ///< total line charging, p.u.
  double rate_a = 0.0;  ///< MVA, 0 = unlimited
  double rate_b = 0.0;
  double rate_c = 0.0;
  double ratio = 0.0;   ///< off-nominal tap, 0 = 1
  double angle = 0.0;   ///< phase shift, degrees
  bool in_service = true;
  double angmin = -360.0;
  double angmax = 360.0;

  bool operator==(const Branch&) const = default;
};

/// Quadratic cost c2 P^2 + c1 P + c0 in $/h with P in MW.
struct Generator {
  int bus = 0;
  double pg = 0.0;
  double qg = 0.0;
  double qmax = 0.0;
  double qmin = 0.0;
  double vg = 1.0;
  double mbase = 100.0;
  bool in_service = true;
  double pmax = 0.0;
  double pmin = 0.0;
  std::array<double, 3> cost{0.0, 0.0, 0.0};  ///< (c2, c1, c0)
  double startup = 0.0;
  double shutdown = 0.0;

  double cost_at(double p_mw) const noexcept { return (cost[0] * p_mw + cost[1]) * p_mw + cost[2]; }
  bool operator==(const Generator&) const = default;
};

struct PowerSystemCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;

  /// Position of the bus with external number `id`; throws DomainError if absent.
  std::size_t bus_index(int id) const;
  std::size_t slack_index() const;
  /// Throws DomainError on any violated invariant.
  void validate() const;
  double total_cost(const std::vector<double>& pg_mw) const;

  bool operator==(const PowerSystemCase&) const = default;
};

/// Parses the subset of the MATPOWER case format made of `baseMVA` and the
/// `bus`, `gen`, `branch` and `gencost` matrices. Other assignments are
/// skipped; nonzero data in unsupported columns produces a warning.
PowerSystemCase parse_matpower_case(std::string_view text, std::vector<std::string>* warnings = nullptr);
PowerSystemCase load_matpower_case(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// MATPOWER text with every number printed at round-trip precision.
std::string serialize_matpower_case(const PowerSystemCase& pcase);

}  // namespace asse::grid
