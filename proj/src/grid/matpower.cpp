#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include "asse/errors.hpp"
#include "asse/grid/case.hpp"

namespace asse::grid {

std::size_t PowerSystemCase::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return i;
  throw DomainError("case has no bus " + std::to_string(id));
}

std::size_t PowerSystemCase::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].type == BusType::Slack) return i;
  throw DomainError("case has no slack bus");
}

void PowerSystemCase::validate() const {
  if (!(base_mva > 0.0)) throw DomainError("baseMVA must be positive");
  if (buses.empty()) throw DomainError("case has no buses");
  std::set<int> ids;
  int slack = 0;
  for (const auto& b : buses) {
    if (!ids.insert(b.id).second) throw DomainError("duplicate bus " + std::to_string(b.id));
    if (b.type == BusType::Slack) ++slack;
    if (!(b.vmin < b.vmax)) throw DomainError("bus " + std::to_string(b.id) + ": Vmin must be below Vmax");
  }
  if (slack != 1) throw DomainError("case must have exactly one slack bus, found " + std::to_string(slack));
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto& br = branches[k];
    if (!ids.contains(br.from) || !ids.contains(br.to))
      throw DomainError("branch " + std::to_string(k + 1) + " references a missing bus");
    if (br.from == br.to) throw DomainError("branch " + std::to_string(k + 1) + " is a self loop");
    if (br.r == 0.0 && br.x == 0.0) throw DomainError("branch " + std::to_string(k + 1) + " has zero impedance");
  }
  for (std::size_t g = 0; g < generators.size(); ++g) {
    const auto& gen = generators[g];
    const auto tag = "generator " + std::to_string(g + 1);
    if (!ids.contains(gen.bus)) throw DomainError(tag + " references a missing bus");
    if (gen.pmin > gen.pmax) throw DomainError(tag + ": Pmin > Pmax");
    if (gen.qmin > gen.qmax) throw DomainError(tag + ": Qmin > Qmax");
    if (gen.cost[0] < 0.0) throw DomainError(tag + ": negative quadratic cost coefficient");
  }
}

double PowerSystemCase::total_cost(const std::vector<double>& pg_mw) const {
  if (pg_mw.size() != generators.size()) throw ShapeError("total_cost: one dispatch value per generator expected");
  double c = 0.0;
  for (std::size_t g = 0; g < generators.size(); ++g)
    if (generators[g].in_service) c += generators[g].cost_at(pg_mw[g]);
  return c;
}

namespace {

using Row = std::vector<double>;

struct Matrix {
  std::vector<Row> rows;
  std::vector<std::size_t> lines;
};

double parse_number(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("non-numeric token '" + std::string(tok) + "'", line);
  return v;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\'') quoted = !quoted;
    if (line[i] == '%' && !quoted) return line.substr(0, i);
  }
  return line;
}

// Tokenizes matrix body text, closing rows on ';' and newlines. Returns true when ']' is reached.
bool consume_matrix_text(std::string_view s, std::size_t line, Matrix& m, Row& row) {
  auto flush = [&] {
    if (!row.empty()) {
      m.rows.push_back(std::move(row));
      m.lines.push_back(line);
      row.clear();
    }
  };
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == ']') {
      flush();
      return true;
    }
    if (c == ';') {
      flush();
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != ',' && s[j] != ';' && s[j] != ']')
      ++j;
    row.push_back(parse_number(s.substr(i, j - i), line));
    i = j;
  }
  flush();
  return false;
}

void check_columns(const Matrix& m, const char* section, std::size_t required) {
  for (std::size_t r = 0; r < m.rows.size(); ++r)
    if (m.rows[r].size() < required)
      throw ParseError(std::string(section) + " row has " + std::to_string(m.rows[r].size()) + " columns, need " +
                           std::to_string(required),
                       m.lines[r]);
}

void warn_extra(const Matrix& m, const char* section, std::size_t used, std::vector<std::string>* warnings) {
  if (!warnings) return;
  for (std::size_t r = 0; r < m.rows.size(); ++r)
    for (std::size_t c = used; c < m.rows[r].size(); ++c)
      if (m.rows[r][c] != 0.0) {
        warnings->push_back(std::string(section) + ": ignoring unsupported columns beyond " + std::to_string(used));
        return;
      }
}

int as_int(double v, std::size_t line, const char* what) {
  if (v != std::floor(v)) throw ParseError(std::string(what) + " must be an integer", line);
  return static_cast<int>(v);
}

}  // namespace

PowerSystemCase parse_matpower_case(std::string_view text, std::vector<std::string>* warnings) {
  static const std::regex assign(R"(^\s*(?:[A-Za-z_]\w*\.)?([A-Za-z_]\w*)\s*=\s*(.*)$)");
  static const std::regex function_decl(R"(^\s*function\s+(?:\w+\s*=\s*)?(\w+))");
  static const std::set<std::string> matrices{"bus", "gen", "branch", "gencost"};

  PowerSystemCase pc;
  std::optional<double> base;
  std::map<std::string, Matrix> found;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  std::string open;       // matrix being read
  std::size_t open_line = 0;
  Row pending;
  int skip_depth = 0;     // unsupported bracketed value being skipped
  char skip_close = 0;
  Matrix skipped;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    if (skip_depth > 0) {
      for (char c : line) {
        if (c == skip_close) --skip_depth;
        else if (c == (skip_close == ']' ? '[' : '{')) ++skip_depth;
      }
      continue;
    }
    if (!open.empty()) {
      if (consume_matrix_text(line, line_no, found[open], pending)) open.clear();
      continue;
    }
    std::smatch m;
    if (std::regex_search(line, m, function_decl)) {
      pc.name = m[1];
      continue;
    }
    if (!std::regex_match(line, m, assign)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ParseError("unrecognized statement '" + line + "'", line_no);
      continue;
    }
    const std::string name = m[1];
    const std::string rhs = m[2];
    const auto start = rhs.find_first_not_of(" \t");
    const char lead = start == std::string::npos ? '\0' : rhs[start];
    if (name == "baseMVA") {
      auto v = rhs.substr(0, rhs.find(';'));
      v.erase(0, v.find_first_not_of(" \t"));
      v.erase(v.find_last_not_of(" \t\r") + 1);
      base = parse_number(v, line_no);
    } else if (matrices.contains(name)) {
      if (lead != '[') throw ParseError(name + " must be a bracketed matrix", line_no);
      if (found.contains(name)) throw ParseError("duplicate " + name + " matrix", line_no);
      found[name];
      open_line = line_no;
      if (!consume_matrix_text(std::string_view(rhs).substr(start + 1), line_no, found[name], pending)) open = name;
    } else if (lead == '[' || lead == '{') {
      if (warnings) warnings->push_back("ignoring unsupported section '" + name + "'");
      skip_close = lead == '[' ? ']' : '}';
      skip_depth = 0;
      for (char c : rhs.substr(start)) {
        if (c == lead) ++skip_depth;
        else if (c == skip_close) --skip_depth;
      }
    }
  }
  if (!open.empty()) throw ParseError("unterminated " + open + " matrix", open_line);
  if (skip_depth > 0) throw ParseError("unterminated bracket at end of input", line_no);
  if (!base) throw ParseError("missing baseMVA");
  for (const auto& s : {"bus", "gen", "branch", "gencost"})
    if (!found.contains(s)) throw ParseError(std::string("missing ") + s + " matrix");
  pc.base_mva = *base;

  const auto& mb = found["bus"];
  check_columns(mb, "bus", 13);
  warn_extra(mb, "bus", 13, warnings);
  for (std::size_t r = 0; r < mb.rows.size(); ++r) {
    const auto& v = mb.rows[r];
    Bus b;
    b.id = as_int(v[0], mb.lines[r], "bus number");
    const int type = as_int(v[1], mb.lines[r], "bus type");
    if (type < 1 || type > 3) throw UnsupportedError("bus " + std::to_string(b.id) + ": bus type " + std::to_string(type) + " is not supported");
    b.type = static_cast<BusType>(type);
    b.pd = v[2];
    b.qd = v[3];
    b.gs = v[4];
    b.bs = v[5];
    b.area = as_int(v[6], mb.lines[r], "area");
    b.vm = v[7];
    b.va = v[8];
    b.base_kv = v[9];
    b.zone = as_int(v[10], mb.lines[r], "zone");
    b.vmax = v[11];
    b.vmin = v[12];
    pc.buses.push_back(b);
  }

  const auto& mg = found["gen"];
  check_columns(mg, "gen", 10);
  warn_extra(mg, "gen", 10, warnings);
  for (std::size_t r = 0; r < mg.rows.size(); ++r) {
    const auto& v = mg.rows[r];
    Generator g;
    g.bus = as_int(v[0], mg.lines[r], "generator bus");
    g.pg = v[1];
    g.qg = v[2];
    g.qmax = v[3];
    g.qmin = v[4];
    g.vg = v[5];
    g.mbase = v[6];
    g.in_service = v[7] > 0.0;
    g.pmax = v[8];
    g.pmin = v[9];
    pc.generators.push_back(g);
  }

  const auto& ml = found["branch"];
  check_columns(ml, "branch", 11);
  warn_extra(ml, "branch", 13, warnings);
  for (std::size_t r = 0; r < ml.rows.size(); ++r) {
    const auto& v = ml.rows[r];
    Branch br;
    br.from = as_int(v[0], ml.lines[r], "branch from bus");
    br.to = as_int(v[1], ml.lines[r], "branch to bus");
    br.r = v[2];
    br.x = v[3];
    br.b = v[4];
    br.rate_a = v[5];
    br.rate_b = v[6];
    br.rate_c = v[7];
    br.ratio = v[8];
    br.angle = v[9];
    br.in_service = v[10] > 0.0;
    if (v.size() > 12) {
      br.angmin = v[11];
      br.angmax = v[12];
    }
    pc.branches.push_back(br);
  }

  const auto& mc = found["gencost"];
  check_columns(mc, "gencost", 4);
  if (mc.rows.size() < pc.generators.size())
    throw ParseError("gencost has fewer rows than gen", mc.lines.empty() ? 0 : mc.lines.back());
  if (mc.rows.size() > pc.generators.size() && warnings)
    warnings->push_back("ignoring reactive-power cost rows in gencost");
  for (std::size_t r = 0; r < pc.generators.size(); ++r) {
    const auto& v = mc.rows[r];
    const int model = as_int(v[0], mc.lines[r], "cost model");
    if (model == 1) throw UnsupportedError("piecewise-linear generator cost (gencost model 1) is not supported");
    if (model != 2) throw ParseError("unknown gencost model " + std::to_string(model), mc.lines[r]);
    const int n = as_int(v[3], mc.lines[r], "cost coefficient count");
    if (n < 0 || v.size() < 4 + static_cast<std::size_t>(n))
      throw ParseError("gencost row is shorter than its coefficient count", mc.lines[r]);
    auto& g = pc.generators[r];
    g.startup = v[1];
    g.shutdown = v[2];
    // coefficients are listed from the highest power down to c0
    for (int k = 0; k < n; ++k) {
      const int power = n - 1 - k;
      const double c = v[4 + static_cast<std::size_t>(k)];
      if (power > 2) {
        if (c != 0.0) throw UnsupportedError("generator cost polynomials above degree 2 are not supported");
        continue;
      }
      g.cost[static_cast<std::size_t>(2 - power)] = c;
    }
  }

  pc.validate();
  return pc;
}

PowerSystemCase load_matpower_case(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open case file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_matpower_case(ss.str(), warnings);
}

std::string serialize_matpower_case(const PowerSystemCase& pc) {
  std::ostringstream out;
  out.precision(17);
  auto row = [&](std::initializer_list<double> values) {
    for (double v : values) {
      out << '\t';
      if (std::isinf(v)) out << (v > 0 ? "Inf" : "-Inf");
      else out << v;
    }
    out << ";\n";
  };
  out << "function mpc = " << (pc.name.empty() ? "case" : pc.name) << "\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << pc.base_mva << ";\n\n";

  out << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\nmpc.bus = [\n";
  for (const auto& b : pc.buses)
    row({double(b.id), double(static_cast<int>(b.type)), b.pd, b.qd, b.gs, b.bs, double(b.area), b.vm, b.va, b.base_kv,
         double(b.zone), b.vmax, b.vmin});
  out << "];\n\n";

  out << "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\nmpc.gen = [\n";
  for (const auto& g : pc.generators)
    row({double(g.bus), g.pg, g.qg, g.qmax, g.qmin, g.vg, g.mbase, g.in_service ? 1.0 : 0.0, g.pmax, g.pmin});
  out << "];\n\n";

  out << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\nmpc.branch = [\n";
  for (const auto& br : pc.branches)
    row({double(br.from), double(br.to), br.r, br.x, br.b, br.rate_a, br.rate_b, br.rate_c, br.ratio, br.angle,
         br.in_service ? 1.0 : 0.0, br.angmin, br.angmax});
  out << "];\n\n";

  out << "%\t2\tstartup\tshutdown\tn\tc2\tc1\tc0\nmpc.gencost = [\n";
  for (const auto& g : pc.generators) row({2.0, g.startup, g.shutdown, 3.0, g.cost[0], g.cost[1], g.cost[2]});
  out << "];\n";
  return out.str();
}

}  // namespace asse::grid
