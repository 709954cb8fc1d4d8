#include "asse/sse/document.hpp"

#include <cmath>
#include <limits>

#include "asse/errors.hpp"

namespace asse::sse {

using nlohmann::json;
namespace unc = uncertainty;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

json model_to_json(const pce::PceModel& m) {
  json terms = json::array();
  for (std::size_t l = 0; l < m.basis.size(); ++l)
    terms.push_back({{"alpha", m.basis[l].degrees}, {"coef", m.coefficients(static_cast<Eigen::Index>(l))}});
  return {{"order", m.order},     {"q", m.q},         {"e_loo", m.e_loo}, {"e_cloo", m.e_cloo},
          {"n_train", m.n_train}, {"fallback", m.fallback}, {"terms", terms}};
}

pce::PceModel model_from_json(const json& j, const pce::Box& domain) {
  pce::PceModel m;
  m.domain = domain;
  m.order = j.at("order").get<int>();
  m.q = j.at("q").get<double>();
  m.e_loo = j.at("e_loo").get<double>();
  m.e_cloo = j.at("e_cloo").get<double>();
  m.n_train = j.at("n_train").get<std::size_t>();
  m.fallback = j.at("fallback").get<bool>();
  const auto& terms = j.at("terms");
  m.coefficients.resize(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t l = 0; l < terms.size(); ++l) {
    pce::MultiIndex mi{terms[l].at("alpha").get<std::vector<int>>()};
    if (mi.dimension() != domain.dimension()) throw ParseError("surrogate document: multi-index dimension mismatch");
    m.basis.push_back(std::move(mi));
    m.coefficients(static_cast<Eigen::Index>(l)) = terms[l].at("coef").get<double>();
  }
  return m;
}

// json has no inf/nan; scores and errors may be infinite.
json real(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

double real(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw ParseError("surrogate document: bad real '" + s + "'");
}

}  // namespace

json marginal_to_json(const unc::MarginalDistribution& m) {
  return std::visit(
      overloaded{
          [](const unc::Gaussian& p) { return json{{"type", "gaussian"}, {"mean", p.mean}, {"sd", p.sd}}; },
          [](const unc::Weibull& p) { return json{{"type", "weibull"}, {"scale", p.scale}, {"shape", p.shape}}; },
          [](const unc::Beta& p) { return json{{"type", "beta"}, {"a", p.a}, {"b", p.b}}; },
          [](const unc::Uniform& p) { return json{{"type", "uniform"}, {"lower", p.lower}, {"upper", p.upper}}; },
      },
      m.params());
}

unc::MarginalDistribution marginal_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "gaussian") return unc::Gaussian{j.at("mean").get<double>(), j.at("sd").get<double>()};
  if (type == "weibull") return unc::Weibull{j.at("scale").get<double>(), j.at("shape").get<double>()};
  if (type == "beta") return unc::Beta{j.at("a").get<double>(), j.at("b").get<double>()};
  if (type == "uniform") return unc::Uniform{j.at("lower").get<double>(), j.at("upper").get<double>()};
  throw UnsupportedError("unknown marginal type '" + type + "'");
}

json to_document(const SseTree& tree) {
  json doc;
  doc["format"] = kDocumentFormat;
  doc["version"] = kDocumentVersion;
  doc["dimension"] = tree.dimension();
  doc["config"] = {{"n_ref_min", tree.config().n_ref_min},
                   {"k_max", tree.config().k_max},
                   {"orders", tree.config().fit.orders},
                   {"q_values", tree.config().fit.q_values}};
  if (tree.random_vector()) {
    json ms = json::array();
    for (const auto& m : tree.random_vector()->marginals()) ms.push_back(marginal_to_json(m));
    doc["marginals"] = ms;
  } else {
    doc["marginals"] = nullptr;
  }
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    json jn{{"level", n.level},
            {"index", n.index},
            {"lower", n.domain.lower},
            {"upper", n.domain.upper},
            {"e_loo", real(n.e_loo)},
            {"score", real(n.score)}};
    jn["parent"] = n.parent == kNoNode ? json(nullptr) : json(n.parent);
    if (n.terminal()) {
      jn["children"] = json::array();
      jn["split_dim"] = nullptr;
    } else {
      jn["children"] = {n.children[0], n.children[1]};
      jn["split_dim"] = *n.split_dim;
    }
    jn["expansion"] = n.expansion ? model_to_json(*n.expansion) : json(nullptr);
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

SseTree from_document(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kDocumentFormat)
    throw UnsupportedError("not an asse surrogate document");
  const int version = doc.value("version", 0);
  if (version != kDocumentVersion)
    throw UnsupportedError("surrogate document version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kDocumentVersion) + "); upgrade the tool or re-fit the surrogate");
  try {
    const auto m = doc.at("dimension").get<std::size_t>();
    SseConfig cfg;
    const auto& jc = doc.at("config");
    cfg.n_ref_min = jc.at("n_ref_min").get<std::size_t>();
    cfg.k_max = jc.at("k_max").get<int>();
    cfg.fit.orders = jc.at("orders").get<std::vector<int>>();
    cfg.fit.q_values = jc.at("q_values").get<std::vector<double>>();
    std::optional<unc::RandomVector> rv;
    if (!doc.at("marginals").is_null()) {
      std::vector<unc::MarginalDistribution> ms;
      for (const auto& jm : doc.at("marginals")) ms.push_back(marginal_from_json(jm));
      rv.emplace(std::move(ms));
    }
    SseTree tree(m, cfg, std::move(rv));
    const auto& nodes = doc.at("nodes");
    if (nodes.empty()) throw ParseError("surrogate document: no nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& jn = nodes[i];
      SseNode n;
      n.level = jn.at("level").get<int>();
      n.domain.lower = jn.at("lower").get<std::vector<double>>();
      n.domain.upper = jn.at("upper").get<std::vector<double>>();
      if (n.domain.dimension() != m || n.domain.upper.size() != m)
        throw ParseError("surrogate document: node " + std::to_string(i) + " has wrong dimension");
      n.e_loo = real(jn.at("e_loo"));
      n.score = real(jn.at("score"));
      if (!jn.at("parent").is_null()) n.parent = jn.at("parent").get<NodeId>();
      const auto& ch = jn.at("children");
      if (ch.size() == 2) {
        n.children = {ch[0].get<NodeId>(), ch[1].get<NodeId>()};
        if (n.children[0] >= nodes.size() || n.children[1] >= nodes.size() || n.children[0] <= i || n.children[1] <= i)
          throw ParseError("surrogate document: node " + std::to_string(i) + " has invalid children");
        n.split_dim = jn.at("split_dim").get<std::size_t>();
        if (*n.split_dim >= m) throw ParseError("surrogate document: split dimension out of range");
      } else if (!ch.empty()) {
        throw ParseError("surrogate document: node " + std::to_string(i) + " must have 0 or 2 children");
      }
      if (!jn.at("expansion").is_null()) n.expansion = model_from_json(jn.at("expansion"), n.domain);
      if (i == 0) {
        const int index = tree.node(0).index;
        tree.node(0) = std::move(n);
        tree.node(0).index = index;
      } else {
        const int index = jn.at("index").get<int>();
        const NodeId id = tree.add_node(std::move(n));
        if (tree.node(id).index != index)
          throw ParseError("surrogate document: node " + std::to_string(i) + " is out of order");
      }
    }
    return tree;
  } catch (const json::exception& e) {
    throw ParseError(std::string("surrogate document: ") + e.what());
  }
}

}  // namespace asse::sse
