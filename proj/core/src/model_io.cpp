#include "hardlabel/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hardlabel/external_oracle.hpp"

namespace hardlabel {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& at) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw LoadError(at == "<root>" ? std::string(key) : at + "." + key, "missing");
  }
  return *it;
}

double as_number(const json& v, const std::string& at) {
  if (!v.is_number()) throw LoadError(at, "expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw LoadError(at, "non-finite number");
  return d;
}

std::size_t as_index(const json& v, const std::string& at) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw LoadError(at, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> as_vector(const json& v, const std::string& at) {
  if (!v.is_array()) throw LoadError(at, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], at + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::optional<double>> bound_side(const json& v, std::size_t d,
                                              const std::string& at) {
  if (v.is_null()) return std::vector<std::optional<double>>(d);
  if (v.is_number()) {
    return std::vector<std::optional<double>>(d, as_number(v, at));
  }
  if (!v.is_array()) throw LoadError(at, "expected number, array or null");
  if (v.size() != d) {
    throw LoadError(at, "has " + std::to_string(v.size()) +
                            " entries, model dimension is " +
                            std::to_string(d));
  }
  std::vector<std::optional<double>> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!v[i].is_null()) {
      out[i] = as_number(v[i], at + "[" + std::to_string(i) + "]");
    }
  }
  return out;
}

DomainBounds parse_bounds(const json& doc, std::size_t d) {
  auto it = doc.find("bounds");
  if (it == doc.end() || it->is_null()) return {};
  if (!it->is_object()) throw LoadError("bounds", "expected an object");
  if (d == 0) {
    throw LoadError("bounds", "model has no declared dimension; add \"d\"");
  }
  json lower = it->value("lower", json());
  json upper = it->value("upper", json());
  try {
    return DomainBounds(bound_side(lower, d, "bounds.lower"),
                        bound_side(upper, d, "bounds.upper"));
  } catch (const InvalidInput& e) {
    throw LoadError("bounds", e.what());
  }
}

std::shared_ptr<const Model> parse_radial(const json& doc) {
  double r2 = RadialModel::kDefaultRadiusSquared;
  if (doc.contains("r2")) r2 = as_number(doc["r2"], "r2");
  std::size_t d = doc.contains("d") ? as_index(doc["d"], "d") : 0;
  if (!(r2 > 0.0)) throw LoadError("r2", "must be positive");
  return std::make_shared<RadialModel>(r2, d);
}

std::shared_ptr<const Model> parse_linear(const json& doc) {
  std::vector<double> w = as_vector(require(doc, "w", "<root>"), "w");
  double b = as_number(require(doc, "b", "<root>"), "b");
  if (w.empty()) throw LoadError("w", "empty weight vector");
  if (doc.contains("d") && as_index(doc["d"], "d") != w.size()) {
    throw LoadError("d", "disagrees with length of w");
  }
  return std::make_shared<LinearModel>(std::move(w), b);
}

std::shared_ptr<const Model> parse_mlp(const json& doc) {
  const json& layers = require(doc, "layers", "<root>");
  if (!layers.is_array() || layers.empty()) {
    throw LoadError("layers", "expected a non-empty array");
  }
  std::vector<DenseLayer> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::string at = "layers[" + std::to_string(i) + "]";
    const json& l = layers[i];
    if (!l.is_object()) throw LoadError(at, "expected an object");
    const json& w = require(l, "w", at);
    if (!w.is_array() || w.empty()) throw LoadError(at + ".w", "expected rows");
    DenseLayer layer;
    layer.rows = w.size();
    for (std::size_t r = 0; r < w.size(); ++r) {
      std::vector<double> row =
          as_vector(w[r], at + ".w[" + std::to_string(r) + "]");
      if (r == 0) layer.cols = row.size();
      if (row.size() != layer.cols || row.empty()) {
        throw LoadError(at + ".w[" + std::to_string(r) + "]",
                        "ragged or empty row");
      }
      layer.weights.insert(layer.weights.end(), row.begin(), row.end());
    }
    layer.bias = as_vector(require(l, "b", at), at + ".b");
    std::string act = l.value("act", std::string("identity"));
    try {
      layer.activation = parse_activation(act);
    } catch (const InvalidInput& e) {
      throw LoadError(at + ".act", e.what());
    }
    out.push_back(std::move(layer));
  }
  return std::make_shared<MlpModel>(std::move(out));
}

std::shared_ptr<const Model> parse_gbdt(const json& doc) {
  const json& kj = require(doc, "k", "<root>");
  if (!kj.is_number_integer()) throw LoadError("k", "expected an integer");
  int k = kj.get<int>();
  const json& trees = require(doc, "trees", "<root>");
  if (!trees.is_array()) throw LoadError("trees", "expected an array");

  std::vector<RegressionTree> out;
  std::size_t max_feature = 0;
  bool any_split = false;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    std::string at = "trees[" + std::to_string(t) + "]";
    const json& tj = trees[t];
    if (!tj.is_object()) throw LoadError(at, "expected an object");
    RegressionTree tree;
    if (tj.contains("class")) {
      const json& c = tj["class"];
      if (!c.is_number_integer()) throw LoadError(at + ".class", "expected an integer");
      tree.target_class = c.get<int>();
    }
    const json& nodes = require(tj, "nodes", at);
    if (!nodes.is_array()) throw LoadError(at + ".nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::string nat = at + ".nodes[" + std::to_string(i) + "]";
      const json& n = nodes[i];
      if (!n.is_object()) throw LoadError(nat, "expected an object");
      if (n.contains("leaf")) {
        tree.nodes.emplace_back(TreeLeaf{as_number(n["leaf"], nat + ".leaf")});
        continue;
      }
      TreeSplit s;
      s.feature = as_index(require(n, "feat", nat), nat + ".feat");
      s.threshold = as_number(require(n, "thresh", nat), nat + ".thresh");
      s.left = as_index(require(n, "left", nat), nat + ".left");
      s.right = as_index(require(n, "right", nat), nat + ".right");
      max_feature = std::max(max_feature, s.feature);
      any_split = true;
      tree.nodes.emplace_back(s);
    }
    out.push_back(std::move(tree));
  }
  std::size_t d = any_split ? max_feature + 1 : 1;
  if (doc.contains("d")) d = as_index(doc["d"], "d");
  return std::make_shared<GbdtModel>(k, d, std::move(out));
}

std::shared_ptr<const Model> parse_external(const json& doc) {
  const json& cmd = require(doc, "command", "<root>");
  if (!cmd.is_array() || cmd.empty()) {
    throw LoadError("command", "expected a non-empty array of strings");
  }
  std::vector<std::string> argv;
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    if (!cmd[i].is_string()) {
      throw LoadError("command[" + std::to_string(i) + "]", "expected a string");
    }
    argv.push_back(cmd[i].get<std::string>());
  }
  return std::make_shared<ExternalProcessModel>(std::move(argv));
}

json bounds_to_json(const DomainBounds& bounds) {
  auto side = [&](bool upper) {
    json arr = json::array();
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      auto v = upper ? bounds.upper(i) : bounds.lower(i);
      arr.push_back(v ? json(*v) : json());
    }
    return arr;
  };
  return json{{"lower", side(false)}, {"upper", side(true)}};
}

}  // namespace

LoadedModel parse_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw LoadError("<json>", e.what());
  }
  if (!doc.is_object()) throw LoadError("<root>", "expected an object");
  const json& type = require(doc, "type", "<root>");
  if (!type.is_string()) throw LoadError("type", "expected a string");
  std::string t = type.get<std::string>();

  LoadedModel out;
  try {
    if (t == "radial") {
      out.model = parse_radial(doc);
    } else if (t == "linear") {
      out.model = parse_linear(doc);
    } else if (t == "mlp") {
      out.model = parse_mlp(doc);
    } else if (t == "gbdt") {
      out.model = parse_gbdt(doc);
    } else if (t == "external") {
      out.model = parse_external(doc);
    } else {
      throw LoadError("type", "unknown model type \"" + t + "\"");
    }
  } catch (const LoadError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw LoadError("<root>", e.what());
  }
  out.bounds = parse_bounds(doc, out.model->dimension());
  return out;
}

LoadedModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), "cannot open model file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_model(ss.str());
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ":" + e.where(),
                    std::string(e.what()).substr(e.where().size() + 2));
  }
}

Oracle load_model(const std::filesystem::path& path) {
  LoadedModel m = load_model_file(path);
  return Oracle(std::move(m.model), std::move(m.bounds));
}

std::string model_to_json(const Model& model, const DomainBounds& bounds) {
  json doc;
  if (const auto* r = dynamic_cast<const RadialModel*>(&model)) {
    doc = {{"type", "radial"}, {"r2", r->radius_squared()}};
    if (r->dimension() != 0) doc["d"] = r->dimension();
  } else if (const auto* l = dynamic_cast<const LinearModel*>(&model)) {
    doc = {{"type", "linear"}, {"w", l->weights()}, {"b", l->bias()}};
  } else if (const auto* m = dynamic_cast<const MlpModel*>(&model)) {
    json layers = json::array();
    for (const DenseLayer& layer : m->layers()) {
      json rows = json::array();
      for (std::size_t r = 0; r < layer.rows; ++r) {
        auto first = layer.weights.begin() +
                     static_cast<std::ptrdiff_t>(r * layer.cols);
        rows.push_back(std::vector<double>(
            first, first + static_cast<std::ptrdiff_t>(layer.cols)));
      }
      layers.push_back({{"w", rows},
                        {"b", layer.bias},
                        {"act", std::string(activation_name(layer.activation))}});
    }
    doc = {{"type", "mlp"}, {"layers", layers}};
  } else if (const auto* g = dynamic_cast<const GbdtModel*>(&model)) {
    json trees = json::array();
    for (const RegressionTree& tree : g->trees()) {
      json nodes = json::array();
      for (const TreeNode& node : tree.nodes) {
        if (const auto* leaf = std::get_if<TreeLeaf>(&node)) {
          nodes.push_back({{"leaf", leaf->value}});
        } else {
          const auto& s = std::get<TreeSplit>(node);
          nodes.push_back({{"feat", s.feature},
                           {"thresh", s.threshold},
                           {"left", s.left},
                           {"right", s.right}});
        }
      }
      trees.push_back({{"class", tree.target_class}, {"nodes", nodes}});
    }
    doc = {{"type", "gbdt"},
           {"k", g->num_classes()},
           {"d", g->dimension()},
           {"trees", trees}};
  } else {
    throw InvalidInput("model_to_json: unsupported model kind '" +
                       std::string(model.kind()) + "'");
  }
  if (!bounds.is_unbounded()) doc["bounds"] = bounds_to_json(bounds);
  return doc.dump(2) + "\n";
}

namespace builtin {

std::shared_ptr<const RadialModel> radial(std::size_t d) {
  return std::make_shared<RadialModel>(RadialModel::kDefaultRadiusSquared, d);
}

std::shared_ptr<const LinearModel> half_space(std::size_t d) {
  if (d == 0) throw InvalidInput("half_space: d must be positive");
  std::vector<double> w(d, 0.0);
  w[0] = 1.0;
  return std::make_shared<LinearModel>(std::move(w), 0.5);
}

std::shared_ptr<const GbdtModel> two_stump_gbdt() {
  // Score: -1 per feature at or below 0.6, +0.5 per feature above it.
  // Only the quadrant where both exceed 0.6 sums to >= 0.
  auto stump = [](std::size_t feature) {
    RegressionTree t;
    t.target_class = 0;
    t.nodes = {TreeSplit{feature, 0.6, 1, 2}, TreeLeaf{-1.0}, TreeLeaf{0.5}};
    return t;
  };
  return std::make_shared<GbdtModel>(
      2, 2, std::vector<RegressionTree>{stump(0), stump(1)});
}

std::shared_ptr<const MlpModel> three_class_planes() {
  DenseLayer l;
  l.rows = 3;
  l.cols = 2;
  l.weights = {0.0, 0.0,  //
               1.0, 0.0,  //
               0.0, 1.0};
  l.bias = {0.0, -0.5, -0.5};
  l.activation = Activation::kIdentity;
  return std::make_shared<MlpModel>(std::vector<DenseLayer>{l});
}

std::shared_ptr<const MlpModel> identity_mlp(std::size_t d) {
  if (d < 2) throw InvalidInput("identity_mlp: d must be at least 2");
  DenseLayer l;
  l.rows = d;
  l.cols = d;
  l.weights.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) l.weights[i * d + i] = 1.0;
  l.bias.assign(d, 0.0);
  return std::make_shared<MlpModel>(std::vector<DenseLayer>{l});
}

}  // namespace builtin

}  // namespace hardlabel
