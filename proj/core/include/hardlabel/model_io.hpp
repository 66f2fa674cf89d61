#ifndef HARDLABEL_MODEL_IO_HPP
#define HARDLABEL_MODEL_IO_HPP

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "hardlabel/models.hpp"
#include "hardlabel/oracle.hpp"

namespace hardlabel {

// Model files are JSON with a top-level "type":
//   radial:   {"type":"radial", "r2":0.4, "d":2}            (r2, d optional)
//   linear:   {"type":"linear", "w":[...], "b":0.5}
//   mlp:      {"type":"mlp", "layers":[{"w":[[...],...], "b":[...],
//              "act":"relu"|"tanh"|"identity"}, ...]}
//   gbdt:     {"type":"gbdt", "k":2, "d":2, "trees":[{"class":0,
//              "nodes":[{"feat":0,"thresh":0.5,"left":1,"right":2},
//                       {"leaf":-1.0}, ...]}]}               (d optional)
//   external: {"type":"external", "command":["prog", "arg", ...]}
// Any type may carry "bounds": {"lower": x | [..] | null, "upper": ...}.

struct LoadedModel {
  std::shared_ptr<const Model> model;
  DomainBounds bounds;
};

/// Parses a model document. Errors carry a JSON path such as
/// "trees[0].nodes[3].left".
LoadedModel parse_model(std::string_view json_text);
LoadedModel load_model_file(const std::filesystem::path& path);

/// Loads a model file into a fresh oracle with its counter at 0.
Oracle load_model(const std::filesystem::path& path);

/// Serialises a built-in model (not external) back to the file format.
std::string model_to_json(const Model& model, const DomainBounds& bounds = {});

// Built-in desk-scale fixtures, also emitted by `hardlabel gen-model`.
namespace builtin {

/// Radial model with r^2 = 0.4.
std::shared_ptr<const RadialModel> radial(std::size_t d = 0);
/// w = (1, 0, ..., 0), b = 0.5.
std::shared_ptr<const LinearModel> half_space(std::size_t d);
/// Two stumps on features 0 and 1 at 0.6; class 1 only when both exceed it.
std::shared_ptr<const GbdtModel> two_stump_gbdt();
/// Three classes from linear scores: 0 -> 0, 1 -> x0 - 0.5, 2 -> x1 - 0.5.
std::shared_ptr<const MlpModel> three_class_planes();
/// Identity weights, zero bias, identity activation: argmax of the input.
std::shared_ptr<const MlpModel> identity_mlp(std::size_t d);

}  // namespace builtin

}  // namespace hardlabel

#endif  // HARDLABEL_MODEL_IO_HPP
