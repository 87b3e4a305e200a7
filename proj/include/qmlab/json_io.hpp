#pragma once

// JSON forms of the fixture types.
//
//   Element:  {"dims":[2,1], "blocks":[[[re,im],...], ...]}   (row-major)
//   Tower:    {"levels":[[1],[2]], "mults":[[[2]]], "top_trace":[0.5], "beta":[...]}
//   Ideal:    {"top_support":[0]}
//   Space:    {"labels":["a","b"], "dist":[[0,1],[1,0]]}
//   Subset:   ["a","b"]   (labels)

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qmlab/af_ideals.hpp"
#include "qmlab/algebra.hpp"
#include "qmlab/commutative.hpp"
#include "qmlab/tower.hpp"

namespace qmlab {

using Json = nlohmann::json;

inline Json element_to_json(const Element& e) {
  Json blocks = Json::array();
  for (const auto& b : e.blocks()) {
    Json entries = Json::array();
    for (Eigen::Index r = 0; r < b.rows(); ++r)
      for (Eigen::Index c = 0; c < b.cols(); ++c) entries.push_back({b(r, c).real(), b(r, c).imag()});
    blocks.push_back(std::move(entries));
  }
  return {{"dims", e.shape().dims()}, {"blocks", std::move(blocks)}};
}

inline Element element_from_json(const Json& j) {
  try {
    const BlockShape shape(j.at("dims").get<std::vector<int>>());
    const Json& blocks = j.at("blocks");
    if (!blocks.is_array() || static_cast<int>(blocks.size()) != shape.block_count())
      throw InputError("element json: block count does not match dims");
    Element e = Element::zero(shape);
    for (int i = 0; i < shape.block_count(); ++i) {
      const Json& entries = blocks[static_cast<std::size_t>(i)];
      const int d = shape.dim(i);
      if (!entries.is_array() || static_cast<int>(entries.size()) != d * d)
        throw InputError("element json: block " + std::to_string(i) + " needs " + std::to_string(d * d) + " entries");
      for (int k = 0; k < d * d; ++k) {
        const Json& z = entries[static_cast<std::size_t>(k)];
        e.block(i)(k / d, k % d) = Complex(z.at(0).get<double>(), z.at(1).get<double>());
      }
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("element json: ") + ex.what());
  }
}

inline Json tower_to_json(const TowerSpec& t) {
  return {{"levels", t.levels}, {"mults", t.mults}, {"top_trace", t.top_trace}};
}

inline TowerSpec tower_spec_from_json(const Json& j) {
  try {
    TowerSpec t;
    t.levels = j.at("levels").get<std::vector<std::vector<int>>>();
    t.mults = j.at("mults").get<std::vector<std::vector<std::vector<int>>>>();
    t.top_trace = j.at("top_trace").get<std::vector<double>>();
    return t;
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("tower json: ") + ex.what());
  }
}

/// The optional "beta" array of a tower config.
inline std::optional<BetaSequence> beta_from_json(const Json& j) {
  if (!j.contains("beta")) return std::nullopt;
  return BetaSequence(j.at("beta").get<std::vector<double>>());
}

inline std::vector<int> ideal_support_from_json(const Json& j) {
  try {
    return j.at("top_support").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("ideal json: ") + ex.what());
  }
}

inline Json space_to_json(const FiniteMetricSpace& X) { return {{"labels", X.labels()}, {"dist", X.dist()}}; }

inline FiniteMetricSpace space_from_json(const Json& j) {
  try {
    return {j.at("labels").get<std::vector<std::string>>(), j.at("dist").get<std::vector<std::vector<double>>>()};
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("space json: ") + ex.what());
  }
}

inline PointSet subset_from_json(const FiniteMetricSpace& X, const Json& labels) {
  PointSet s;
  for (const auto& l : labels) s.push_back(X.index_of(l.get<std::string>()));
  return normalize_set(X, std::move(s));
}

inline Json subset_to_json(const FiniteMetricSpace& X, const PointSet& s) {
  Json out = Json::array();
  for (int p : s) out.push_back(X.labels()[static_cast<std::size_t>(p)]);
  return out;
}

inline Json function_to_json(const LipFunction& f) {
  Json out = Json::array();
  for (const auto& v : f) out.push_back({v.real(), v.imag()});
  return out;
}

/// Accepts [[re,im],...] or plain real numbers.
inline LipFunction function_from_json(const Json& j) {
  LipFunction f;
  for (const auto& v : j) {
    if (v.is_array()) f.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    else f.emplace_back(v.get<double>(), 0.0);
  }
  return f;
}

inline Json repair_report_json(const FiniteMetricSpace& X, const RepairResult& r, const LipFunction& f) {
  const auto& c = r.certificate;
  return {{"eps", r.eps},
          {"hausdorff", r.hausdorff},
          {"near_set", subset_to_json(X, r.near_set)},
          {"f", function_to_json(f)},
          {"h", function_to_json(r.h)},
          {"certificate",
           {{"vanishes_on_union", c.vanishes},
            {"lip_re_le_1", c.lip_re_ok},
            {"lip_im_le_1", c.lip_im_ok},
            {"sup_norm_le_1", c.sup_norm_ok},
            {"distance_le_8eps", c.distance_ok}}},
          {"measured",
           {{"vanish_max", c.vanish_max},
            {"lip_re", c.lip_re},
            {"lip_im", c.lip_im},
            {"sup_norm", c.sup_norm},
            {"distance", c.distance},
            {"distance_bound", c.distance_bound},
            {"distance_over_eps", c.distance / r.eps}}},
          {"note", r.note},
          {"passed", c.passed()}};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(path + ": " + ex.what());
  }
}

}  // namespace qmlab
