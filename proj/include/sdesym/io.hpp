#pragma once

#include <fstream>

#include <json.hpp>

#include "sdesym/invariants.hpp"
#include "sdesym/model.hpp"
#include "sdesym/parser.hpp"
#include "sdesym/reduction.hpp"
#include "sdesym/symmetry.hpp"

namespace sdesym {

using Json = nlohmann::ordered_json;

namespace io {

inline Json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Json j;
  in >> j;
  return j;
}

inline void save_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

inline ParseContext context_for(const ItoSDE& sde,
                                const std::string& prefix = "x") {
  ParseContext ctx;
  ctx.n = sde.n;
  ctx.m = sde.m;
  ctx.state_prefix = prefix;
  for (const auto& [k, v] : sde.constants) ctx.constants.insert(k);
  return ctx;
}

inline SampleDomain sample_box_from_json(const Json& j, int n, int m) {
  SampleDomain d = SampleDomain::defaults(n, m);
  if (j.contains("t")) d.t_range = {j["t"][0], j["t"][1]};
  if (j.contains("x")) {
    d.x_ranges.clear();
    for (const auto& r : j["x"])
      d.x_ranges.push_back({r[0].get<double>(), r[1].get<double>()});
  }
  if (j.contains("w")) {
    d.w_ranges.clear();
    for (const auto& r : j["w"])
      d.w_ranges.push_back({r[0].get<double>(), r[1].get<double>()});
  }
  if (j.contains("samples")) d.samples = j["samples"];
  return d;
}

inline Json sample_box_to_json(const SampleDomain& d) {
  Json j;
  j["t"] = {d.t_range[0], d.t_range[1]};
  j["x"] = Json::array();
  for (const auto& r : d.x_ranges) j["x"].push_back({r[0], r[1]});
  j["w"] = Json::array();
  for (const auto& r : d.w_ranges) j["w"].push_back({r[0], r[1]});
  j["samples"] = d.samples;
  return j;
}

/// Model document: {name, n, m, constants, drift: [expr], diffusion:
/// [[expr]] (row-major, n rows of m), sample_box?, notes?}.
inline ItoSDE model_from_json(const Json& j) {
  ItoSDE sde;
  sde.name = j.value("name", "");
  sde.n = j.at("n");
  sde.m = j.at("m");
  if (j.contains("constants"))
    for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it)
      sde.constants[it.key()] = it.value().get<double>();
  ParseContext ctx = context_for(sde);
  ctx.n = sde.n;
  ctx.m = sde.m;
  for (const auto& s : j.at("drift"))
    sde.f.push_back(parse(s.get<std::string>(), ctx));
  for (const auto& row : j.at("diffusion")) {
    ExprVec r;
    for (const auto& s : row) r.push_back(parse(s.get<std::string>(), ctx));
    sde.sigma.push_back(std::move(r));
  }
  if (j.contains("var_names"))
    for (const auto& s : j["var_names"])
      sde.var_names.push_back(s.get<std::string>());
  if (j.contains("sample_box"))
    sde.sample_box = sample_box_from_json(j["sample_box"], sde.n, sde.m);
  sde.notes = j.value("notes", "");
  sde.validate();
  return sde;
}

inline Json model_to_json(const ItoSDE& sde) {
  Json j;
  j["name"] = sde.name;
  j["n"] = sde.n;
  j["m"] = sde.m;
  j["constants"] = Json::object();
  for (const auto& [k, v] : sde.constants) j["constants"][k] = v;
  j["drift"] = Json::array();
  for (const auto& e : sde.f) j["drift"].push_back(to_string(e));
  j["diffusion"] = Json::array();
  for (const auto& row : sde.sigma) {
    Json r = Json::array();
    for (const auto& e : row) r.push_back(to_string(e));
    j["diffusion"].push_back(r);
  }
  if (!sde.var_names.empty()) j["var_names"] = sde.var_names;
  if (sde.sample_box) j["sample_box"] = sample_box_to_json(*sde.sample_box);
  if (!sde.notes.empty()) j["notes"] = sde.notes;
  return j;
}

inline Json strat_to_json(const StratSDE& s) {
  Json j;
  j["name"] = s.name;
  j["form"] = "stratonovich";
  j["n"] = s.n;
  j["m"] = s.m;
  j["constants"] = Json::object();
  for (const auto& [k, v] : s.constants) j["constants"][k] = v;
  j["drift"] = Json::array();
  for (const auto& e : s.b) j["drift"].push_back(to_string(e));
  j["diffusion"] = Json::array();
  for (const auto& row : s.sigma) {
    Json r = Json::array();
    for (const auto& e : row) r.push_back(to_string(e));
    j["diffusion"].push_back(r);
  }
  return j;
}

inline StratSDE strat_from_json(const Json& j) {
  ItoSDE tmp = model_from_json([&] {
    Json copy = j;
    copy.erase("form");
    return copy;
  }());
  StratSDE s;
  s.name = tmp.name;
  s.n = tmp.n;
  s.m = tmp.m;
  s.b = tmp.f;
  s.sigma = tmp.sigma;
  s.constants = tmp.constants;
  s.var_names = tmp.var_names;
  s.sample_box = tmp.sample_box;
  s.notes = tmp.notes;
  return s;
}

/// Vector-field document: {name, phi: [expr], R: [[real]]}.
inline SimpleVectorField field_from_json(const Json& j, const ItoSDE& sde) {
  SimpleVectorField X;
  X.name = j.value("name", "");
  ParseContext ctx = context_for(sde);
  for (const auto& s : j.at("phi"))
    X.phi.push_back(parse(s.get<std::string>(), ctx));
  for (const auto& row : j.at("R")) {
    std::vector<double> r;
    for (const auto& v : row) r.push_back(v.get<double>());
    X.R.push_back(std::move(r));
  }
  X.validate();
  return X;
}

inline Json field_to_json(const SimpleVectorField& X) {
  Json j;
  j["name"] = X.name;
  j["phi"] = Json::array();
  for (const auto& e : X.phi) j["phi"].push_back(to_string(e));
  j["R"] = X.R;
  return j;
}

/// Invariant document: {name, J: expr, kind?, level_sets?: [{c, sampler?}]}.
struct InvariantDoc {
  InvariantCandidate candidate;
  std::vector<LevelSetSpec> levels;
};

inline InvariantKind kind_from_string(const std::string& s) {
  if (s == "full") return InvariantKind::Full;
  if (s == "phase") return InvariantKind::Phase;
  if (s == "configurational") return InvariantKind::Configurational;
  throw std::invalid_argument("unknown invariant kind: " + s);
}

inline InvariantDoc invariant_from_json(const Json& j, const ItoSDE& sde) {
  InvariantDoc doc;
  doc.candidate.name = j.value("name", "");
  ParseContext ctx = context_for(sde);
  doc.candidate.J = parse(j.at("J").get<std::string>(), ctx);
  if (j.contains("kind"))
    doc.candidate.declared_kind = kind_from_string(j["kind"]);
  doc.candidate.validate();
  if (j.contains("level_sets")) {
    for (const auto& ls : j["level_sets"]) {
      LevelSetSpec spec;
      spec.J = doc.candidate.J;
      spec.c = ls.at("c");
      if (ls.contains("count")) spec.count = ls["count"];
      if (ls.contains("sampler") && ls["sampler"].value("type", "") ==
                                        "parametrization") {
        Parametrization pm;
        ParseContext uctx;
        uctx.n = static_cast<int>(ls["sampler"].at("box").size());
        uctx.m = 0;
        uctx.state_prefix = "u";
        for (const auto& [k, v] : sde.constants) uctx.constants.insert(k);
        for (const auto& s : ls["sampler"].at("point"))
          pm.point.push_back(parse(s.get<std::string>(), uctx));
        for (const auto& r : ls["sampler"].at("box"))
          pm.box.push_back({r[0].get<double>(), r[1].get<double>()});
        spec.sampler = std::move(pm);
      } else {
        NewtonProjection np;
        if (ls.contains("sampler") && ls["sampler"].contains("box")) {
          for (const auto& r : ls["sampler"]["box"])
            np.box.push_back({r[0].get<double>(), r[1].get<double>()});
        } else {
          for (const auto& r : sde.domain().x_ranges) np.box.push_back(r);
        }
        spec.sampler = std::move(np);
      }
      doc.levels.push_back(std::move(spec));
    }
  }
  return doc;
}

/// Transform document: {name?, forward: [expr in x,t,w], inverse: [expr in
/// y,t,w], sample_box?}.
inline Transform transform_from_json(const Json& j, const ItoSDE& sde) {
  Transform T;
  T.name = j.value("name", "");
  ParseContext fwd = context_for(sde, "x");
  ParseContext inv = context_for(sde, "y");
  for (const auto& s : j.at("forward"))
    T.forward.push_back(parse(s.get<std::string>(), fwd));
  for (const auto& s : j.at("inverse"))
    T.inverse.push_back(parse(s.get<std::string>(), inv));
  if (j.contains("sample_box"))
    T.sample_box = sample_box_from_json(j["sample_box"], sde.n, sde.m);
  return T;
}

inline Json binding_to_json(const Binding& b) {
  Json j;
  j["t"] = b.t;
  j["x"] = b.x;
  j["w"] = b.w;
  return j;
}

inline Json family_to_json(const FamilyVerdict& f) {
  Json j;
  j["status"] = to_string(f.status);
  j["max_abs_residual"] = f.max_abs;
  if (f.witness) {
    j["witness"] = binding_to_json(*f.witness);
    j["witness_value"] = *f.witness_value;
  }
  return j;
}

inline Json verdict_to_json(const SymmetryVerdict& v) {
  Json j;
  j["pass"] = v.pass();
  j["classification"] = to_string(v.classification);
  j["drift_residuals"] = family_to_json(v.drift);
  j["diffusion_residuals"] = family_to_json(v.diffusion);
  j["max_abs_residual"] = v.max_abs();
  return j;
}

}  // namespace io
}  // namespace sdesym
