#pragma once

#include <map>
#include <string>

#include "selgauss/field_model.hpp"
#include "selgauss/seismic.hpp"

namespace selgauss::cli {

struct FieldPreset {
  FieldParams params;
  int default_grid_rows = 64;
  int default_grid_cols = 64;
  // Default conditioning sites/values for the 1-D predictive bundles.
  std::vector<int> obs_sites;
  std::vector<double> obs_values;
};

inline FieldParams field_params(double gamma, double d_h, double d_v, const std::string& set) {
  FieldParams p;
  p.mu = 0;
  p.sigma2 = 1;
  p.gamma = gamma;
  p.corr = CorrelationModel{d_h, d_v, Kernel::gauss};
  p.set_template = parse_coordinate_set(set);
  return p;
}

inline const std::map<std::string, FieldPreset>& field_presets() {
  static const std::map<std::string, FieldPreset> presets = [] {
    std::map<std::string, FieldPreset> m;
    m["table1-case1"] = {field_params(0.8000, 2.0, 2.0, "(-inf,-0.3]U[0.3,inf)"), 64, 64, {}, {}};
    m["table1-case2"] = {field_params(0.6500, 6.0, 0.85, "(-inf,-0.3]U[0.3,inf)"), 64, 64, {}, {}};
    m["table1-case3"] = {field_params(0.9250, 2.0, 0.60, "(-inf,-0.85]U[0.8,inf)"), 64, 64, {}, {}};
    m["table1-case4"] = {field_params(0.9995, 3.0, 3.0, "[-0.45,-0.2]U[-0.1,0.1]U[0.2,0.45]"), 64, 64, {}, {}};
    m["table1-case5"] = {field_params(0.7000, 2.0, 2.0, "(-inf,-0.7]U[-0.1,2.5]"), 64, 64, {}, {}};
    m["table1-case6"] = {field_params(0.7000, 2.0, 2.0, "(-inf,-1.75]U[-0.5,0.5]U[1.75,inf)"), 64, 64, {}, {}};
    m["table2-case1"] = {field_params(0.900, 4.0, 4.0, "(-inf,-0.4]U[0.4,inf)"), 1, 128, {16, 112}, {2.5, -2.5}};
    m["table2-case2"] = {field_params(0.999, 4.0, 4.0, "[-0.65,-0.4]U[-0.12,0.12]U[0.4,0.65]"), 1, 128, {16, 112}, {0.55, -0.55}};
    m["table2-case3"] = {field_params(0.600, 4.0, 4.0, "(-inf,-1.5]U[-0.5,0.5]"), 1, 128, {16, 112}, {1.0, -3.0}};
    m["table2-case4"] = {field_params(0.700, 4.0, 4.0, "(-inf,-1.75]U[-0.5,0.5]U[1.75,inf)"), 1, 128, {16, 112}, {3.0, -3.0}};
    return m;
  }();
  return presets;
}

inline FieldPreset find_field_preset(const std::string& name) {
  const auto& presets = field_presets();
  const auto it = presets.find(name);
  if (it == presets.end()) throw DomainError("unknown preset '" + name + "'");
  return it->second;
}

// Fitted AVO parameter bundles for the bundled demo workflow.
inline SeismicPrior find_seismic_prior(const std::string& model) {
  if (model == "selection") return demo_selection_prior();
  if (model == "gaussian") return demo_gaussian_prior();
  throw DomainError("unknown model '" + model + "' (use selection or gaussian)");
}

}  // namespace selgauss::cli
