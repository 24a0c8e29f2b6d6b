#include "inp/np/features.hpp"

#include "inp/core/errors.hpp"

namespace inp::np {

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "infectious") return FeatureKind::infectious;
  if (name == "spatial") return FeatureKind::spatial;
  throw ValidationError("unknown feature kind: " + name);
}

std::string to_string(FeatureKind kind) { return kind == FeatureKind::infectious ? "infectious" : "spatial"; }

std::vector<double> theta_features(const epi::Scenario& s, FeatureKind kind) {
  if (kind == FeatureKind::infectious) return {s.beta, s.epsilon};
  std::vector<double> out;
  for (std::size_t d = 0; d < s.nodes(); ++d) {
    out.push_back(s.beta);
    out.push_back(s.epsilon);
    out.push_back(static_cast<double>(s.e0[d] + s.i0[d]) / static_cast<double>(s.population[d]));
  }
  return out;
}

std::vector<double> x_features(const epi::Trajectory& tr, FeatureKind kind) {
  std::vector<double> out;
  if (kind == FeatureKind::infectious) {
    out.reserve(tr.horizon());
    for (std::size_t t = 1; t <= tr.horizon(); ++t) {
      double i = 0.0;
      for (std::size_t d = 0; d < tr.nodes(); ++d) i += static_cast<double>(tr.state(t, d, epi::kI));
      out.push_back(i);
    }
    return out;
  }
  out.reserve(tr.horizon() * tr.nodes() * 2);
  for (std::size_t t = 1; t <= tr.horizon(); ++t)
    for (std::size_t d = 0; d < tr.nodes(); ++d) {
      out.push_back(static_cast<double>(tr.state(t, d, epi::kI)));
      out.push_back(static_cast<double>(tr.incidence(t, d, epi::kSE)));
    }
  return out;
}

NpArchitecture default_architecture(FeatureKind kind, std::size_t horizon, std::size_t nodes,
                                    std::vector<double> transition) {
  NpArchitecture a;
  a.horizon = horizon;
  if (kind == FeatureKind::infectious) {
    a.kind = ModelKind::np;
    a.theta_dim = 2;
    a.x_dim = 1;
    a.nodes = 1;
    return a;
  }
  a.kind = ModelKind::stnp;
  a.theta_dim = 3;
  a.x_dim = 2;
  a.nodes = nodes;
  a.transition = std::move(transition);
  if (a.transition.empty()) {
    a.transition.assign(nodes * nodes, 0.0);
    for (std::size_t d = 0; d < nodes; ++d) a.transition[d * nodes + d] = 1.0;
  }
  return a;
}

}  // namespace inp::np
