#pragma once

#include <string>
#include <vector>

#include "inp/epi/seir.hpp"
#include "inp/np/architecture.hpp"

namespace inp::np {

/// How a (Scenario, Trajectory) pair becomes a model row.
///   infectious: theta = (beta, epsilon), x = I_t summed over nodes, t=1..T
///   spatial:    theta per node = (beta, epsilon, seeded fraction),
///               x per step per node = (I, new infections)
enum class FeatureKind { infectious, spatial };

FeatureKind feature_kind_from_string(const std::string& name);
std::string to_string(FeatureKind kind);

std::vector<double> theta_features(const epi::Scenario& scenario, FeatureKind kind);
std::vector<double> x_features(const epi::Trajectory& trajectory, FeatureKind kind);

/// Default architecture for a feature kind at the given horizon and graph.
NpArchitecture default_architecture(FeatureKind kind, std::size_t horizon, std::size_t nodes = 1,
                                    std::vector<double> transition = {});

}  // namespace inp::np
