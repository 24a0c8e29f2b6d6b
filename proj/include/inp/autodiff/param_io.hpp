#pragma once

#include <span>

#include <nlohmann/json.hpp>

#include "inp/autodiff/tensor.hpp"

namespace inp::ad {

inline constexpr int kParamFormatVersion = 1;

/// {"version": 1, "params": {name: {"shape": [r, c], "data": [...]}}}
nlohmann::json parameters_to_json(std::span<const Parameter* const> params);

/// Loads values by name. Every parameter must be present with a matching
/// shape; the version must equal kParamFormatVersion.
void parameters_from_json(const nlohmann::json& j, std::span<Parameter* const> params);

}  // namespace inp::ad
