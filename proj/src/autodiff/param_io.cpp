#include "inp/autodiff/param_io.hpp"

#include <algorithm>

#include "inp/core/errors.hpp"

namespace inp::ad {

nlohmann::json parameters_to_json(std::span<const Parameter* const> params) {
  nlohmann::json map = nlohmann::json::object();
  for (const Parameter* p : params) {
    map[p->name()] = {{"shape", {p->shape().rows, p->shape().cols}},
                      {"data", std::vector<double>(p->value().begin(), p->value().end())}};
  }
  return {{"version", kParamFormatVersion}, {"params", std::move(map)}};
}

void parameters_from_json(const nlohmann::json& j, std::span<Parameter* const> params) {
  if (!j.contains("version") || j.at("version").get<int>() != kParamFormatVersion) {
    throw IoError("parameter map: unsupported format version");
  }
  const auto& map = j.at("params");
  for (Parameter* p : params) {
    if (!map.contains(p->name())) throw IoError("parameter map: missing " + p->name());
    const auto& entry = map.at(p->name());
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] != p->shape().rows || shape[1] != p->shape().cols) {
      throw IoError("parameter map: shape mismatch for " + p->name());
    }
    const auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != p->shape().size()) throw IoError("parameter map: size mismatch for " + p->name());
    auto dst = p->mutable_value();
    std::copy(data.begin(), data.end(), dst.begin());
  }
}

}  // namespace inp::ad
