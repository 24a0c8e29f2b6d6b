#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace inp::np {

/// Per-feature standardization. Features with (near) zero spread keep their
/// mean shift but use unit scale.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> std);

  /// rows x width, row-major.
  static Standardizer fit(std::span<const double> data, std::size_t width);

  std::size_t width() const { return mean_.size(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& std() const { return std_; }

  std::vector<double> normalize(std::span<const double> data) const;
  std::vector<double> denormalize(std::span<const double> data) const;

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
};

}  // namespace inp::np
