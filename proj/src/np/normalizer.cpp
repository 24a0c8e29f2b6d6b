#include "inp/np/normalizer.hpp"

#include <cmath>

#include "inp/core/errors.hpp"

namespace inp::np {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> std)
    : mean_(std::move(mean)), std_(std::move(std)) {
  if (mean_.size() != std_.size()) throw ValidationError("standardizer: mean/std width mismatch");
  for (std::size_t j = 0; j < mean_.size(); ++j) {
    if (!std::isfinite(mean_[j]) || !std::isfinite(std_[j]) || !(std_[j] > 0.0)) {
      throw NumericalError("standardizer: statistics must be finite with positive scale");
    }
  }
}

Standardizer Standardizer::fit(std::span<const double> data, std::size_t width) {
  if (width == 0 || data.empty() || data.size() % width != 0) {
    throw ValidationError("standardizer: data is not a whole number of rows");
  }
  const std::size_t rows = data.size() / width;
  std::vector<double> mean(width, 0.0), var(width, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j) mean[j] += data[i * width + j];
  for (auto& m : mean) m /= static_cast<double>(rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      const double d = data[i * width + j] - mean[j];
      var[j] += d * d;
    }
  std::vector<double> sd(width);
  for (std::size_t j = 0; j < width; ++j) {
    const double s = rows > 1 ? std::sqrt(var[j] / static_cast<double>(rows - 1)) : 0.0;
    sd[j] = s > 1e-8 * std::max(1.0, std::abs(mean[j])) ? s : 1.0;
  }
  return Standardizer(std::move(mean), std::move(sd));
}

std::vector<double> Standardizer::normalize(std::span<const double> data) const {
  if (data.size() % width() != 0) throw ValidationError("standardizer: width mismatch");
  std::vector<double> out(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const std::size_t j = k % width();
    out[k] = (data[k] - mean_[j]) / std_[j];
  }
  return out;
}

std::vector<double> Standardizer::denormalize(std::span<const double> data) const {
  if (data.size() % width() != 0) throw ValidationError("standardizer: width mismatch");
  std::vector<double> out(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const std::size_t j = k % width();
    out[k] = data[k] * std_[j] + mean_[j];
  }
  return out;
}

nlohmann::json Standardizer::to_json() const { return {{"mean", mean_}, {"std", std_}}; }

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  return Standardizer(j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>());
}

}  // namespace inp::np
