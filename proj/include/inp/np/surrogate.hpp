#pragma once

#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "inp/autodiff/adam.hpp"
#include "inp/np/model.hpp"
#include "inp/np/normalizer.hpp"

namespace inp::np {

inline constexpr int kSurrogateFormatVersion = 1;

/// Raw (unnormalized) training rows. Row i pairs theta[i] with x[i].
struct SampleSet {
  std::size_t theta_width = 0;
  std::size_t x_width = 0;
  std::vector<double> theta;
  std::vector<double> x;
  std::vector<int> scenario_ids;

  std::size_t size() const { return theta_width ? theta.size() / theta_width : 0; }
  void append(std::span<const double> theta_row, std::span<const double> x_row, int scenario_id);
  void append(const SampleSet& other);
  SampleSet subset(std::span<const std::size_t> rows) const;
};

/// Normalized inputs ready for the model.
struct NormalizedBatch {
  ad::Tensor theta;
  ad::Tensor x;

  std::size_t size() const { return theta.rows(); }
  NormalizedBatch rows(std::span<const std::size_t> idx) const;
};

/// Model + normalization statistics + optimizer state + step counter.
class Surrogate {
 public:
  explicit Surrogate(NpArchitecture arch, ad::AdamConfig adam = {});

  const NpArchitecture& arch() const { return model_->arch(); }
  LatentModel& model() { return *model_; }
  const LatentModel& model() const { return *model_; }
  ad::Adam& optimizer() { return *adam_; }

  /// Refits theta/x statistics on `data`.
  void fit_normalizers(const SampleSet& data);
  bool has_normalizers() const { return theta_norm_.width() != 0; }
  const Standardizer& theta_norm() const { return theta_norm_; }
  const Standardizer& x_norm() const { return x_norm_; }

  NormalizedBatch normalize(const SampleSet& data) const;
  ad::Tensor normalize_theta(std::span<const double> raw) const;

  std::int64_t steps() const { return steps_; }
  void add_steps(std::int64_t n) { steps_ += n; }

  /// Parameter values in creation order, for snapshot/restore.
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

  nlohmann::json to_json() const;
  static std::unique_ptr<Surrogate> from_json(const nlohmann::json& j);

 private:
  std::unique_ptr<LatentModel> model_;
  std::unique_ptr<ad::Adam> adam_;
  Standardizer theta_norm_;
  Standardizer x_norm_;
  std::int64_t steps_ = 0;
};

}  // namespace inp::np
