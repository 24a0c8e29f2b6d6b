#pragma once

#include <memory>

#include "inp/np/architecture.hpp"
#include "inp/np/gaussian.hpp"
#include "inp/np/layers.hpp"

namespace inp::np {

/// Common surface of NP and STNP. Inputs are normalized; theta is
/// (n x theta_width), x is (n x x_width).
///
/// Encoding is split into a per-row representation and a head applied to the
/// batch mean of representations, so callers can aggregate incrementally.
class LatentModel {
 public:
  explicit LatentModel(NpArchitecture arch);
  virtual ~LatentModel() = default;
  LatentModel(const LatentModel&) = delete;
  LatentModel& operator=(const LatentModel&) = delete;

  const NpArchitecture& arch() const { return arch_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  virtual std::size_t representation_width() const = 0;
  /// (n x representation_width).
  virtual ad::Tensor represent(const ad::Tensor& theta, const ad::Tensor& x,
                               const ad::Binder& bind) const = 0;
  /// Latent Gaussian from an aggregated (1 x representation_width) row.
  virtual GaussianDiagTensor latent(const ad::Tensor& r, const ad::Binder& bind) const = 0;
  /// z: (S x latent_width), theta: (S x theta_width) -> means (S x x_width).
  virtual ad::Tensor decode_mean(const ad::Tensor& z, const ad::Tensor& theta,
                                 const ad::Binder& bind) const = 0;

  /// latent(mean over rows of represent(theta, x)).
  GaussianDiagTensor encode(const ad::Tensor& theta, const ad::Tensor& x, const ad::Binder& bind) const;
  /// (1 x x_width), floored at kStdFloor.
  ad::Tensor obs_std(const ad::Binder& bind) const;

 protected:
  void check_inputs(const ad::Tensor& theta, const ad::Tensor& x) const;
  void init_obs_std();

  NpArchitecture arch_;
  ParameterSet params_;
  ad::Parameter* obs_raw_ = nullptr;
};

class NpModel final : public LatentModel {
 public:
  explicit NpModel(NpArchitecture arch);

  std::size_t representation_width() const override { return arch_.encoder_widths.back(); }
  ad::Tensor represent(const ad::Tensor& theta, const ad::Tensor& x, const ad::Binder& bind) const override;
  GaussianDiagTensor latent(const ad::Tensor& r, const ad::Binder& bind) const override;
  ad::Tensor decode_mean(const ad::Tensor& z, const ad::Tensor& theta, const ad::Binder& bind) const override;

 private:
  Mlp encoder_;
  Linear mean_head_, std_head_;
  Mlp decoder_;
};

/// Temporal latent process: a graph-diffusion GRU over nodes feeds a state
/// GRU; per-step heads give q(z_t | x_{1:t}, theta). The decoder is an
/// autoregressive GRU over (z_t, theta, previous mean).
class StnpModel final : public LatentModel {
 public:
  explicit StnpModel(NpArchitecture arch);

  std::size_t representation_width() const override { return arch_.horizon * arch_.recurrent_width; }
  ad::Tensor represent(const ad::Tensor& theta, const ad::Tensor& x, const ad::Binder& bind) const override;
  GaussianDiagTensor latent(const ad::Tensor& r, const ad::Binder& bind) const override;
  ad::Tensor decode_mean(const ad::Tensor& z, const ad::Tensor& theta, const ad::Binder& bind) const override;

 private:
  DcgruCell node_cell_;
  GruCell plain_cell_;
  Linear state_proj_;
  GruCell state_cell_;
  Linear mean_head_, std_head_;
  GruCell dec_cell_;
  Linear dec_out_;
};

std::unique_ptr<LatentModel> make_model(const NpArchitecture& arch);

}  // namespace inp::np
