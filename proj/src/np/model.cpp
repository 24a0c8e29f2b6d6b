#include "inp/np/model.hpp"

#include <cmath>

#include "inp/autodiff/ops.hpp"
#include "inp/core/errors.hpp"

namespace inp::np {

using ad::Binder;
using ad::Tensor;

namespace {

Tensor positive(const Tensor& raw) { return ad::add_scalar(ad::softplus(raw), kStdFloor); }

}  // namespace

LatentModel::LatentModel(NpArchitecture arch) : arch_(std::move(arch)) { arch_.validate(); }

void LatentModel::init_obs_std() {
  if (arch_.obs_noise != ObsNoise::learned) return;
  // softplus(raw) = 0.5
  const double raw = std::log(std::expm1(0.5));
  obs_raw_ = &params_.add("obs_std_raw", {1, arch_.x_width()}, std::vector<double>(arch_.x_width(), raw));
}

Tensor LatentModel::obs_std(const Binder& bind) const {
  if (obs_raw_ == nullptr) return Tensor::filled({1, arch_.x_width()}, std::max(arch_.fixed_obs_std, kStdFloor));
  return positive(bind(*obs_raw_));
}

void LatentModel::check_inputs(const Tensor& theta, const Tensor& x) const {
  if (theta.rows() == 0 || theta.empty()) throw ValidationError("encode: empty batch");
  if (theta.cols() != arch_.theta_width() || x.cols() != arch_.x_width() || theta.rows() != x.rows()) {
    throw ValidationError("encode: expected theta (n," + std::to_string(arch_.theta_width()) + ") and x (n," +
                          std::to_string(arch_.x_width()) + "), got " + theta.shape().str() + " and " +
                          x.shape().str());
  }
}

GaussianDiagTensor LatentModel::encode(const Tensor& theta, const Tensor& x, const Binder& bind) const {
  return latent(ad::mean_rows(represent(theta, x, bind)), bind);
}

NpModel::NpModel(NpArchitecture arch) : LatentModel(std::move(arch)) {
  if (arch_.kind != ModelKind::np) throw ValidationError("NpModel: architecture kind is not np");
  Rng rng(stream_seed(arch_.init_seed, "np-init"));
  const auto& ew = arch_.encoder_widths;
  const std::vector<std::size_t> enc_hidden(ew.begin(), ew.end() - 1);
  encoder_ = Mlp(params_, "enc", arch_.theta_width() + arch_.x_width(), enc_hidden, ew.back(), rng);
  mean_head_ = Linear(params_, "enc.mean", ew.back(), arch_.latent_dim, rng);
  std_head_ = Linear(params_, "enc.std", ew.back(), arch_.latent_dim, rng);
  decoder_ = Mlp(params_, "dec", arch_.latent_dim + arch_.theta_width(), arch_.decoder_widths,
                 arch_.x_width(), rng);
  init_obs_std();
}

Tensor NpModel::represent(const Tensor& theta, const Tensor& x, const Binder& bind) const {
  check_inputs(theta, x);
  return encoder_(ad::concat({theta, x}, 1), bind);
}

GaussianDiagTensor NpModel::latent(const Tensor& r, const Binder& bind) const {
  return {mean_head_(r, bind), positive(std_head_(r, bind))};
}

Tensor NpModel::decode_mean(const Tensor& z, const Tensor& theta, const Binder& bind) const {
  if (z.cols() != arch_.latent_width() || theta.cols() != arch_.theta_width() || z.rows() != theta.rows()) {
    throw ValidationError("decode: z " + z.shape().str() + " theta " + theta.shape().str());
  }
  return decoder_(ad::concat({z, theta}, 1), bind);
}

StnpModel::StnpModel(NpArchitecture arch) : LatentModel(std::move(arch)) {
  if (arch_.kind != ModelKind::stnp) throw ValidationError("StnpModel: architecture kind is not stnp");
  Rng rng(stream_seed(arch_.init_seed, "stnp-init"));
  const std::size_t node_in = arch_.theta_dim + arch_.x_dim;
  if (arch_.plain_node_cell) {
    plain_cell_ = GruCell(params_, "enc.node", node_in, arch_.node_hidden, rng);
  } else {
    node_cell_ = DcgruCell(params_, "enc.node", node_in, arch_.node_hidden, arch_.diffusion_order, arch_.nodes,
                           arch_.transition, rng);
  }
  state_proj_ = Linear(params_, "enc.proj", arch_.nodes * arch_.node_hidden, arch_.state_hidden, rng);
  state_cell_ = GruCell(params_, "enc.state", arch_.state_hidden, arch_.recurrent_width, rng);
  mean_head_ = Linear(params_, "enc.mean", arch_.recurrent_width, arch_.latent_dim, rng);
  std_head_ = Linear(params_, "enc.std", arch_.recurrent_width, arch_.latent_dim, rng);
  dec_cell_ = GruCell(params_, "dec.cell", arch_.latent_dim + arch_.theta_width() + arch_.step_width(),
                      arch_.recurrent_width, rng);
  dec_out_ = Linear(params_, "dec.out", arch_.recurrent_width, arch_.step_width(), rng);
  init_obs_std();
}

Tensor StnpModel::represent(const Tensor& theta, const Tensor& x, const Binder& bind) const {
  check_inputs(theta, x);
  const std::size_t b = theta.rows(), d = arch_.nodes, f = arch_.x_dim;
  const Tensor theta_nodes = ad::reshape(theta, {b * d, arch_.theta_dim});
  Tensor h_node = Tensor::zeros({b * d, arch_.node_hidden});
  Tensor h_state = Tensor::zeros({b, arch_.recurrent_width});
  std::vector<Tensor> steps;
  steps.reserve(arch_.horizon);
  for (std::size_t t = 0; t < arch_.horizon; ++t) {
    const Tensor xt = ad::reshape(ad::slice_cols(x, t * d * f, (t + 1) * d * f), {b * d, f});
    const Tensor in = ad::concat({theta_nodes, xt}, 1);
    h_node = arch_.plain_node_cell ? plain_cell_(in, h_node, bind) : node_cell_(in, h_node, bind);
    const Tensor s = ad::tanh(state_proj_(ad::reshape(h_node, {b, d * arch_.node_hidden}), bind));
    h_state = state_cell_(s, h_state, bind);
    steps.push_back(h_state);
  }
  return ad::concat(steps, 1);
}

GaussianDiagTensor StnpModel::latent(const Tensor& r, const Binder& bind) const {
  if (r.rows() != 1 || r.cols() != representation_width()) {
    throw ValidationError("latent: expects one aggregated row, got " + r.shape().str());
  }
  const std::size_t w = arch_.recurrent_width;
  // Heads are shared over t: stack steps as rows, then flatten back.
  std::vector<Tensor> per_step;
  for (std::size_t t = 0; t < arch_.horizon; ++t) per_step.push_back(ad::slice_cols(r, t * w, (t + 1) * w));
  const Tensor stacked = ad::concat(per_step, 0);
  const Tensor mean = mean_head_(stacked, bind);
  const Tensor sd = positive(std_head_(stacked, bind));
  return {ad::reshape(mean, {1, arch_.latent_width()}), ad::reshape(sd, {1, arch_.latent_width()})};
}

Tensor StnpModel::decode_mean(const Tensor& z, const Tensor& theta, const Binder& bind) const {
  if (z.cols() != arch_.latent_width() || theta.cols() != arch_.theta_width() || z.rows() != theta.rows()) {
    throw ValidationError("decode: z " + z.shape().str() + " theta " + theta.shape().str());
  }
  const std::size_t s = z.rows(), l = arch_.latent_dim;
  Tensor h = Tensor::zeros({s, arch_.recurrent_width});
  Tensor prev = Tensor::zeros({s, arch_.step_width()});
  std::vector<Tensor> means;
  means.reserve(arch_.horizon);
  for (std::size_t t = 0; t < arch_.horizon; ++t) {
    const Tensor in = ad::concat({ad::slice_cols(z, t * l, (t + 1) * l), theta, prev}, 1);
    h = dec_cell_(in, h, bind);
    prev = dec_out_(h, bind);
    means.push_back(prev);
  }
  return ad::concat(means, 1);
}

std::unique_ptr<LatentModel> make_model(const NpArchitecture& arch) {
  if (arch.kind == ModelKind::np) return std::make_unique<NpModel>(arch);
  return std::make_unique<StnpModel>(arch);
}

}  // namespace inp::np
