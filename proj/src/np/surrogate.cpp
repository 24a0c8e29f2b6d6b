#include "inp/np/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "inp/autodiff/param_io.hpp"
#include "inp/core/errors.hpp"

namespace inp::np {

void SampleSet::append(std::span<const double> theta_row, std::span<const double> x_row, int scenario_id) {
  if (theta_width == 0 && x_width == 0 && theta.empty()) {
    theta_width = theta_row.size();
    x_width = x_row.size();
  }
  if (theta_row.size() != theta_width || x_row.size() != x_width || theta_width == 0) {
    throw ValidationError("sample set: row width mismatch");
  }
  theta.insert(theta.end(), theta_row.begin(), theta_row.end());
  x.insert(x.end(), x_row.begin(), x_row.end());
  scenario_ids.push_back(scenario_id);
}

void SampleSet::append(const SampleSet& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    append(std::span(other.theta).subspan(i * other.theta_width, other.theta_width),
           std::span(other.x).subspan(i * other.x_width, other.x_width), other.scenario_ids[i]);
  }
}

SampleSet SampleSet::subset(std::span<const std::size_t> rows) const {
  SampleSet out;
  out.theta_width = theta_width;
  out.x_width = x_width;
  for (auto i : rows) {
    if (i >= size()) throw ValidationError("sample set: row index out of range");
    out.theta.insert(out.theta.end(), theta.begin() + i * theta_width, theta.begin() + (i + 1) * theta_width);
    out.x.insert(out.x.end(), x.begin() + i * x_width, x.begin() + (i + 1) * x_width);
    out.scenario_ids.push_back(scenario_ids[i]);
  }
  return out;
}

namespace {

ad::Tensor gather_rows(const ad::Tensor& t, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size() * t.cols());
  const auto data = t.data();
  for (auto i : idx) {
    if (i >= t.rows()) throw ValidationError("batch: row index out of range");
    out.insert(out.end(), data.begin() + i * t.cols(), data.begin() + (i + 1) * t.cols());
  }
  return ad::Tensor({idx.size(), t.cols()}, std::move(out));
}

}  // namespace

NormalizedBatch NormalizedBatch::rows(std::span<const std::size_t> idx) const {
  return {gather_rows(theta, idx), gather_rows(x, idx)};
}

Surrogate::Surrogate(NpArchitecture arch, ad::AdamConfig adam)
    : model_(make_model(arch)),
      adam_(std::make_unique<ad::Adam>(model_->parameters().pointers(), adam)) {}

void Surrogate::fit_normalizers(const SampleSet& data) {
  if (data.theta_width != arch().theta_width() || data.x_width != arch().x_width()) {
    throw ValidationError("surrogate: sample widths do not match the architecture");
  }
  theta_norm_ = Standardizer::fit(data.theta, data.theta_width);
  x_norm_ = Standardizer::fit(data.x, data.x_width);
}

NormalizedBatch Surrogate::normalize(const SampleSet& data) const {
  if (!has_normalizers()) throw ValidationError("surrogate: normalizers not fitted");
  if (data.size() == 0) throw ValidationError("surrogate: empty sample set");
  if (data.theta_width != arch().theta_width() || data.x_width != arch().x_width()) {
    throw ValidationError("surrogate: sample widths do not match the architecture");
  }
  return {ad::Tensor({data.size(), data.theta_width}, theta_norm_.normalize(data.theta)),
          ad::Tensor({data.size(), data.x_width}, x_norm_.normalize(data.x))};
}

ad::Tensor Surrogate::normalize_theta(std::span<const double> raw) const {
  if (!has_normalizers()) throw ValidationError("surrogate: normalizers not fitted");
  const std::size_t w = arch().theta_width();
  if (raw.empty() || raw.size() % w != 0) throw ValidationError("surrogate: theta width mismatch");
  return ad::Tensor({raw.size() / w, w}, theta_norm_.normalize(raw));
}

std::vector<std::vector<double>> Surrogate::snapshot() const {
  std::vector<std::vector<double>> out;
  for (const auto* p : model_->parameters().pointers()) out.emplace_back(p->value().begin(), p->value().end());
  return out;
}

void Surrogate::restore(const std::vector<std::vector<double>>& values) {
  auto params = model_->parameters().pointers();
  if (values.size() != params.size()) throw ValidationError("surrogate: snapshot size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i]->mutable_value();
    if (dst.size() != values[i].size()) throw ValidationError("surrogate: snapshot shape mismatch");
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

nlohmann::json Surrogate::to_json() const {
  const auto ptrs = model_->parameters().pointers();
  nlohmann::json j = {{"version", kSurrogateFormatVersion},
                      {"architecture", arch().to_json()},
                      {"parameters", ad::parameters_to_json(ptrs)},
                      {"adam", adam_->to_json()},
                      {"steps", steps_}};
  if (has_normalizers()) {
    j["theta_norm"] = theta_norm_.to_json();
    j["x_norm"] = x_norm_.to_json();
  }
  return j;
}

std::unique_ptr<Surrogate> Surrogate::from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kSurrogateFormatVersion) throw IoError("surrogate: unsupported version");
    auto s = std::make_unique<Surrogate>(NpArchitecture::from_json(j.at("architecture")));
    ad::parameters_from_json(j.at("parameters"), s->model_->parameters().pointers());
    s->adam_->load_json(j.at("adam"));
    s->steps_ = j.at("steps").get<std::int64_t>();
    if (j.contains("theta_norm")) {
      s->theta_norm_ = Standardizer::from_json(j.at("theta_norm"));
      s->x_norm_ = Standardizer::from_json(j.at("x_norm"));
    }
    for (const auto* p : s->model_->parameters().pointers())
      for (double v : p->value())
        if (!std::isfinite(v)) throw IoError("surrogate: non-finite parameter " + p->name());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("surrogate: malformed checkpoint: ") + e.what());
  }
}

}  // namespace inp::np
