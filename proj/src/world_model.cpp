#include "vqsense/world_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace vqsense {

namespace {

void check_net(const NetParams& net) {
  if (net.weights.empty() || net.weights.size() != net.biases.size())
    throw std::invalid_argument("net must hold matching weight/bias lists");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    if (net.biases[l].size() != net.weights[l].rows())
      throw std::invalid_argument("bias length must match weight rows");
    if (l + 1 < net.weights.size() &&
        net.weights[l + 1].cols() != net.weights[l].rows())
      throw std::invalid_argument("consecutive layer shapes do not chain");
  }
}

void check_input(const NetParams& net, const ModelInput& input) {
  if (input.size() != net.input_dim())
    throw std::invalid_argument("model input length does not match the net");
}

// Forward pass keeping post-activation values of every layer for backprop.
RVector forward_trace(const NetParams& net, const ModelInput& input,
                      std::vector<RVector>* activations) {
  RVector z = input;
  if (activations) activations->push_back(z);
  const std::size_t last = net.weights.size() - 1;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    z = net.weights[l] * z + net.biases[l];
    if (l < last) z = z.cwiseMax(0.0);
    if (activations && l < last) activations->push_back(z);
  }
  return z;
}

bool all_finite(const LossGrad& g) {
  if (!std::isfinite(g.loss)) return false;
  for (const auto& m : g.d_w)
    if (!m.allFinite()) return false;
  for (const auto& v : g.d_b)
    if (!v.allFinite()) return false;
  return true;
}

nlohmann::json matrix_to_json(const RMatrix& m) {
  nlohmann::json flat = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  return flat;
}

RMatrix matrix_from_json(const nlohmann::json& flat, Eigen::Index rows,
                         Eigen::Index cols) {
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
    throw std::invalid_argument("checkpoint coefficient count does not match shape");
  RMatrix m(rows, cols);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[i++].get<double>();
  return m;
}

}  // namespace

NetParams NetParams::glorot(const std::vector<int>& dims, Rng& rng) {
  if (dims.size() < 2)
    throw std::invalid_argument("net needs at least input and output widths");
  NetParams net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    if (fan_in < 1 || fan_out < 1)
      throw std::invalid_argument("layer widths must be positive");
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    RMatrix w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = limit * (2.0 * uniform01(rng) - 1.0);
    net.weights.push_back(std::move(w));
    net.biases.push_back(RVector::Zero(fan_out));
  }
  return net;
}

AdamState AdamState::zeros_like(const NetParams& net, const AdamConfig& cfg) {
  AdamState state;
  state.cfg = cfg;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    state.m_w.push_back(RMatrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
    state.v_w.push_back(RMatrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
    state.m_b.push_back(RVector::Zero(net.biases[l].size()));
    state.v_b.push_back(RVector::Zero(net.biases[l].size()));
  }
  return state;
}

RVector forward(const NetParams& net, const ModelInput& input) {
  check_net(net);
  check_input(net, input);
  return forward_trace(net, input, nullptr);
}

Belief predict(const NetParams& net, const ModelInput& input,
               std::optional<double> fixed_std) {
  const RVector out = forward(net, input);
  Belief belief;
  belief.mean = out[0];
  if (net.output_dim() == 1) {
    if (!fixed_std.has_value() || !(*fixed_std > 0.0))
      throw std::invalid_argument("single-output net needs a positive fixed_std");
    belief.std = *fixed_std;
  } else {
    belief.std = std::clamp(std::exp(0.5 * out[1]), kStdFloor, kStdCeil);
  }
  return belief;
}

LossGrad loss_gradient(const NetParams& net, const ModelInput& input,
                       double target, LossKind kind) {
  check_net(net);
  check_input(net, input);
  std::vector<RVector> acts;
  const RVector out = forward_trace(net, input, &acts);

  LossGrad g;
  RVector d_out = RVector::Zero(out.size());
  if (kind == LossKind::kSquared) {
    const double r = target - out[0];
    g.loss = r * r;
    d_out[0] = -2.0 * r;
  } else {
    if (out.size() < 2)
      throw std::invalid_argument("gaussian nll needs a two-output net");
    const double r = target - out[0];
    const double inv_var = std::exp(-out[1]);  // out[1] carries log variance
    g.loss = 0.5 * (r * r * inv_var + out[1]);
    d_out[0] = -r * inv_var;
    d_out[1] = 0.5 * (1.0 - r * r * inv_var);
  }

  const std::size_t layers = net.weights.size();
  g.d_w.resize(layers);
  g.d_b.resize(layers);
  RVector delta = d_out;
  for (std::size_t l = layers; l-- > 0;) {
    g.d_w[l] = delta * acts[l].transpose();
    g.d_b[l] = delta;
    if (l > 0) {
      const RVector back = net.weights[l].transpose() * delta;
      // ReLU gate: activations were stored post-clamp, so > 0 marks pass-through.
      const Eigen::ArrayXd gate = (acts[l].array() > 0.0).cast<double>();
      delta = (back.array() * gate).matrix();
    }
  }
  return g;
}

double online_update(NetParams& net, AdamState& adam, const ModelInput& input,
                     double target, LossKind kind) {
  bool matches = adam.m_w.size() == net.weights.size() &&
                 adam.m_b.size() == net.biases.size();
  for (std::size_t l = 0; matches && l < net.weights.size(); ++l)
    matches = adam.m_w[l].rows() == net.weights[l].rows() &&
              adam.m_w[l].cols() == net.weights[l].cols() &&
              adam.m_b[l].size() == net.biases[l].size();
  if (!matches)
    throw std::invalid_argument("optimizer state does not match the net");
  const LossGrad g = loss_gradient(net, input, target, kind);
  if (!all_finite(g))
    throw NumericalError("non-finite loss or gradient in online update");

  adam.step += 1;
  const double c1 = 1.0 - std::pow(adam.cfg.beta1, double(adam.step));
  const double c2 = 1.0 - std::pow(adam.cfg.beta2, double(adam.step));
  const double lr = adam.cfg.lr;
  const double eps = adam.cfg.eps;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    adam.m_w[l] = adam.cfg.beta1 * adam.m_w[l] + (1.0 - adam.cfg.beta1) * g.d_w[l];
    adam.v_w[l].array() = adam.cfg.beta2 * adam.v_w[l].array() +
                          (1.0 - adam.cfg.beta2) * g.d_w[l].array().square();
    net.weights[l].array() -=
        lr * (adam.m_w[l].array() / c1) / ((adam.v_w[l].array() / c2).sqrt() + eps);

    adam.m_b[l] = adam.cfg.beta1 * adam.m_b[l] + (1.0 - adam.cfg.beta1) * g.d_b[l];
    adam.v_b[l].array() = adam.cfg.beta2 * adam.v_b[l].array() +
                          (1.0 - adam.cfg.beta2) * g.d_b[l].array().square();
    net.biases[l].array() -=
        lr * (adam.m_b[l].array() / c1) / ((adam.v_b[l].array() / c2).sqrt() + eps);
  }
  return g.loss;
}

std::vector<double> sample_belief(const Belief& belief, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  if (!(belief.std > 0.0) || !std::isfinite(belief.std) || !std::isfinite(belief.mean))
    throw std::invalid_argument("belief must have finite mean and positive std");
  std::vector<double> draws(count);
  for (int i = 0; i < count; ++i)
    draws[i] = belief.mean + belief.std * gaussian(rng);
  return draws;
}

void save_checkpoint(const std::string& path, const NetParams& net,
                     const AdamState& adam) {
  check_net(net);
  nlohmann::ordered_json doc;
  doc["format"] = "vqsense-net-v1";
  nlohmann::json dims = nlohmann::json::array();
  dims.push_back(net.input_dim());
  for (const auto& w : net.weights) dims.push_back(w.rows());
  doc["dims"] = dims;
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    weights.push_back(matrix_to_json(net.weights[l]));
    biases.push_back(matrix_to_json(net.biases[l]));
  }
  doc["weights"] = weights;
  doc["biases"] = biases;

  nlohmann::ordered_json opt;
  opt["step"] = adam.step;
  opt["beta1"] = adam.cfg.beta1;
  opt["beta2"] = adam.cfg.beta2;
  opt["eps"] = adam.cfg.eps;
  opt["lr"] = adam.cfg.lr;
  nlohmann::json mw = nlohmann::json::array(), vw = nlohmann::json::array();
  nlohmann::json mb = nlohmann::json::array(), vb = nlohmann::json::array();
  for (std::size_t l = 0; l < adam.m_w.size(); ++l) {
    mw.push_back(matrix_to_json(adam.m_w[l]));
    vw.push_back(matrix_to_json(adam.v_w[l]));
    mb.push_back(matrix_to_json(adam.m_b[l]));
    vb.push_back(matrix_to_json(adam.v_b[l]));
  }
  opt["m_w"] = mw;
  opt["v_w"] = vw;
  opt["m_b"] = mb;
  opt["v_b"] = vb;
  doc["adam"] = opt;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint path for writing: " + path);
  out << doc.dump(1) << '\n';
}

std::pair<NetParams, AdamState> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.value("format", "") != std::string("vqsense-net-v1"))
    throw std::invalid_argument("unrecognized checkpoint format");
  const std::vector<Eigen::Index> dims = doc.at("dims").get<std::vector<Eigen::Index>>();
  if (dims.size() < 2) throw std::invalid_argument("checkpoint dims too short");

  NetParams net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    net.weights.push_back(matrix_from_json(doc.at("weights").at(l), dims[l + 1], dims[l]));
    net.biases.push_back(matrix_from_json(doc.at("biases").at(l), dims[l + 1], 1));
  }
  check_net(net);

  const auto& opt = doc.at("adam");
  AdamConfig cfg;
  cfg.beta1 = opt.at("beta1").get<double>();
  cfg.beta2 = opt.at("beta2").get<double>();
  cfg.eps = opt.at("eps").get<double>();
  cfg.lr = opt.at("lr").get<double>();
  AdamState adam = AdamState::zeros_like(net, cfg);
  adam.step = opt.at("step").get<long>();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    adam.m_w[l] = matrix_from_json(opt.at("m_w").at(l), dims[l + 1], dims[l]);
    adam.v_w[l] = matrix_from_json(opt.at("v_w").at(l), dims[l + 1], dims[l]);
    adam.m_b[l] = matrix_from_json(opt.at("m_b").at(l), dims[l + 1], 1);
    adam.v_b[l] = matrix_from_json(opt.at("v_b").at(l), dims[l + 1], 1);
  }
  return {std::move(net), std::move(adam)};
}

}  // namespace vqsense
