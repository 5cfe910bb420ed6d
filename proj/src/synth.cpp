// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/synth.hpp"

#include <cmath>

namespace bnn {

namespace {

using Eigen::ArrayXd;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

double signed_magnitude(Rng& rng, double lo, double hi, double p_negative) {
  const double m = uniform(rng, lo, hi);
  return coin(rng, p_negative) ? -m : m;
}

double off_integer(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-6 ? r + 0.5 : v;
}

}  // namespace

ActivationParams random_activation(Rng& rng, const ArrayXd& input_scale,
                                   const ActivationDraw& draw) {
  const int n = static_cast<int>(input_scale.size());
  ActivationParams a = ActivationParams::neutral(n);
  a.kappa = draw.ties ? 1.0 : uniform(rng, 0.25, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < n; ++c) {
    const int sc = draw.sign_case >= 0 ? draw.sign_case
                                       : std::uniform_int_distribution<int>(0, 3)(rng);
    const bool pos_tau = sc == 0 || sc == 1;
    const bool pos_b1 = sc == 1 || sc == 3;
    if (draw.ties) {
      // Dyadic values keep every intermediate exact.
      const double dy[] = {0.25, 0.5, 1.0, 2.0};
      a.bn_gamma[c] = dy[std::uniform_int_distribution<int>(0, 3)(rng)];
      a.bn_beta[c] = 0.25 * std::uniform_int_distribution<int>(-8, 8)(rng);
      a.prelu_slope[c] = dy[std::uniform_int_distribution<int>(0, 2)(rng)];
      a.b1[c] = pos_b1 ? dy[std::uniform_int_distribution<int>(0, 3)(rng)] : 0.0;
      a.tau[c] = dy[std::uniform_int_distribution<int>(1, 3)(rng)];
    } else {
      a.bn_gamma[c] = signed_magnitude(rng, 0.2, 2.0, 0.3);
      a.bn_beta[c] = uniform(rng, -1.0, 1.0);
      a.prelu_slope[c] = uniform(rng, 0.05, 1.5);
      a.b1[c] = pos_b1 ? uniform(rng, 1e-3, 1.5) : (coin(rng, 0.2) ? 0.0 : -uniform(rng, 1e-3, 1.5));
      a.tau[c] = uniform(rng, 0.2, 2.0);
    }
    const double scale = a.bn_gamma[c] * input_scale[c];
    if ((a.tau[c] * scale > 0) != pos_tau) a.tau[c] = -a.tau[c];
    const double tau_f = a.tau[c] * scale;
    const double crossing = a.b1[c] <= 0.0 ? -a.b1[c] : -a.b1[c] / a.prelu_slope[c];
    double theta;
    if (draw.ties) {
      theta = std::uniform_int_distribution<int>(-static_cast<int>(draw.spread),
                                                 static_cast<int>(draw.spread))(rng);
    } else if (coin(rng, 0.7)) {
      theta = off_integer(draw.spread * normal(rng));
    } else {
      theta = off_integer(uniform(rng, -draw.bound - 1.0, draw.bound + 1.0));
    }
    // theta = (crossing - tau * beta - b0) / tau_f
    a.b0[c] = crossing - theta * tau_f - a.tau[c] * a.bn_beta[c];
  }
  return a;
}

OverParamConvUnit random_unit(Rng& rng, const UnitDraw& d, double kappa_in) {
  OverParamConvUnit u;
  const int n = d.out_channels, c = d.in_channels, k = d.kernel;
  u.geometry = same_geometry(k, d.stride);
  u.out_kind = d.out_kind;
  u.weight = RealTensor(Shape4{n, c, k, k});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& w : u.weight.array())
    w = coin(rng, d.zero_weight_fraction) ? 0.0 : (d.ties ? (coin(rng, 0.5) ? 0.5 : -0.5)
                                                          : normal(rng));
  using L = WeightSharpness::Layout;
  const L layouts[] = {L::PerOutput, L::PerOutputInput, L::PerElement};
  u.alpha.layout = layouts[std::uniform_int_distribution<int>(0, 2)(rng)];
  u.alpha.values.resize(WeightSharpness::expected_size(u.alpha.layout, n, c, k));
  for (auto& v : u.alpha.values)
    v = d.ties ? (coin(rng, 0.3) ? -1.0 : 1.0) : signed_magnitude(rng, 0.1, 3.0, 0.3);
  u.lambda.resize(n);
  for (auto& v : u.lambda)
    v = d.ties ? (coin(rng, 0.2) ? -0.5 : 0.5) : signed_magnitude(rng, 0.05, 2.0, 0.2);

  const double length = double(c) * k * k;
  const ArrayXd accum_scale = kappa_in * u.lambda;
  if (d.out_kind == OutKind::Bit1) {
    ActivationDraw ad;
    ad.sign_case = d.sign_case;
    ad.spread = d.ties ? std::min(length, 8.0) : 1.5 * std::sqrt(length);
    ad.bound = length;
    ad.ties = d.ties;
    u.act = random_activation(rng, accum_scale, ad);
  } else {
    u.act = ActivationParams::neutral(n);
    u.int4_step.resize(n);
    for (int j = 0; j < n; ++j) {
      u.act.bn_gamma[j] = signed_magnitude(rng, 0.2, 2.0, 0.3);
      const double spread = std::abs(u.act.bn_gamma[j] * accum_scale[j]) * std::sqrt(length);
      u.int4_step[j] = spread / uniform(rng, 1.5, 6.0);
      u.act.bn_beta[j] = u.int4_step[j] * uniform(rng, -4.0, 4.0);
    }
  }
  return u;
}

SignTensor random_signs(Rng& rng, Shape4 shape) {
  SignTensor t(shape);
  std::uniform_int_distribution<int> bit(0, 1);
  for (auto& v : t.array()) v = static_cast<std::int8_t>(bit(rng) ? 1 : -1);
  return t;
}

Int4Tensor random_int4(Rng& rng, Shape4 shape) {
  Int4Tensor t(shape);
  std::uniform_int_distribution<int> q(Int4Tensor::kMin, Int4Tensor::kMax);
  for (std::int64_t i = 0; i < t.size(); ++i) t.set(i, q(rng));
  return t;
}

RealTensor random_reals(Rng& rng, Shape4 shape) {
  RealTensor t(shape);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : t.array()) v = normal(rng);
  return t;
}

RefValue random_input(Rng& rng, const GraphSpec& g, int batch) {
  for (const auto& l : g.layers)
    if (l.op == OpKind::Input) {
      const Shape4 s{batch, l.H_out, l.W_out, l.N};
      if (l.out_bits == 1) return random_signs(rng, s);
      if (l.out_bits == 4) return random_int4(rng, s);
      return random_reals(rng, s);
    }
  throw GraphError("graph has no input layer");
}

Model synth_training_model(const GraphSpec& g, std::uint64_t seed) {
  g.validate();
  Rng rng(seed);
  Model m;
  m.kind = ModelKind::Training;
  m.graph = g;
  std::map<std::string, double> kappa;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i : g.topological_order()) {
    const Layer& l = g.layers[i];
    const std::string p = l.name + ".";
    switch (l.op) {
      case OpKind::Input:
        if (l.out_bits == 1) {
          kappa[l.name] = uniform(rng, 0.5, 1.5);
          m.tensors[p + "kappa"] = Blob::f32(ArrayXd::Constant(1, kappa[l.name]));
        }
        break;
      case OpKind::Conv:
        if (l.in_bits == 1) {
          UnitDraw d;
          d.in_channels = l.C;
          d.out_channels = l.N;
          d.kernel = l.K;
          d.stride = l.stride;
          d.out_kind = l.out_bits == 4 ? OutKind::Int4 : OutKind::Bit1;
          OverParamConvUnit u = random_unit(rng, d, kappa.at(l.inputs[0]));
          u.geometry = l.geometry();
          store_unit(m, l, u);
          if (l.out_bits == 1) kappa[l.name] = u.act.kappa;
        } else {
          ArrayXd w(std::int64_t{l.N} * l.C * l.K * l.K);
          const double sd = 1.0 / std::sqrt(double(l.C) * l.K * l.K);
          for (auto& v : w) v = sd * normal(rng);
          m.tensors[p + "weight"] = Blob::f32(w, {l.N, l.C, l.K, l.K});
          ArrayXd bias(l.N);
          for (auto& v : bias) v = uniform(rng, -0.1, 0.1);
          m.tensors[p + "bias"] = Blob::f32(bias);
        }
        break;
      case OpKind::Sign:
      case OpKind::Requant: {
        ActivationDraw d;
        d.spread = l.in_bits == 4 ? 3.0 : 1.0;
        d.bound = l.in_bits == 4 ? 8.0 : 3.0;
        ActivationParams a = random_activation(rng, ArrayXd::Ones(l.N), d);
        store_activation(m, l.name, a);
        kappa[l.name] = a.kappa;
        break;
      }
      case OpKind::BatchNorm: {
        ArrayXd gamma(l.N), beta(l.N);
        for (int c = 0; c < l.N; ++c) {
          gamma[c] = uniform(rng, 0.5, 1.5);
          beta[c] = uniform(rng, -0.2, 0.2);
        }
        m.tensors[p + "gamma"] = Blob::f32(gamma);
        m.tensors[p + "beta"] = Blob::f32(beta);
        break;
      }
      case OpKind::Scale: {
        ArrayXd s(l.N);
        for (auto& v : s) v = uniform(rng, 0.5, 1.5);
        m.tensors[p + "scale"] = Blob::f32(s);
        break;
      }
      case OpKind::PReLU: {
        ArrayXd s(l.N);
        for (auto& v : s) v = uniform(rng, 0.05, 0.5);
        m.tensors[p + "slope"] = Blob::f32(s);
        break;
      }
      default:
        break;
    }
  }
  m.validate();
  return m;
}

}  // namespace bnn
