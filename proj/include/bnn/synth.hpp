// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "bnn/model.hpp"
#include "bnn/network.hpp"
#include "bnn/refmodel.hpp"

namespace bnn {

using Rng = std::mt19937_64;

/// Sign pattern of the folded activation: (tau' > 0 ?) x (b1 <= 0 ?).
enum class SignCase { PosTauNonPosB1 = 0, PosTauPosB1 = 1, NegTauNonPosB1 = 2, NegTauPosB1 = 3 };

struct ActivationDraw {
  /// Fixed case, or -1 to draw one per channel.
  int sign_case = -1;
  /// The thresholded quantity is input_scale(n) * y with integer y.
  /// Thresholds land near y ~ N(0, spread), sometimes anywhere in
  /// [-bound, bound], and never within 1e-6 of an integer.
  double spread = 4.0;
  double bound = 16.0;
  /// Dyadic parameters with thresholds on exact integers.
  bool ties = false;
};

/// Parameters for an activation whose real input is input_scale(n) * y.
ActivationParams random_activation(Rng& rng, const Eigen::ArrayXd& input_scale,
                                   const ActivationDraw& draw);

struct UnitDraw {
  int in_channels = 8, out_channels = 8, kernel = 3, stride = 1;
  OutKind out_kind = OutKind::Bit1;
  int sign_case = -1;
  bool ties = false;
  double zero_weight_fraction = 0.05;
};

OverParamConvUnit random_unit(Rng& rng, const UnitDraw& draw, double kappa_in);

SignTensor random_signs(Rng& rng, Shape4 shape);
Int4Tensor random_int4(Rng& rng, Shape4 shape);
RealTensor random_reals(Rng& rng, Shape4 shape);
/// Input of the graph's input layer with batch `batch`.
RefValue random_input(Rng& rng, const GraphSpec& g, int batch = 1);

/// Training model with random parameters for an executable graph.
Model synth_training_model(const GraphSpec& g, std::uint64_t seed);

}  // namespace bnn
