#pragma once

#include <string>

#include "latentshield/encoder.hpp"
#include "latentshield/tensor.hpp"
#include "latentshield/transforms.hpp"

namespace latentshield {

/// Latent distance choices. MSE is the default; the others are kept for
/// ablations.
enum class DistanceMetric { Mse, L2, Mae };

DistanceMetric distance_metric_from_string(const std::string& s);
std::string to_string(DistanceMetric m);

struct LatentDistanceResult {
    double value = 0.0;
    LatentTensor cotangent;  // d value / d z_p
};

/// Distance between two latents plus its derivative in the first
/// argument. Subgradients at kinks are fixed to 0 so downstream
/// optimization stays total: MAE uses sign(0) = 0 and L2 returns a zero
/// cotangent at coincident latents.
LatentDistanceResult latent_distance(const LatentTensor& z_p, const LatentTensor& z, DistanceMetric metric);

struct PerceptualPenaltyResult {
    double value = 0.0;
    ImageTensor gradient;  // d value / d x_p
};

/// Sum of squared pixel differences (not averaged), gradient 2(x_p - x).
PerceptualPenaltyResult perceptual_penalty(const ImageTensor& x_p, const ImageTensor& x);

struct ObjectiveEval {
    double value = 0.0;
    double latent_term = 0.0;
    double perceptual_term = 0.0;
    ImageTensor gradient;  // d value / d x_p
    Transform transform_used;
};

/// One-sample estimate of the maximization objective: latent distance of
/// the transformed candidate from the reference latent, minus beta times
/// the perceptual penalty. z_ref must be encode(x), computed once per
/// image; the source latent is never transformed.
ObjectiveEval objective_eval(const Encoder& enc, const ImageTensor& x_p, const ImageTensor& x,
                             const LatentTensor& z_ref, const Transform& transform, DistanceMetric metric,
                             double beta);

}  // namespace latentshield
