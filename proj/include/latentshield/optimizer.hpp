#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latentshield/encoder.hpp"
#include "latentshield/objective.hpp"
#include "latentshield/tensor.hpp"
#include "latentshield/transforms.hpp"

namespace latentshield {

struct ConvergenceOptions {
    double rel_tol = 1e-4;
    int window = 5;
};

enum class StepRule {
    NormalizedL2,  // delta += alpha * g / ||g||_2
    Sign,          // delta += alpha * sign(g)
};

enum class ProtectMode { PerImage, Universal };

/// All knobs of the projected-gradient ascent. Defaults follow the
/// reference configuration: budget 4/255, beta 0.2, 30 iterations, MSE
/// distance, EOT on.
struct ProtectOptions {
    double budget = 4.0 / 255.0;   // xi, infinity-norm bound in [0,1] pixel units
    double beta = 0.2;             // perceptual penalty weight
    int max_iters = 30;            // S
    double step_alpha = 0.0;       // <= 0 resolves automatically
    double init_sigma = -1.0;      // < 0 resolves to budget / 4
    DistanceMetric metric = DistanceMetric::Mse;
    bool eot = true;
    TransformDistribution distribution = TransformDistribution::default_eot();
    std::uint64_t seed = 0;
    ConvergenceOptions convergence;
    ProtectMode mode = ProtectMode::PerImage;
    StepRule step_rule = StepRule::NormalizedL2;
    bool universal_shuffle = true;  // revisit order reshuffled per epoch

    void validate() const;

    /// Auto step size 2 xi sqrt(N) / S: the unit-L2 direction moves each
    /// coordinate about alpha / sqrt(N) per step, so a coordinate can
    /// traverse the whole budget in about S/2 steps. The sign rule uses
    /// xi / 8.
    double resolved_alpha(std::size_t n_elements) const;
    double resolved_init_sigma() const;
};

struct Perturbation {
    ImageTensor delta;
    double budget = 0.0;  // ||delta||_inf <= budget holds after every update
};

struct StepRecord {
    int iteration = 0;    // 1-based optimization step (or visit, in universal mode)
    int image_index = 0;  // which member of the set was visited (universal mode)
    double value = 0.0;
    double latent_term = 0.0;
    double perceptual_term = 0.0;
    double grad_norm = 0.0;
    double delta_inf = 0.0;  // after the update and projections
    std::string transform;
};

struct ProtectionResult {
    ImageTensor protected_image;  // clamp(x + delta, 0, 1)
    Perturbation perturbation;
    std::vector<StepRecord> trace;
    int iterations_used = 0;
    bool converged = false;
};

/// Projected gradient ascent on one image: Gaussian-initialized delta,
/// one sampled transform per step (identity when eot is off),
/// L2-normalized ascent step, projection onto the budget ball, then
/// pixel-range clamping so x + delta is always a valid image.
ProtectionResult protect_single(const Encoder& enc, const ImageTensor& x, const ProtectOptions& opts);

struct UniversalResult {
    Perturbation perturbation;
    std::vector<StepRecord> trace;        // one record per visit
    std::vector<double> epoch_values;     // mean objective per epoch
    int epochs_used = 0;
    bool converged = false;
};

/// Shared-delta variant: each epoch visits every image of the set (in a
/// seeded shuffled order unless universal_shuffle is off) and applies
/// the same inner update to one shared delta. Pixel-range clamping is
/// deferred to application time so the shared delta is not distorted by
/// any single image.
UniversalResult protect_universal(const Encoder& enc, const std::vector<ImageTensor>& images,
                                  const ProtectOptions& opts);

/// clamp(x + delta, 0, 1)
ImageTensor apply_perturbation(const ImageTensor& x, const Perturbation& perturbation);

}  // namespace latentshield
