#pragma once

#include <string>
#include <vector>

#include "latentshield/rng.hpp"
#include "latentshield/tensor.hpp"

namespace latentshield {

enum class TransformKind { Identity, GaussianBlur, Rotate, CenterCropResize };

/// One member of the robustness family: identity, separable Gaussian
/// blur with edge replication, small-angle bilinear rotation (reads
/// outside the frame as 0), or a central crop resized back to the
/// original extent. Every variant is linear in the pixel values and has
/// an exact adjoint.
struct Transform {
    TransformKind kind = TransformKind::Identity;
    int kernel_size = 5;
    double sigma = 1.5;
    double angle_deg = 0.0;
    double keep_ratio = 1.0;

    static Transform identity() { return {}; }
    static Transform gaussian_blur(int kernel_size, double sigma);
    static Transform rotate(double angle_deg);
    static Transform center_crop_resize(double keep_ratio);

    void validate() const;
    std::string describe() const;
};

struct TransformDistribution {
    struct Entry {
        Transform transform;
        double weight = 1.0;
    };
    std::vector<Entry> entries;

    /// Validates and scales the weights to sum 1.
    void normalize();
    void validate() const;

    /// Uniform over identity, blur(5, 1.5), rotate(5 deg) and center
    /// crop keeping 90% resized back. Identity keeps the untransformed
    /// view in play during optimization.
    static TransformDistribution default_eot();
};

/// w_i proportional to exp(-i^2 / (2 sigma^2)) over the centered taps,
/// normalized to sum 1.
std::vector<double> gaussian_kernel_1d(int kernel_size, double sigma);

ImageTensor apply(const Transform& t, const ImageTensor& image);

/// Exact transpose of apply(t, .) as a linear operator.
ImageTensor adjoint(const Transform& t, const ImageTensor& cotangent);

/// Inverse-CDF draw consuming one splitmix64 output.
const Transform& sample(const TransformDistribution& dist, SplitMix64& rng);

}  // namespace latentshield
