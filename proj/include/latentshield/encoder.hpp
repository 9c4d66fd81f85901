#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "latentshield/conv.hpp"
#include "latentshield/tensor.hpp"

namespace latentshield {

enum class Activation : std::uint8_t { None = 0, Tanh = 1 };

struct LayerSpec {
    int out_channels = 0;
    int in_channels = 0;
    int kernel_h = 0;
    int kernel_w = 0;
    int stride = 1;
    int pad = 0;
    Activation activation = Activation::None;
};

/// Architecture of a convolutional encoder: an ordered conv/activation
/// pipeline. Consecutive layers must be channel-compatible and the total
/// spatial downsampling factor must divide the input extent.
struct EncoderSpec {
    std::vector<LayerSpec> layers;

    int downsample_factor() const;
    int input_channels() const { return layers.empty() ? 0 : layers.front().in_channels; }
    int latent_channels() const { return layers.empty() ? 0 : layers.back().out_channels; }
    void validate() const;
};

struct EncoderWeights {
    std::vector<ConvKernel> layers;
    std::uint32_t format_version = 1;
};

struct Encoder {
    EncoderSpec spec;
    EncoderWeights weights;
};

/// Deterministic 3-layer stand-in for a latent-diffusion VAE encoder:
/// 3x3/s2 3->8 tanh, 3x3/s2 8->16 tanh, 3x3/s1 16->4 linear. Downsamples
/// by 4 and emits 4 latent channels. Weights are Glorot-uniform, derived
/// per global parameter index i as splitmix64(seed ^ i) -> [0,1) ->
/// (2u-1)*sqrt(6/(fan_in+fan_out)), quantized to f32 so the on-disk
/// format round-trips bit-exactly. Biases are zero.
Encoder toy_encoder(std::uint64_t seed);

/// Runs the conv pipeline. Requires image channels to match the spec and
/// image extent >= 8 and divisible by the downsampling factor.
LatentTensor encode(const Encoder& enc, const ImageTensor& image);

/// Exact reverse-mode input gradient of encode.
ImageTensor encode_vjp(const Encoder& enc, const ImageTensor& image, const LatentTensor& cotangent);

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
};

using VjpFn = std::function<ImageTensor(const Encoder&, const ImageTensor&, const LatentTensor&)>;

/// Compares encode_vjp against central finite differences of the scalar
/// probe <encode(x), v> with a seeded v. The reported error is the worst
/// per-component deviation normalized by the gradient's infinity norm.
GradCheckReport grad_check(const Encoder& enc, const ImageTensor& image, double tolerance,
                           double epsilon = 1e-4, std::uint64_t probe_seed = 1);

/// Same check against an arbitrary vjp implementation (used to validate
/// the harness itself with deliberately broken gradients).
GradCheckReport grad_check_against(const Encoder& enc, const ImageTensor& image, const VjpFn& vjp,
                                   double tolerance, double epsilon = 1e-4, std::uint64_t probe_seed = 1);

/// Weight file: magic "LSW1", u32 LE version, u32 layer count; per layer
/// u32 x6 (out_ch, in_ch, k_h, k_w, stride, pad), u8 activation tag,
/// then weights and biases as LE f32 row-major.
void save_weights(const std::string& path, const Encoder& enc);
Encoder load_weights(const std::string& path);

}  // namespace latentshield
