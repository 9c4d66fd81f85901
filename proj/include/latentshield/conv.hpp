#pragma once

#include <string>
#include <vector>

#include "latentshield/tensor.hpp"

namespace latentshield {

/// Dense convolution kernel, weights in [out][in][ky][kx] row-major order
/// with one bias per output channel.
struct ConvKernel {
    int out_channels = 0;
    int in_channels = 0;
    int kernel_h = 0;
    int kernel_w = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    ConvKernel() = default;
    ConvKernel(int oc, int ic, int kh, int kw)
        : out_channels(oc), in_channels(ic), kernel_h(kh), kernel_w(kw),
          weights(static_cast<std::size_t>(oc) * ic * kh * kw, 0.0),
          bias(static_cast<std::size_t>(oc), 0.0) {}

    std::size_t weight_count() const {
        return static_cast<std::size_t>(out_channels) * in_channels * kernel_h * kernel_w;
    }

    std::size_t windex(int oc, int ic, int ky, int kx) const {
        return ((static_cast<std::size_t>(oc) * in_channels + ic) * kernel_h + ky) * kernel_w + kx;
    }

    double w(int oc, int ic, int ky, int kx) const { return weights[windex(oc, ic, ky, kx)]; }
    double& w(int oc, int ic, int ky, int kx) { return weights[windex(oc, ic, ky, kx)]; }

    void validate() const;
};

/// Cross-correlation (no kernel flip) with explicit zero padding.
/// Output dims are (H + 2p - k) / s + 1 per axis and must come out as
/// positive integers.
ImageTensor conv2d(const ImageTensor& input, const ConvKernel& kernel, int stride, int zero_pad);

/// Exact transpose of conv2d in its input: scatters cotangent * weight
/// back onto the input grid. `in_h`/`in_w` give the forward input shape.
ImageTensor conv2d_input_vjp(const ImageTensor& cotangent, const ConvKernel& kernel, int stride, int zero_pad,
                             int in_h, int in_w);

ImageTensor tanh_map(const ImageTensor& input);

/// cotangent * (1 - tanh(x)^2), evaluated at the forward input.
ImageTensor tanh_vjp(const ImageTensor& input, const ImageTensor& cotangent);

}  // namespace latentshield
