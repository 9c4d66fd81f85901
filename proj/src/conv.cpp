#include "latentshield/conv.hpp"

#include <cmath>

namespace latentshield {

namespace {

int out_extent(int in, int pad, int k, int stride, const char* axis) {
    const int span = in + 2 * pad - k;
    if (span < 0 || span % stride != 0) {
        throw ShapeError("conv2d: axis " + std::string(axis) + " with extent " + std::to_string(in) +
                         ", pad " + std::to_string(pad) + ", kernel " + std::to_string(k) + ", stride " +
                         std::to_string(stride) + " does not yield integral output size");
    }
    return span / stride + 1;
}

}  // namespace

void ConvKernel::validate() const {
    if (out_channels <= 0 || in_channels <= 0 || kernel_h <= 0 || kernel_w <= 0) {
        throw ShapeError("ConvKernel: non-positive dimension");
    }
    if (weights.size() != weight_count()) {
        throw ShapeError("ConvKernel: weights length " + std::to_string(weights.size()) + " != " +
                         std::to_string(weight_count()));
    }
    if (bias.size() != static_cast<std::size_t>(out_channels)) {
        throw ShapeError("ConvKernel: bias length " + std::to_string(bias.size()) + " != out_channels " +
                         std::to_string(out_channels));
    }
    for (double v : weights) {
        if (!std::isfinite(v)) throw Error("ConvKernel: non-finite weight");
    }
    for (double v : bias) {
        if (!std::isfinite(v)) throw Error("ConvKernel: non-finite bias");
    }
}

ImageTensor conv2d(const ImageTensor& input, const ConvKernel& kernel, int stride, int zero_pad) {
    if (stride <= 0) throw ShapeError("conv2d: stride must be positive");
    if (zero_pad < 0) throw ShapeError("conv2d: negative padding");
    if (input.channels != kernel.in_channels) {
        throw ShapeError("conv2d: input channels " + std::to_string(input.channels) +
                         " != kernel in_channels " + std::to_string(kernel.in_channels));
    }
    const int out_h = out_extent(input.height, zero_pad, kernel.kernel_h, stride, "height");
    const int out_w = out_extent(input.width, zero_pad, kernel.kernel_w, stride, "width");

    ImageTensor out(out_h, out_w, kernel.out_channels);
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            for (int oc = 0; oc < kernel.out_channels; ++oc) {
                double acc = kernel.bias[static_cast<std::size_t>(oc)];
                for (int ic = 0; ic < kernel.in_channels; ++ic) {
                    for (int ky = 0; ky < kernel.kernel_h; ++ky) {
                        const int y = oy * stride + ky - zero_pad;
                        if (y < 0 || y >= input.height) continue;
                        for (int kx = 0; kx < kernel.kernel_w; ++kx) {
                            const int x = ox * stride + kx - zero_pad;
                            if (x < 0 || x >= input.width) continue;
                            acc += input.at(y, x, ic) * kernel.w(oc, ic, ky, kx);
                        }
                    }
                }
                out.at(oy, ox, oc) = acc;
            }
        }
    }
    return out;
}

ImageTensor conv2d_input_vjp(const ImageTensor& cotangent, const ConvKernel& kernel, int stride, int zero_pad,
                             int in_h, int in_w) {
    if (stride <= 0) throw ShapeError("conv2d_input_vjp: stride must be positive");
    const int out_h = out_extent(in_h, zero_pad, kernel.kernel_h, stride, "height");
    const int out_w = out_extent(in_w, zero_pad, kernel.kernel_w, stride, "width");
    if (cotangent.height != out_h || cotangent.width != out_w || cotangent.channels != kernel.out_channels) {
        throw ShapeError("conv2d_input_vjp: cotangent shape " + cotangent.shape_str() + " != forward output " +
                         std::to_string(out_h) + "x" + std::to_string(out_w) + "x" +
                         std::to_string(kernel.out_channels));
    }

    ImageTensor grad(in_h, in_w, kernel.in_channels);
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            for (int oc = 0; oc < kernel.out_channels; ++oc) {
                const double ct = cotangent.at(oy, ox, oc);
                if (ct == 0.0) continue;
                for (int ic = 0; ic < kernel.in_channels; ++ic) {
                    for (int ky = 0; ky < kernel.kernel_h; ++ky) {
                        const int y = oy * stride + ky - zero_pad;
                        if (y < 0 || y >= in_h) continue;
                        for (int kx = 0; kx < kernel.kernel_w; ++kx) {
                            const int x = ox * stride + kx - zero_pad;
                            if (x < 0 || x >= in_w) continue;
                            grad.at(y, x, ic) += ct * kernel.w(oc, ic, ky, kx);
                        }
                    }
                }
            }
        }
    }
    return grad;
}

ImageTensor tanh_map(const ImageTensor& input) {
    ImageTensor out = input;
    for (double& v : out.data) {
        v = std::tanh(v);
    }
    return out;
}

ImageTensor tanh_vjp(const ImageTensor& input, const ImageTensor& cotangent) {
    require_same_shape(input, cotangent, "tanh_vjp");
    ImageTensor out = ImageTensor::zeros_like(input);
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double t = std::tanh(input.data[i]);
        out.data[i] = cotangent.data[i] * (1.0 - t * t);
    }
    return out;
}

}  // namespace latentshield
