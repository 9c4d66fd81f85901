#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace latentshield {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape/dimension violations; the message names the offending axes.
class ShapeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Dense H x W x C raster, row-major with channel-last layout.
/// Pixel data is [0,1] when the tensor holds a displayable image;
/// gradients and other intermediates are unconstrained.
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    ImageTensor() = default;
    ImageTensor(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(c), fill) {
        if (h < 0 || w < 0 || c < 0) {
            throw ShapeError("ImageTensor: negative dimension " + shape_str());
        }
    }

    static ImageTensor zeros_like(const ImageTensor& other) {
        return ImageTensor(other.height, other.width, other.channels);
    }

    std::size_t size() const { return data.size(); }

    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels) +
               static_cast<std::size_t>(c);
    }

    double& at(int y, int x, int c) { return data[index(y, x, c)]; }
    double at(int y, int x, int c) const { return data[index(y, x, c)]; }

    bool same_shape(const ImageTensor& other) const {
        return height == other.height && width == other.width && channels == other.channels;
    }

    std::string shape_str() const {
        return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
    }

    bool all_finite() const {
        for (double v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

/// Encoder output z = E(x). Same layout as ImageTensor.
using LatentTensor = ImageTensor;

inline void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
}

enum class Reduction { MeanSq, SumSq, SumAbs, Dot };

/// Reduce one tensor (or the elementwise difference of two) to a scalar.
/// MeanSq divides by the element count; Dot requires both arguments.
/// Accumulation is double precision.
double reduce(Reduction metric, const ImageTensor& a, const ImageTensor* b = nullptr);

double l2_norm(const ImageTensor& t);
double linf_norm(const ImageTensor& t);

/// clamp(x + delta, 0, 1) realized by adjusting delta in place, so that
/// x + delta is a valid image afterwards.
void clamp_delta_to_pixel_range(const ImageTensor& x, ImageTensor& delta);

void clip_inplace(ImageTensor& t, double lo, double hi);

}  // namespace latentshield
