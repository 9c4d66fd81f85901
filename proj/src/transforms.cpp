#include "latentshield/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace latentshield {

namespace {

constexpr double kPi = 3.14159265358979323846;

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

Transform Transform::gaussian_blur(int kernel_size, double sigma) {
    Transform t;
    t.kind = TransformKind::GaussianBlur;
    t.kernel_size = kernel_size;
    t.sigma = sigma;
    t.validate();
    return t;
}

Transform Transform::rotate(double angle_deg) {
    Transform t;
    t.kind = TransformKind::Rotate;
    t.angle_deg = angle_deg;
    t.validate();
    return t;
}

Transform Transform::center_crop_resize(double keep_ratio) {
    Transform t;
    t.kind = TransformKind::CenterCropResize;
    t.keep_ratio = keep_ratio;
    t.validate();
    return t;
}

void Transform::validate() const {
    switch (kind) {
        case TransformKind::Identity:
            break;
        case TransformKind::GaussianBlur:
            if (kernel_size < 3 || kernel_size % 2 == 0) {
                throw ConfigError("GaussianBlur: kernel_size must be odd and >= 3, got " +
                                  std::to_string(kernel_size));
            }
            if (!(sigma > 0.0)) {
                throw ConfigError("GaussianBlur: sigma must be positive");
            }
            break;
        case TransformKind::Rotate:
            if (std::abs(angle_deg) > 45.0) {
                throw ConfigError("Rotate: |angle| must be <= 45 degrees");
            }
            break;
        case TransformKind::CenterCropResize:
            if (!(keep_ratio > 0.5 && keep_ratio <= 1.0)) {
                throw ConfigError("CenterCropResize: keep_ratio must lie in (0.5, 1]");
            }
            break;
    }
}

std::string Transform::describe() const {
    std::ostringstream s;
    switch (kind) {
        case TransformKind::Identity:
            s << "identity";
            break;
        case TransformKind::GaussianBlur:
            s << "blur(k=" << kernel_size << ",sigma=" << sigma << ")";
            break;
        case TransformKind::Rotate:
            s << "rotate(" << angle_deg << "deg)";
            break;
        case TransformKind::CenterCropResize:
            s << "crop(keep=" << keep_ratio << ")";
            break;
    }
    return s.str();
}

void TransformDistribution::validate() const {
    if (entries.empty()) {
        throw ConfigError("TransformDistribution: at least one entry required");
    }
    double sum = 0.0;
    for (const auto& e : entries) {
        if (e.weight < 0.0) {
            throw ConfigError("TransformDistribution: negative weight");
        }
        e.transform.validate();
        sum += e.weight;
    }
    if (!(sum > 0.0)) {
        throw ConfigError("TransformDistribution: weights sum to zero");
    }
}

void TransformDistribution::normalize() {
    validate();
    double sum = 0.0;
    for (const auto& e : entries) sum += e.weight;
    for (auto& e : entries) e.weight /= sum;
}

TransformDistribution TransformDistribution::default_eot() {
    TransformDistribution d;
    d.entries = {
        {Transform::identity(), 0.25},
        {Transform::gaussian_blur(5, 1.5), 0.25},
        {Transform::rotate(5.0), 0.25},
        {Transform::center_crop_resize(0.9), 0.25},
    };
    return d;
}

std::vector<double> gaussian_kernel_1d(int kernel_size, double sigma) {
    if (kernel_size < 3 || kernel_size % 2 == 0) {
        throw ConfigError("gaussian_kernel_1d: kernel_size must be odd and >= 3");
    }
    if (!(sigma > 0.0)) {
        throw ConfigError("gaussian_kernel_1d: sigma must be positive");
    }
    const int r = (kernel_size - 1) / 2;
    std::vector<double> w(static_cast<std::size_t>(kernel_size));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double v = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
        w[static_cast<std::size_t>(i + r)] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

namespace {

// Separable blur pass along one axis with edge replication. Forward
// gathers from clamped taps; the adjoint scatters through the identical
// taps, which makes it the exact transpose.
ImageTensor blur_pass(const ImageTensor& src, const std::vector<double>& w, bool horizontal, bool transpose) {
    const int r = (static_cast<int>(w.size()) - 1) / 2;
    ImageTensor out = ImageTensor::zeros_like(src);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            for (int c = 0; c < src.channels; ++c) {
                if (!transpose) {
                    double acc = 0.0;
                    for (int t = -r; t <= r; ++t) {
                        const int yy = horizontal ? y : clampi(y + t, 0, src.height - 1);
                        const int xx = horizontal ? clampi(x + t, 0, src.width - 1) : x;
                        acc += w[static_cast<std::size_t>(t + r)] * src.at(yy, xx, c);
                    }
                    out.at(y, x, c) = acc;
                } else {
                    const double v = src.at(y, x, c);
                    if (v == 0.0) continue;
                    for (int t = -r; t <= r; ++t) {
                        const int yy = horizontal ? y : clampi(y + t, 0, src.height - 1);
                        const int xx = horizontal ? clampi(x + t, 0, src.width - 1) : x;
                        out.at(yy, xx, c) += w[static_cast<std::size_t>(t + r)] * v;
                    }
                }
            }
        }
    }
    return out;
}

struct Tap {
    int y, x;
    double w;
};

// Bilinear taps at a continuous source position; taps falling outside
// the frame are dropped (reads as zero).
int bilinear_taps(double sy, double sx, int h, int width, Tap taps[4]) {
    const int y0 = static_cast<int>(std::floor(sy));
    const int x0 = static_cast<int>(std::floor(sx));
    const double fy = sy - y0;
    const double fx = sx - x0;
    const double wt[4] = {(1.0 - fy) * (1.0 - fx), (1.0 - fy) * fx, fy * (1.0 - fx), fy * fx};
    const int yy[4] = {y0, y0, y0 + 1, y0 + 1};
    const int xx[4] = {x0, x0 + 1, x0, x0 + 1};
    int n = 0;
    for (int i = 0; i < 4; ++i) {
        if (wt[i] == 0.0) continue;
        if (yy[i] < 0 || yy[i] >= h || xx[i] < 0 || xx[i] >= width) continue;
        taps[n++] = {yy[i], xx[i], wt[i]};
    }
    return n;
}

// Source position for an output pixel under rotation by angle_deg about
// the image center (inverse mapping).
void rotate_source(double angle_deg, int h, int w, int oy, int ox, double& sy, double& sx) {
    const double th = angle_deg * kPi / 180.0;
    const double c = std::cos(th);
    const double s = std::sin(th);
    const double cy = 0.5 * (h - 1);
    const double cx = 0.5 * (w - 1);
    const double dy = oy - cy;
    const double dx = ox - cx;
    sx = cx + c * dx + s * dy;
    sy = cy - s * dx + c * dy;
}

// Source position inside the full frame for an output pixel of the
// crop-then-resize-back operator. Half-pixel-center resize mapping,
// clamped into the crop so interpolation weights always sum to 1.
void crop_source(double keep_ratio, int h, int w, int oy, int ox, double& sy, double& sx) {
    const int ch = std::max(2, static_cast<int>(std::lround(h * keep_ratio)));
    const int cw = std::max(2, static_cast<int>(std::lround(w * keep_ratio)));
    const int y0 = (h - ch) / 2;
    const int x0 = (w - cw) / 2;
    const double scale_y = static_cast<double>(ch) / h;
    const double scale_x = static_cast<double>(cw) / w;
    sy = (oy + 0.5) * scale_y - 0.5;
    sx = (ox + 0.5) * scale_x - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(ch - 1)) + y0;
    sx = std::clamp(sx, 0.0, static_cast<double>(cw - 1)) + x0;
}

ImageTensor resample(const Transform& t, const ImageTensor& src, bool transpose) {
    ImageTensor out = ImageTensor::zeros_like(src);
    Tap taps[4];
    for (int oy = 0; oy < src.height; ++oy) {
        for (int ox = 0; ox < src.width; ++ox) {
            double sy, sx;
            if (t.kind == TransformKind::Rotate) {
                rotate_source(t.angle_deg, src.height, src.width, oy, ox, sy, sx);
            } else {
                crop_source(t.keep_ratio, src.height, src.width, oy, ox, sy, sx);
            }
            const int n = bilinear_taps(sy, sx, src.height, src.width, taps);
            for (int c = 0; c < src.channels; ++c) {
                if (!transpose) {
                    double acc = 0.0;
                    for (int i = 0; i < n; ++i) acc += taps[i].w * src.at(taps[i].y, taps[i].x, c);
                    out.at(oy, ox, c) = acc;
                } else {
                    const double v = src.at(oy, ox, c);
                    if (v == 0.0) continue;
                    for (int i = 0; i < n; ++i) out.at(taps[i].y, taps[i].x, c) += taps[i].w * v;
                }
            }
        }
    }
    return out;
}

void check_crop_dims(const Transform& t, const ImageTensor& image) {
    const int ch = static_cast<int>(std::lround(image.height * t.keep_ratio));
    const int cw = static_cast<int>(std::lround(image.width * t.keep_ratio));
    if (ch < 2 || cw < 2) {
        throw ShapeError("CenterCropResize: crop " + std::to_string(ch) + "x" + std::to_string(cw) +
                         " degenerate for image " + image.shape_str());
    }
}

}  // namespace

ImageTensor apply(const Transform& t, const ImageTensor& image) {
    t.validate();
    switch (t.kind) {
        case TransformKind::Identity:
            return image;
        case TransformKind::GaussianBlur: {
            const auto w = gaussian_kernel_1d(t.kernel_size, t.sigma);
            return blur_pass(blur_pass(image, w, /*horizontal=*/true, false), w, /*horizontal=*/false, false);
        }
        case TransformKind::Rotate:
            return resample(t, image, false);
        case TransformKind::CenterCropResize:
            check_crop_dims(t, image);
            return resample(t, image, false);
    }
    throw Error("apply: unreachable");
}

ImageTensor adjoint(const Transform& t, const ImageTensor& cotangent) {
    t.validate();
    switch (t.kind) {
        case TransformKind::Identity:
            return cotangent;
        case TransformKind::GaussianBlur: {
            // Forward is V.H, so the transpose runs H^T after V^T.
            const auto w = gaussian_kernel_1d(t.kernel_size, t.sigma);
            return blur_pass(blur_pass(cotangent, w, /*horizontal=*/false, true), w, /*horizontal=*/true, true);
        }
        case TransformKind::Rotate:
            return resample(t, cotangent, true);
        case TransformKind::CenterCropResize:
            check_crop_dims(t, cotangent);
            return resample(t, cotangent, true);
    }
    throw Error("adjoint: unreachable");
}

const Transform& sample(const TransformDistribution& dist, SplitMix64& rng) {
    dist.validate();
    double sum = 0.0;
    for (const auto& e : dist.entries) sum += e.weight;
    const double u = rng.next_unit() * sum;
    double acc = 0.0;
    for (const auto& e : dist.entries) {
        acc += e.weight;
        if (u < acc) return e.transform;
    }
    return dist.entries.back().transform;
}

}  // namespace latentshield
