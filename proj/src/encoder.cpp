#include "latentshield/encoder.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "latentshield/rng.hpp"

namespace latentshield {

int EncoderSpec::downsample_factor() const {
    int f = 1;
    for (const auto& l : layers) {
        f *= l.stride;
    }
    return f;
}

void EncoderSpec::validate() const {
    if (layers.empty()) {
        throw ShapeError("EncoderSpec: no layers");
    }
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
        if (layers[i].out_channels != layers[i + 1].in_channels) {
            throw ShapeError("EncoderSpec: layer " + std::to_string(i) + " out_channels " +
                             std::to_string(layers[i].out_channels) + " != layer " + std::to_string(i + 1) +
                             " in_channels " + std::to_string(layers[i + 1].in_channels));
        }
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.out_channels <= 0 || l.in_channels <= 0 || l.kernel_h <= 0 || l.kernel_w <= 0 || l.stride <= 0 ||
            l.pad < 0) {
            throw ShapeError("EncoderSpec: invalid layer " + std::to_string(i));
        }
    }
}

Encoder toy_encoder(std::uint64_t seed) {
    Encoder enc;
    enc.spec.layers = {
        {8, 3, 3, 3, 2, 1, Activation::Tanh},
        {16, 8, 3, 3, 2, 1, Activation::Tanh},
        {4, 16, 3, 3, 1, 1, Activation::None},
    };

    std::uint64_t param_index = 0;
    for (const auto& l : enc.spec.layers) {
        ConvKernel k(l.out_channels, l.in_channels, l.kernel_h, l.kernel_w);
        const double fan_in = static_cast<double>(l.in_channels) * l.kernel_h * l.kernel_w;
        const double fan_out = static_cast<double>(l.out_channels) * l.kernel_h * l.kernel_w;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : k.weights) {
            const double u = unit_from_u64(splitmix64(seed ^ param_index));
            w = static_cast<float>((2.0 * u - 1.0) * bound);
            ++param_index;
        }
        enc.weights.layers.push_back(std::move(k));
    }
    return enc;
}

namespace {

void check_encoder_input(const Encoder& enc, const ImageTensor& image) {
    enc.spec.validate();
    if (image.channels != enc.spec.input_channels()) {
        throw ShapeError("encode: image channels " + std::to_string(image.channels) + " != encoder input " +
                         std::to_string(enc.spec.input_channels()));
    }
    if (image.height < 8 || image.width < 8) {
        throw ShapeError("encode: image " + image.shape_str() + " smaller than the 8x8 minimum");
    }
    const int f = enc.spec.downsample_factor();
    if (image.height % f != 0 || image.width % f != 0) {
        throw ShapeError("encode: image " + image.shape_str() + " not divisible by downsampling factor " +
                         std::to_string(f));
    }
    if (enc.weights.layers.size() != enc.spec.layers.size()) {
        throw ShapeError("encode: weights have " + std::to_string(enc.weights.layers.size()) +
                         " layers, spec has " + std::to_string(enc.spec.layers.size()));
    }
}

// Forward pass keeping each layer's pre-activation input, which the
// backward pass needs for the tanh derivative.
std::vector<ImageTensor> forward_trace(const Encoder& enc, const ImageTensor& image) {
    std::vector<ImageTensor> acts;
    acts.reserve(enc.spec.layers.size() + 1);
    acts.push_back(image);
    for (std::size_t i = 0; i < enc.spec.layers.size(); ++i) {
        const auto& l = enc.spec.layers[i];
        ImageTensor z = conv2d(acts.back(), enc.weights.layers[i], l.stride, l.pad);
        if (l.activation == Activation::Tanh) {
            z = tanh_map(z);
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

}  // namespace

LatentTensor encode(const Encoder& enc, const ImageTensor& image) {
    check_encoder_input(enc, image);
    ImageTensor cur = image;
    for (std::size_t i = 0; i < enc.spec.layers.size(); ++i) {
        const auto& l = enc.spec.layers[i];
        cur = conv2d(cur, enc.weights.layers[i], l.stride, l.pad);
        if (l.activation == Activation::Tanh) {
            cur = tanh_map(cur);
        }
    }
    return cur;
}

ImageTensor encode_vjp(const Encoder& enc, const ImageTensor& image, const LatentTensor& cotangent) {
    check_encoder_input(enc, image);
    // Recompute the forward activations; the pipeline is small enough
    // that caching across calls is not worth the interface weight.
    std::vector<ImageTensor> acts;
    acts.reserve(enc.spec.layers.size());
    acts.push_back(image);
    std::vector<ImageTensor> preact;  // conv output before activation
    for (std::size_t i = 0; i < enc.spec.layers.size(); ++i) {
        const auto& l = enc.spec.layers[i];
        ImageTensor z = conv2d(acts.back(), enc.weights.layers[i], l.stride, l.pad);
        preact.push_back(z);
        if (l.activation == Activation::Tanh) {
            z = tanh_map(z);
        }
        acts.push_back(std::move(z));
    }
    if (!cotangent.same_shape(acts.back())) {
        throw ShapeError("encode_vjp: cotangent shape " + cotangent.shape_str() + " != latent shape " +
                         acts.back().shape_str());
    }

    ImageTensor grad = cotangent;
    for (std::size_t i = enc.spec.layers.size(); i-- > 0;) {
        const auto& l = enc.spec.layers[i];
        if (l.activation == Activation::Tanh) {
            grad = tanh_vjp(preact[i], grad);
        }
        grad = conv2d_input_vjp(grad, enc.weights.layers[i], l.stride, l.pad, acts[i].height, acts[i].width);
    }
    return grad;
}

GradCheckReport grad_check_against(const Encoder& enc, const ImageTensor& image, const VjpFn& vjp,
                                   double tolerance, double epsilon, std::uint64_t probe_seed) {
    LatentTensor z = encode(enc, image);
    LatentTensor probe = LatentTensor::zeros_like(z);
    SplitMix64 rng(probe_seed);
    for (double& v : probe.data) {
        v = rng.next_uniform(-1.0, 1.0);
    }

    const ImageTensor analytic = vjp(enc, image, probe);

    ImageTensor fd = ImageTensor::zeros_like(image);
    ImageTensor x = image;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x.data[i];
        x.data[i] = orig + epsilon;
        const double sp = reduce(Reduction::Dot, encode(enc, x), &probe);
        x.data[i] = orig - epsilon;
        const double sm = reduce(Reduction::Dot, encode(enc, x), &probe);
        x.data[i] = orig;
        fd.data[i] = (sp - sm) / (2.0 * epsilon);
    }

    const double scale = std::max({linf_norm(analytic), linf_norm(fd), 1e-12});
    double max_err = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        max_err = std::max(max_err, std::abs(analytic.data[i] - fd.data[i]) / scale);
    }
    return {max_err, max_err <= tolerance};
}

GradCheckReport grad_check(const Encoder& enc, const ImageTensor& image, double tolerance, double epsilon,
                           std::uint64_t probe_seed) {
    return grad_check_against(
        enc, image,
        [](const Encoder& e, const ImageTensor& img, const LatentTensor& ct) { return encode_vjp(e, img, ct); },
        tolerance, epsilon, probe_seed);
}

namespace {

constexpr char kWeightMagic[4] = {'L', 'S', 'W', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF), static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ofstream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

bool get_u32(std::ifstream& in, std::uint32_t& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

bool get_f32(std::ifstream& in, float& v) {
    std::uint32_t bits;
    if (!get_u32(in, bits)) return false;
    std::memcpy(&v, &bits, 4);
    return true;
}

}  // namespace

void save_weights(const std::string& path, const Encoder& enc) {
    enc.spec.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("save_weights: cannot open " + path);
    }
    out.write(kWeightMagic, 4);
    put_u32(out, enc.weights.format_version);
    put_u32(out, static_cast<std::uint32_t>(enc.spec.layers.size()));
    for (std::size_t i = 0; i < enc.spec.layers.size(); ++i) {
        const auto& l = enc.spec.layers[i];
        const auto& k = enc.weights.layers[i];
        put_u32(out, static_cast<std::uint32_t>(l.out_channels));
        put_u32(out, static_cast<std::uint32_t>(l.in_channels));
        put_u32(out, static_cast<std::uint32_t>(l.kernel_h));
        put_u32(out, static_cast<std::uint32_t>(l.kernel_w));
        put_u32(out, static_cast<std::uint32_t>(l.stride));
        put_u32(out, static_cast<std::uint32_t>(l.pad));
        const unsigned char act = static_cast<unsigned char>(l.activation);
        out.write(reinterpret_cast<const char*>(&act), 1);
        for (double w : k.weights) put_f32(out, static_cast<float>(w));
        for (double b : k.bias) put_f32(out, static_cast<float>(b));
    }
    if (!out) {
        throw IoError("save_weights: write failed for " + path);
    }
}

Encoder load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("load_weights: cannot open " + path);
    }
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kWeightMagic, 4) != 0) {
        throw IoError("load_weights: bad magic in " + path);
    }
    std::uint32_t version = 0;
    if (!get_u32(in, version)) {
        throw IoError("load_weights: truncated header in " + path);
    }
    if (version != 1) {
        throw IoError("load_weights: unsupported version " + std::to_string(version) + " in " + path);
    }
    std::uint32_t n_layers = 0;
    if (!get_u32(in, n_layers)) {
        throw IoError("load_weights: truncated header in " + path);
    }

    Encoder enc;
    enc.weights.format_version = version;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        std::uint32_t dims[6];
        for (auto& d : dims) {
            if (!get_u32(in, d)) {
                throw IoError("load_weights: truncated at layer " + std::to_string(i) + " in " + path);
            }
        }
        unsigned char act = 0;
        if (!in.read(reinterpret_cast<char*>(&act), 1)) {
            throw IoError("load_weights: truncated at layer " + std::to_string(i) + " in " + path);
        }
        if (act > 1) {
            throw IoError("load_weights: unknown activation tag " + std::to_string(act) + " at layer " +
                          std::to_string(i));
        }
        LayerSpec l;
        l.out_channels = static_cast<int>(dims[0]);
        l.in_channels = static_cast<int>(dims[1]);
        l.kernel_h = static_cast<int>(dims[2]);
        l.kernel_w = static_cast<int>(dims[3]);
        l.stride = static_cast<int>(dims[4]);
        l.pad = static_cast<int>(dims[5]);
        l.activation = static_cast<Activation>(act);

        ConvKernel k(l.out_channels, l.in_channels, l.kernel_h, l.kernel_w);
        for (double& w : k.weights) {
            float f;
            if (!get_f32(in, f)) {
                throw IoError("load_weights: truncated at layer " + std::to_string(i) + " in " + path);
            }
            w = f;
        }
        for (double& b : k.bias) {
            float f;
            if (!get_f32(in, f)) {
                throw IoError("load_weights: truncated at layer " + std::to_string(i) + " in " + path);
            }
            b = f;
        }
        enc.spec.layers.push_back(l);
        enc.weights.layers.push_back(std::move(k));
    }
    try {
        enc.spec.validate();
    } catch (const ShapeError& e) {
        throw IoError("load_weights: shape mismatch in " + path + ": " + e.what());
    }
    return enc;
}

}  // namespace latentshield
