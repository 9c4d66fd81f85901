#include "latentshield/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace latentshield {

double reduce(Reduction metric, const ImageTensor& a, const ImageTensor* b) {
    if (b != nullptr) {
        require_same_shape(a, *b, "reduce");
    }
    if (metric == Reduction::Dot) {
        if (b == nullptr) {
            throw ShapeError("reduce: dot requires two tensors");
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            acc += a.data[i] * b->data[i];
        }
        return acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = b ? a.data[i] - b->data[i] : a.data[i];
        switch (metric) {
            case Reduction::MeanSq:
            case Reduction::SumSq:
                acc += v * v;
                break;
            case Reduction::SumAbs:
                acc += std::abs(v);
                break;
            case Reduction::Dot:
                break;
        }
    }
    if (metric == Reduction::MeanSq && !a.data.empty()) {
        acc /= static_cast<double>(a.size());
    }
    return acc;
}

double l2_norm(const ImageTensor& t) {
    return std::sqrt(reduce(Reduction::SumSq, t));
}

double linf_norm(const ImageTensor& t) {
    double m = 0.0;
    for (double v : t.data) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

void clamp_delta_to_pixel_range(const ImageTensor& x, ImageTensor& delta) {
    require_same_shape(x, delta, "clamp_delta_to_pixel_range");
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = std::clamp(x.data[i] + delta.data[i], 0.0, 1.0);
        delta.data[i] = v - x.data[i];
    }
}

void clip_inplace(ImageTensor& t, double lo, double hi) {
    for (double& v : t.data) {
        v = std::clamp(v, lo, hi);
    }
}

}  // namespace latentshield
