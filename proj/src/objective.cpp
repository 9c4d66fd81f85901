#include "latentshield/objective.hpp"

#include <cmath>

namespace latentshield {

DistanceMetric distance_metric_from_string(const std::string& s) {
    if (s == "mse") return DistanceMetric::Mse;
    if (s == "l2") return DistanceMetric::L2;
    if (s == "mae") return DistanceMetric::Mae;
    throw ConfigError("unknown distance metric '" + s + "' (expected mse|l2|mae)");
}

std::string to_string(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::Mse: return "mse";
        case DistanceMetric::L2: return "l2";
        case DistanceMetric::Mae: return "mae";
    }
    return "?";
}

LatentDistanceResult latent_distance(const LatentTensor& z_p, const LatentTensor& z, DistanceMetric metric) {
    require_same_shape(z_p, z, "latent_distance");
    LatentDistanceResult r;
    r.cotangent = LatentTensor::zeros_like(z_p);
    const double n = static_cast<double>(z_p.size());
    switch (metric) {
        case DistanceMetric::Mse: {
            double acc = 0.0;
            for (std::size_t i = 0; i < z_p.size(); ++i) {
                const double d = z_p.data[i] - z.data[i];
                acc += d * d;
                r.cotangent.data[i] = 2.0 * d / n;
            }
            r.value = acc / n;
            break;
        }
        case DistanceMetric::L2: {
            double acc = 0.0;
            for (std::size_t i = 0; i < z_p.size(); ++i) {
                const double d = z_p.data[i] - z.data[i];
                acc += d * d;
            }
            r.value = std::sqrt(acc);
            if (r.value > 0.0) {
                for (std::size_t i = 0; i < z_p.size(); ++i) {
                    r.cotangent.data[i] = (z_p.data[i] - z.data[i]) / r.value;
                }
            }
            break;
        }
        case DistanceMetric::Mae: {
            double acc = 0.0;
            for (std::size_t i = 0; i < z_p.size(); ++i) {
                const double d = z_p.data[i] - z.data[i];
                acc += std::abs(d);
                r.cotangent.data[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / n;
            }
            r.value = acc / n;
            break;
        }
    }
    return r;
}

PerceptualPenaltyResult perceptual_penalty(const ImageTensor& x_p, const ImageTensor& x) {
    require_same_shape(x_p, x, "perceptual_penalty");
    PerceptualPenaltyResult r;
    r.gradient = ImageTensor::zeros_like(x_p);
    double acc = 0.0;
    for (std::size_t i = 0; i < x_p.size(); ++i) {
        const double d = x_p.data[i] - x.data[i];
        acc += d * d;
        r.gradient.data[i] = 2.0 * d;
    }
    r.value = acc;
    return r;
}

ObjectiveEval objective_eval(const Encoder& enc, const ImageTensor& x_p, const ImageTensor& x,
                             const LatentTensor& z_ref, const Transform& transform, DistanceMetric metric,
                             double beta) {
    require_same_shape(x_p, x, "objective_eval");

    const ImageTensor transformed = apply(transform, x_p);
    const LatentTensor z_p = encode(enc, transformed);
    const LatentDistanceResult dist = latent_distance(z_p, z_ref, metric);
    ImageTensor grad = adjoint(transform, encode_vjp(enc, transformed, dist.cotangent));

    const PerceptualPenaltyResult pen = perceptual_penalty(x_p, x);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad.data[i] -= beta * pen.gradient.data[i];
    }

    ObjectiveEval ev;
    ev.latent_term = dist.value;
    ev.perceptual_term = pen.value;
    ev.value = dist.value - beta * pen.value;
    ev.gradient = std::move(grad);
    ev.transform_used = transform;
    return ev;
}

}  // namespace latentshield
