#include "latentshield/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace latentshield {

void ProtectOptions::validate() const {
    if (budget < 0.0 || budget > 1.0) {
        throw ConfigError("ProtectOptions: budget must lie in [0, 1] pixel units");
    }
    if (beta < 0.0) {
        throw ConfigError("ProtectOptions: beta must be nonnegative");
    }
    if (max_iters < 1) {
        throw ConfigError("ProtectOptions: max_iters must be >= 1");
    }
    if (!(convergence.rel_tol > 0.0)) {
        throw ConfigError("ProtectOptions: convergence rel_tol must be positive");
    }
    if (convergence.window < 1) {
        throw ConfigError("ProtectOptions: convergence window must be >= 1");
    }
    if (eot) {
        distribution.validate();
    }
}

double ProtectOptions::resolved_alpha(std::size_t n_elements) const {
    if (step_alpha > 0.0) return step_alpha;
    if (step_rule == StepRule::Sign) return budget / 8.0;
    return 2.0 * budget * std::sqrt(static_cast<double>(n_elements)) / static_cast<double>(max_iters);
}

double ProtectOptions::resolved_init_sigma() const {
    return init_sigma >= 0.0 ? init_sigma : budget / 4.0;
}

namespace {

ImageTensor gaussian_delta(int h, int w, int c, double sigma, SplitMix64& rng) {
    ImageTensor d(h, w, c);
    for (double& v : d.data) {
        v = rng.next_gaussian(sigma);
    }
    return d;
}

// Relative improvement of the trailing window mean over the preceding
// window mean; converged once it drops below rel_tol.
bool window_converged(const std::vector<double>& values, const ConvergenceOptions& conv) {
    const std::size_t w = static_cast<std::size_t>(conv.window);
    if (values.size() < 2 * w) return false;
    const auto mean = [](const double* begin, std::size_t n) {
        return std::accumulate(begin, begin + n, 0.0) / static_cast<double>(n);
    };
    const double m_new = mean(values.data() + values.size() - w, w);
    const double m_old = mean(values.data() + values.size() - 2 * w, w);
    const double improvement = (m_new - m_old) / std::max(std::abs(m_old), 1e-12);
    return improvement < conv.rel_tol;
}

void ascend(ImageTensor& delta, const ImageTensor& gradient, double alpha, StepRule rule, double grad_norm) {
    if (rule == StepRule::Sign) {
        for (std::size_t i = 0; i < delta.size(); ++i) {
            const double g = gradient.data[i];
            delta.data[i] += alpha * (g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0));
        }
        return;
    }
    if (grad_norm < 1e-12) return;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        delta.data[i] += alpha * gradient.data[i] / grad_norm;
    }
}

}  // namespace

ProtectionResult protect_single(const Encoder& enc, const ImageTensor& x, const ProtectOptions& opts) {
    opts.validate();
    const double xi = opts.budget;
    const double alpha = opts.resolved_alpha(x.size());
    SplitMix64 rng(opts.seed);

    ImageTensor delta = gaussian_delta(x.height, x.width, x.channels, opts.resolved_init_sigma(), rng);
    clip_inplace(delta, -xi, xi);
    clamp_delta_to_pixel_range(x, delta);

    const LatentTensor z_ref = encode(enc, x);

    ProtectionResult result;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(opts.max_iters));

    for (int step = 1; step <= opts.max_iters; ++step) {
        const Transform transform = opts.eot ? sample(opts.distribution, rng) : Transform::identity();

        ImageTensor x_p = x;
        for (std::size_t i = 0; i < x_p.size(); ++i) x_p.data[i] += delta.data[i];

        const ObjectiveEval ev = objective_eval(enc, x_p, x, z_ref, transform, opts.metric, opts.beta);
        if (!ev.gradient.all_finite()) {
            throw Error("protect_single: non-finite gradient at iteration " + std::to_string(step));
        }
        const double gnorm = l2_norm(ev.gradient);

        ascend(delta, ev.gradient, alpha, opts.step_rule, gnorm);
        clip_inplace(delta, -xi, xi);
        clamp_delta_to_pixel_range(x, delta);

        StepRecord rec;
        rec.iteration = step;
        rec.value = ev.value;
        rec.latent_term = ev.latent_term;
        rec.perceptual_term = ev.perceptual_term;
        rec.grad_norm = gnorm;
        rec.delta_inf = linf_norm(delta);
        rec.transform = ev.transform_used.describe();
        result.trace.push_back(std::move(rec));

        values.push_back(ev.value);
        result.iterations_used = step;
        if (window_converged(values, opts.convergence)) {
            result.converged = true;
            break;
        }
    }

    result.protected_image = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        result.protected_image.data[i] = std::clamp(x.data[i] + delta.data[i], 0.0, 1.0);
    }
    result.perturbation = Perturbation{std::move(delta), xi};
    return result;
}

UniversalResult protect_universal(const Encoder& enc, const std::vector<ImageTensor>& images,
                                  const ProtectOptions& opts) {
    opts.validate();
    if (opts.mode != ProtectMode::Universal) {
        throw ConfigError("protect_universal: opts.mode must be universal");
    }
    if (images.empty()) {
        throw ShapeError("protect_universal: empty image set");
    }
    for (std::size_t i = 1; i < images.size(); ++i) {
        if (!images[i].same_shape(images[0])) {
            throw ShapeError("protect_universal: image " + std::to_string(i) + " shape " +
                             images[i].shape_str() + " != image 0 shape " + images[0].shape_str());
        }
    }

    const double xi = opts.budget;
    const double alpha = opts.resolved_alpha(images[0].size());
    SplitMix64 rng(opts.seed);

    ImageTensor delta =
        gaussian_delta(images[0].height, images[0].width, images[0].channels, opts.resolved_init_sigma(), rng);
    clip_inplace(delta, -xi, xi);

    std::vector<LatentTensor> z_refs;
    z_refs.reserve(images.size());
    for (const auto& img : images) z_refs.push_back(encode(enc, img));

    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), 0);

    UniversalResult result;
    int visit = 0;
    for (int epoch = 1; epoch <= opts.max_iters; ++epoch) {
        if (opts.universal_shuffle) {
            for (std::size_t i = order.size(); i-- > 1;) {
                const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
                std::swap(order[i], order[j]);
            }
        }

        double epoch_sum = 0.0;
        for (std::size_t idx : order) {
            const Transform transform = opts.eot ? sample(opts.distribution, rng) : Transform::identity();

            ImageTensor x_p = images[idx];
            for (std::size_t i = 0; i < x_p.size(); ++i) x_p.data[i] += delta.data[i];

            const ObjectiveEval ev =
                objective_eval(enc, x_p, images[idx], z_refs[idx], transform, opts.metric, opts.beta);
            if (!ev.gradient.all_finite()) {
                throw Error("protect_universal: non-finite gradient at epoch " + std::to_string(epoch) +
                            ", image " + std::to_string(idx));
            }
            const double gnorm = l2_norm(ev.gradient);

            ascend(delta, ev.gradient, alpha, opts.step_rule, gnorm);
            clip_inplace(delta, -xi, xi);

            StepRecord rec;
            rec.iteration = ++visit;
            rec.image_index = static_cast<int>(idx);
            rec.value = ev.value;
            rec.latent_term = ev.latent_term;
            rec.perceptual_term = ev.perceptual_term;
            rec.grad_norm = gnorm;
            rec.delta_inf = linf_norm(delta);
            rec.transform = ev.transform_used.describe();
            result.trace.push_back(std::move(rec));
            epoch_sum += ev.value;
        }

        result.epoch_values.push_back(epoch_sum / static_cast<double>(images.size()));
        result.epochs_used = epoch;
        if (window_converged(result.epoch_values, opts.convergence)) {
            result.converged = true;
            break;
        }
    }

    result.perturbation = Perturbation{std::move(delta), xi};
    return result;
}

ImageTensor apply_perturbation(const ImageTensor& x, const Perturbation& perturbation) {
    require_same_shape(x, perturbation.delta, "apply_perturbation");
    ImageTensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data[i] = std::clamp(x.data[i] + perturbation.delta.data[i], 0.0, 1.0);
    }
    return out;
}

}  // namespace latentshield
