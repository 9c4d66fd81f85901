#include "latentshield/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "latentshield/objective.hpp"
#include "latentshield/rng.hpp"
#include "latentshield/transforms.hpp"

namespace latentshield {

double psnr(const ImageTensor& a, const ImageTensor& b, double peak) {
    require_same_shape(a, b, "psnr");
    const double mse = reduce(Reduction::MeanSq, a, &b);
    if (mse < 1e-12) return 99.0;
    return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

namespace {

// 11x11 Gaussian window, sigma 1.5, normalized.
std::vector<double> ssim_window() {
    const int k = 11;
    const double sigma = 1.5;
    std::vector<double> w(k * k);
    double sum = 0.0;
    for (int y = 0; y < k; ++y) {
        for (int x = 0; x < k; ++x) {
            const double dy = y - 5.0;
            const double dx = x - 5.0;
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            w[y * k + x] = v;
            sum += v;
        }
    }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

double ssim(const ImageTensor& a, const ImageTensor& b, double peak) {
    require_same_shape(a, b, "ssim");
    const int k = 11;
    if (a.height < k || a.width < k) {
        throw ShapeError("ssim: image " + a.shape_str() + " smaller than the 11x11 window");
    }
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    static const std::vector<double> window = ssim_window();

    double channel_sum = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        double acc = 0.0;
        std::size_t count = 0;
        for (int y = 0; y + k <= a.height; ++y) {
            for (int x = 0; x + k <= a.width; ++x) {
                double mu_a = 0.0, mu_b = 0.0;
                for (int wy = 0; wy < k; ++wy) {
                    for (int wx = 0; wx < k; ++wx) {
                        const double wgt = window[wy * k + wx];
                        mu_a += wgt * a.at(y + wy, x + wx, c);
                        mu_b += wgt * b.at(y + wy, x + wx, c);
                    }
                }
                double var_a = 0.0, var_b = 0.0, cov = 0.0;
                for (int wy = 0; wy < k; ++wy) {
                    for (int wx = 0; wx < k; ++wx) {
                        const double wgt = window[wy * k + wx];
                        const double da = a.at(y + wy, x + wx, c) - mu_a;
                        const double db = b.at(y + wy, x + wx, c) - mu_b;
                        var_a += wgt * da * da;
                        var_b += wgt * db * db;
                        cov += wgt * da * db;
                    }
                }
                const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
                const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
                acc += num / den;
                ++count;
            }
        }
        channel_sum += acc / static_cast<double>(count);
    }
    return channel_sum / static_cast<double>(a.channels);
}

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) {
        throw ShapeError("cosine_similarity: dimension mismatch " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double direction_similarity(const EmbeddingPair& pair) {
    if (pair.source_embed.empty() || pair.edited_embed.empty() || pair.source_text_embed.empty() ||
        pair.edited_text_embed.empty()) {
        throw ShapeError("direction_similarity: all four embeddings are required");
    }
    if (pair.source_embed.size() != pair.edited_embed.size()) {
        throw ShapeError("direction_similarity: image embedding dimension mismatch");
    }
    if (pair.source_text_embed.size() != pair.edited_text_embed.size()) {
        throw ShapeError("direction_similarity: text embedding dimension mismatch");
    }
    std::vector<double> dimg(pair.edited_embed.size());
    for (std::size_t i = 0; i < dimg.size(); ++i) dimg[i] = pair.edited_embed[i] - pair.source_embed[i];
    std::vector<double> dtxt(pair.edited_text_embed.size());
    for (std::size_t i = 0; i < dtxt.size(); ++i) dtxt[i] = pair.edited_text_embed[i] - pair.source_text_embed[i];
    return cosine_similarity(dimg, dtxt);
}

ImageTensor median_smooth(const ImageTensor& image, int window) {
    if (window < 2) {
        throw ConfigError("median_smooth: window must be >= 2");
    }
    // Even windows anchor top-left; odd windows center. Out-of-range
    // taps replicate the nearest edge pixel.
    const int lo = (window % 2 == 0) ? 0 : -(window / 2);
    ImageTensor out = ImageTensor::zeros_like(image);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(window) * window);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < image.channels; ++c) {
                vals.clear();
                for (int dy = lo; dy < lo + window; ++dy) {
                    for (int dx = lo; dx < lo + window; ++dx) {
                        const int yy = std::clamp(y + dy, 0, image.height - 1);
                        const int xx = std::clamp(x + dx, 0, image.width - 1);
                        vals.push_back(image.at(yy, xx, c));
                    }
                }
                std::sort(vals.begin(), vals.end());
                const std::size_t n = vals.size();
                out.at(y, x, c) = (n % 2 == 1) ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
            }
        }
    }
    return out;
}

namespace {

// ITU-T T.81 Annex K reference tables.
constexpr int kLumaQuant[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr int kChromaQuant[64] = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// Orthonormal 8-point DCT-II basis, dct[k][x] = c(k) cos((2x+1) k pi / 16).
struct DctBasis {
    double m[8][8];
    DctBasis() {
        const double pi = 3.14159265358979323846;
        for (int k = 0; k < 8; ++k) {
            const double ck = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x) {
                m[k][x] = ck * std::cos((2.0 * x + 1.0) * k * pi / 16.0);
            }
        }
    }
};

const DctBasis& dct_basis() {
    static const DctBasis b;
    return b;
}

void dct8x8(const double in[8][8], double out[8][8], bool inverse) {
    const auto& b = dct_basis();
    double tmp[8][8];
    // rows
    for (int y = 0; y < 8; ++y) {
        for (int k = 0; k < 8; ++k) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) {
                acc += in[y][x] * (inverse ? b.m[x][k] : b.m[k][x]);
            }
            tmp[y][k] = acc;
        }
    }
    // columns
    for (int k = 0; k < 8; ++k) {
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) {
                acc += tmp[y][x] * (inverse ? b.m[y][k] : b.m[k][y]);
            }
            out[k][x] = acc;
        }
    }
}

}  // namespace

std::array<std::array<int, 64>, 2> jpeg_quant_tables(int quality) {
    if (quality < 1 || quality > 100) {
        throw ConfigError("jpeg_like: quality must lie in [1, 100]");
    }
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<std::array<int, 64>, 2> tables;
    for (int i = 0; i < 64; ++i) {
        tables[0][i] = std::clamp((kLumaQuant[i] * scale + 50) / 100, 1, 255);
        tables[1][i] = std::clamp((kChromaQuant[i] * scale + 50) / 100, 1, 255);
    }
    return tables;
}

ImageTensor jpeg_like(const ImageTensor& image, int quality) {
    if (image.channels != 3) {
        throw ShapeError("jpeg_like: expected 3 channels, got " + std::to_string(image.channels));
    }
    const auto tables = jpeg_quant_tables(quality);

    const int ph = (image.height + 7) / 8 * 8;
    const int pw = (image.width + 7) / 8 * 8;

    // YCbCr planes in [0,255] levels, edge-replicated to the padded extent.
    std::vector<std::vector<double>> planes(3, std::vector<double>(static_cast<std::size_t>(ph) * pw));
    for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
            const int sy = std::min(y, image.height - 1);
            const int sx = std::min(x, image.width - 1);
            const double r = image.at(sy, sx, 0) * 255.0;
            const double g = image.at(sy, sx, 1) * 255.0;
            const double b = image.at(sy, sx, 2) * 255.0;
            const std::size_t i = static_cast<std::size_t>(y) * pw + x;
            planes[0][i] = 0.299 * r + 0.587 * g + 0.114 * b;
            planes[1][i] = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
            planes[2][i] = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
        }
    }

    for (int p = 0; p < 3; ++p) {
        const auto& q = tables[p == 0 ? 0 : 1];
        for (int by = 0; by < ph; by += 8) {
            for (int bx = 0; bx < pw; bx += 8) {
                double block[8][8], coef[8][8];
                for (int y = 0; y < 8; ++y) {
                    for (int x = 0; x < 8; ++x) {
                        block[y][x] = planes[p][static_cast<std::size_t>(by + y) * pw + (bx + x)] - 128.0;
                    }
                }
                dct8x8(block, coef, false);
                for (int y = 0; y < 8; ++y) {
                    for (int x = 0; x < 8; ++x) {
                        const double step = static_cast<double>(q[y * 8 + x]);
                        coef[y][x] = std::round(coef[y][x] / step) * step;
                    }
                }
                dct8x8(coef, block, true);
                for (int y = 0; y < 8; ++y) {
                    for (int x = 0; x < 8; ++x) {
                        planes[p][static_cast<std::size_t>(by + y) * pw + (bx + x)] = block[y][x] + 128.0;
                    }
                }
            }
        }
    }

    ImageTensor out = ImageTensor::zeros_like(image);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * pw + x;
            const double yy = planes[0][i];
            const double cb = planes[1][i] - 128.0;
            const double cr = planes[2][i] - 128.0;
            out.at(y, x, 0) = std::clamp((yy + 1.402 * cr) / 255.0, 0.0, 1.0);
            out.at(y, x, 1) = std::clamp((yy - 0.344136 * cb - 0.714136 * cr) / 255.0, 0.0, 1.0);
            out.at(y, x, 2) = std::clamp((yy + 1.772 * cb) / 255.0, 0.0, 1.0);
        }
    }
    return out;
}

double random_noise_baseline(const Encoder& enc, const ImageTensor& image, double budget, int trials,
                             std::uint64_t seed) {
    if (trials < 1) {
        throw ConfigError("random_noise_baseline: trials must be >= 1");
    }
    const LatentTensor z_ref = encode(enc, image);
    SplitMix64 rng(seed);
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        ImageTensor noisy = image;
        for (double& v : noisy.data) {
            v = std::clamp(v + rng.next_uniform(-budget, budget), 0.0, 1.0);
        }
        sum += latent_distance(encode(enc, noisy), z_ref, DistanceMetric::Mse).value;
    }
    return sum / static_cast<double>(trials);
}

std::string CountermeasureSpec::name() const {
    switch (kind) {
        case Countermeasure::None: return "none";
        case Countermeasure::SpatialSmooth: return "ss";
        case Countermeasure::JpegLike: return "jpeg";
    }
    return "?";
}

ImageTensor CountermeasureSpec::apply_to(const ImageTensor& image) const {
    switch (kind) {
        case Countermeasure::None: return image;
        case Countermeasure::SpatialSmooth: return median_smooth(image, ss_window);
        case Countermeasure::JpegLike: return jpeg_like(image, jpeg_quality);
    }
    throw Error("CountermeasureSpec: unreachable");
}

std::vector<QualityReport> evaluate_pairs(const Encoder& enc, const std::vector<EvalPair>& pairs,
                                          const std::vector<CountermeasureSpec>& counters) {
    std::vector<CountermeasureSpec> all;
    all.push_back(CountermeasureSpec{Countermeasure::None, 2, 80});
    all.insert(all.end(), counters.begin(), counters.end());

    std::vector<QualityReport> rows;
    rows.reserve(pairs.size() * all.size());
    for (const auto& pair : pairs) {
        for (const auto& cm : all) {
            QualityReport row;
            row.pair_id = pair.id;
            row.countermeasure = cm.name();
            try {
                require_same_shape(pair.source, pair.candidate, "evaluate_pairs");
                const ImageTensor candidate = cm.apply_to(pair.candidate);
                row.psnr_db = psnr(pair.source, candidate);
                row.ssim = ssim(pair.source, candidate);
                const LatentTensor z_src = encode(enc, pair.source);
                const LatentTensor z_cand = encode(enc, candidate);
                row.shift_mse = latent_distance(z_cand, z_src, DistanceMetric::Mse).value;
                row.shift_l2 = latent_distance(z_cand, z_src, DistanceMetric::L2).value;
                row.shift_mae = latent_distance(z_cand, z_src, DistanceMetric::Mae).value;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace latentshield
