#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "latentshield/encoder.hpp"
#include "latentshield/tensor.hpp"

namespace latentshield {

/// 10 log10(peak^2 / MSE), capped at 99 dB (returned for MSE < 1e-12).
double psnr(const ImageTensor& a, const ImageTensor& b, double peak = 1.0);

/// Mean structural similarity with the reference defaults: 11x11
/// Gaussian window (sigma 1.5, valid positions only), C1 = (0.01 peak)^2,
/// C2 = (0.03 peak)^2, channels averaged. Requires min dim >= 11.
double ssim(const ImageTensor& a, const ImageTensor& b, double peak = 1.0);

/// u.v / (|u||v|); zero-norm inputs map to 0.
double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v);

/// Externally produced embedding vectors for one source/edited pair.
struct EmbeddingPair {
    std::vector<double> source_embed;
    std::vector<double> edited_embed;
    std::vector<double> source_text_embed;  // optional (empty when absent)
    std::vector<double> edited_text_embed;
};

/// Cosine of (edited - source) image-embedding change against the
/// matching text-embedding change. Requires all four vectors.
double direction_similarity(const EmbeddingPair& pair);

/// Per-channel sliding-window median. Even windows anchor at the
/// window's top-left pixel with edge replication on the bottom/right;
/// an even tap count takes the mean of the two central order statistics.
ImageTensor median_smooth(const ImageTensor& image, int window = 2);

/// Luminance (index 0) and chrominance (index 1) quantization tables
/// after IJG quality scaling.
std::array<std::array<int, 64>, 2> jpeg_quant_tables(int quality);

/// JPEG-shaped distortion without the bit stream: BT.601 full-range
/// YCbCr, orthonormal 8x8 DCT per channel, quantize/dequantize with the
/// quality-scaled standard tables, inverse DCT, back to RGB, clamp.
/// Extent is padded to multiples of 8 by edge replication internally.
/// No chroma subsampling.
ImageTensor jpeg_like(const ImageTensor& image, int quality = 80);

/// Mean MSE latent shift of clamp(x + eta) over seeded uniform(-budget,
/// budget) draws. The floor every protection run must beat.
double random_noise_baseline(const Encoder& enc, const ImageTensor& image, double budget, int trials,
                             std::uint64_t seed);

struct QualityReport {
    std::string pair_id;
    std::string countermeasure;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double shift_mse = 0.0;
    double shift_l2 = 0.0;
    double shift_mae = 0.0;
    bool ok = true;
    std::string error;
};

enum class Countermeasure { None, SpatialSmooth, JpegLike };

struct CountermeasureSpec {
    Countermeasure kind = Countermeasure::None;
    int ss_window = 2;
    int jpeg_quality = 80;

    std::string name() const;
    ImageTensor apply_to(const ImageTensor& image) const;
};

struct EvalPair {
    std::string id;
    ImageTensor source;
    ImageTensor candidate;
};

/// For each pair and each countermeasure (always including "none"),
/// applies the countermeasure to the candidate and reports quality and
/// latent shift against the source. Per-pair failures are collected into
/// the report rows, not thrown.
std::vector<QualityReport> evaluate_pairs(const Encoder& enc, const std::vector<EvalPair>& pairs,
                                          const std::vector<CountermeasureSpec>& counters);

}  // namespace latentshield
