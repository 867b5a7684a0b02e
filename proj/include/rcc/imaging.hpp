#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rcc {

struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB

    std::uint8_t r(int x, int y) const { return pixels[3 * (std::size_t(y) * width + x)]; }
    std::uint8_t g(int x, int y) const { return pixels[3 * (std::size_t(y) * width + x) + 1]; }
    std::uint8_t b(int x, int y) const { return pixels[3 * (std::size_t(y) * width + x) + 2]; }
};

// Per-pixel values in [0,1]; binary masks use exactly {0,1}.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
    double& at(int x, int y) { return values[std::size_t(y) * width + x]; }
};

struct Patch {
    int origin_x = 0;
    int origin_y = 0;
    int size = 0;
    RasterImage pixels;
    double tissue_fraction = 0.0;
};

struct FeatureVector {
    std::vector<double> values;
    int dim() const { return static_cast<int>(values.size()); }
};

// Background iff min(R,G,B) > white_threshold; everything else is tissue.
Mask detect_tissue(const RasterImage& image, int white_threshold = 220);

// Non-overlapping grid tiles from (0,0); partial edge tiles dropped, tiles
// below the tissue-fraction floor dropped; output ordered by (y, x).
std::vector<Patch> tile_image(const RasterImage& image, const Mask& tissue,
                              int patch_size = 1024,
                              double min_tissue_fraction = 0.25);

// Deterministic 64-d patch descriptor, in layout order:
//   [0,48)  16-bin L1-normalized intensity histogram per channel (R,G,B)
//   [48,54) per-channel mean and standard deviation, /255
//   [54,62) 8-bin L1-normalized histogram of |horizontal luminance diff|
//   [62]    tissue_fraction
//   [63]    edge density: fraction of pixels with horizontal diff > 32
FeatureVector patch_descriptor(const Patch& patch, int dim = 64);

// 2|A∩B| / (|A|+|B|) on binary masks; both empty -> 1.0 by convention
double dice_score(const Mask& a, const Mask& b);

// soft Dice, 1 - (2*sum(p*t)+eps)/(sum(p)+sum(t)+eps), eps = 1e-6
double dice_loss(const Mask& pred, const Mask& truth);

double bce_loss(double pred, double truth);
double bce_loss(const Mask& pred, const Mask& truth);

struct SegPair {
    Mask pred;
    Mask truth;
};

// w1*(dice+bce)(whole) + w2*(dice+bce)(tumor, 0 if absent) + w3*bce(class)
double multitask_loss(const SegPair& whole_seg,
                      const std::optional<SegPair>& tumor_seg,
                      std::pair<double, double> class_logit,
                      double w1 = 1.0, double w2 = 1.0, double w3 = 1.0);

double tumor_area_fraction(const Mask& seg, const Mask& tissue);

// strict "more than": 0.05 is negative at the default threshold
bool slide_positive(double fraction, double threshold = 0.05);

// binary PPM (P6) / PGM (P5), 8-bit; PGM value v maps to probability v/255
RasterImage read_ppm(const std::string& path);
void write_ppm(const std::string& path, const RasterImage& image);
Mask read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Mask& mask);

struct PatchFeatureRow {
    std::string slide_id;
    int patch_x = 0;
    int patch_y = 0;
    FeatureVector features;
};

// features.csv: header slide_id,patch_x,patch_y,f0,...,f{d-1}
std::vector<PatchFeatureRow> parse_features_csv(const std::string& text);
std::string serialize_features_csv(const std::vector<PatchFeatureRow>& rows);

}  // namespace rcc
