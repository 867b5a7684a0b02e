#include "rcc/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rcc/errors.hpp"
#include "rcc/util.hpp"

namespace rcc {

namespace {

void check_same_dims(const Mask& a, const Mask& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionMismatch(std::string(what) + ": mask dimensions differ");
}

double clamp_prob(double p) { return std::clamp(p, 1e-7, 1.0 - 1e-7); }

}  // namespace

Mask detect_tissue(const RasterImage& image, int white_threshold) {
    Mask mask;
    mask.width = image.width;
    mask.height = image.height;
    mask.values.resize(std::size_t(image.width) * image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const int lo = std::min({int(image.r(x, y)), int(image.g(x, y)), int(image.b(x, y))});
            mask.at(x, y) = lo > white_threshold ? 0.0 : 1.0;
        }
    }
    return mask;
}

std::vector<Patch> tile_image(const RasterImage& image, const Mask& tissue,
                              int patch_size, double min_tissue_fraction) {
    if (patch_size < 1) throw DataError("patch_size must be >= 1");
    if (tissue.width != image.width || tissue.height != image.height)
        throw DimensionMismatch("tile_image: tissue mask dimensions differ");
    if (image.width < patch_size || image.height < patch_size)
        throw ImageSmallerThanPatch("image " + std::to_string(image.width) + "x" +
                                    std::to_string(image.height) +
                                    " smaller than patch size " +
                                    std::to_string(patch_size));
    std::vector<Patch> patches;
    for (int oy = 0; oy + patch_size <= image.height; oy += patch_size) {
        for (int ox = 0; ox + patch_size <= image.width; ox += patch_size) {
            long tissue_px = 0;
            for (int y = oy; y < oy + patch_size; ++y)
                for (int x = ox; x < ox + patch_size; ++x)
                    if (tissue.at(x, y) != 0.0) ++tissue_px;
            const double frac =
                double(tissue_px) / (double(patch_size) * patch_size);
            if (frac < min_tissue_fraction) continue;
            Patch p;
            p.origin_x = ox;
            p.origin_y = oy;
            p.size = patch_size;
            p.tissue_fraction = frac;
            p.pixels.width = patch_size;
            p.pixels.height = patch_size;
            p.pixels.pixels.resize(std::size_t(patch_size) * patch_size * 3);
            for (int y = 0; y < patch_size; ++y) {
                const std::uint8_t* src =
                    image.pixels.data() + 3 * (std::size_t(oy + y) * image.width + ox);
                std::uint8_t* dst =
                    p.pixels.pixels.data() + 3 * std::size_t(y) * patch_size;
                std::copy(src, src + 3 * std::size_t(patch_size), dst);
            }
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

FeatureVector patch_descriptor(const Patch& patch, int dim) {
    if (dim != 64) throw UnsupportedDim("descriptor dim must be 64");
    const RasterImage& img = patch.pixels;
    const std::size_t n = std::size_t(img.width) * img.height;
    FeatureVector fv;
    fv.values.assign(64, 0.0);

    // 16-bin histogram + mean/std per channel
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint8_t v = img.pixels[3 * i + c];
            fv.values[16 * c + v / 16] += 1.0;
            sum += v;
            sumsq += double(v) * v;
        }
        for (int b = 0; b < 16; ++b) fv.values[16 * c + b] /= double(n);
        const double mean = sum / double(n);
        const double var = std::max(0.0, sumsq / double(n) - mean * mean);
        fv.values[48 + 2 * c] = mean / 255.0;
        fv.values[48 + 2 * c + 1] = std::sqrt(var) / 255.0;
    }

    // horizontal luminance-difference gradients
    long grad_samples = 0;
    long edge_px = 0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x + 1 < img.width; ++x) {
            const double l0 = (img.r(x, y) + img.g(x, y) + img.b(x, y)) / 3.0;
            const double l1 =
                (img.r(x + 1, y) + img.g(x + 1, y) + img.b(x + 1, y)) / 3.0;
            const double mag = std::fabs(l1 - l0);
            int bin = int(mag / 32.0);
            if (bin > 7) bin = 7;
            fv.values[54 + bin] += 1.0;
            if (mag > 32.0) ++edge_px;
            ++grad_samples;
        }
    }
    if (grad_samples > 0) {
        for (int b = 0; b < 8; ++b) fv.values[54 + b] /= double(grad_samples);
    } else {
        fv.values[54] = 1.0;  // single-column patch: no gradients, mass on bin 0
    }
    fv.values[62] = patch.tissue_fraction;
    fv.values[63] = double(edge_px) / double(n);
    return fv;
}

double dice_score(const Mask& a, const Mask& b) {
    check_same_dims(a, b, "dice_score");
    long inter = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const bool av = a.values[i] != 0.0;
        const bool bv = b.values[i] != 0.0;
        na += av;
        nb += bv;
        inter += av && bv;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * double(inter) / double(na + nb);
}

double dice_loss(const Mask& pred, const Mask& truth) {
    check_same_dims(pred, truth, "dice_loss");
    constexpr double eps = 1e-6;
    double inter = 0.0, sp = 0.0, st = 0.0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        inter += pred.values[i] * truth.values[i];
        sp += pred.values[i];
        st += truth.values[i];
    }
    return 1.0 - (2.0 * inter + eps) / (sp + st + eps);
}

double bce_loss(double pred, double truth) {
    const double p = clamp_prob(pred);
    return -(truth * std::log(p) + (1.0 - truth) * std::log(1.0 - p));
}

double bce_loss(const Mask& pred, const Mask& truth) {
    check_same_dims(pred, truth, "bce_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.values.size(); ++i)
        sum += bce_loss(pred.values[i], truth.values[i]);
    return sum / double(pred.values.size());
}

double multitask_loss(const SegPair& whole_seg,
                      const std::optional<SegPair>& tumor_seg,
                      std::pair<double, double> class_logit, double w1,
                      double w2, double w3) {
    double total = w1 * (dice_loss(whole_seg.pred, whole_seg.truth) +
                         bce_loss(whole_seg.pred, whole_seg.truth));
    if (tumor_seg)
        total += w2 * (dice_loss(tumor_seg->pred, tumor_seg->truth) +
                       bce_loss(tumor_seg->pred, tumor_seg->truth));
    total += w3 * bce_loss(class_logit.first, class_logit.second);
    return total;
}

double tumor_area_fraction(const Mask& seg, const Mask& tissue) {
    check_same_dims(seg, tissue, "tumor_area_fraction");
    long inter = 0, nt = 0;
    for (std::size_t i = 0; i < seg.values.size(); ++i) {
        const bool tv = tissue.values[i] != 0.0;
        nt += tv;
        inter += tv && seg.values[i] != 0.0;
    }
    if (nt == 0) throw EmptyTissueMask("tissue mask has no tissue pixels");
    return double(inter) / double(nt);
}

bool slide_positive(double fraction, double threshold) {
    return fraction > threshold;
}

namespace {

// reads magic, dims, maxval; returns offset of the pixel payload
std::size_t parse_pnm_header(const std::string& data, const char* magic,
                             int& width, int& height) {
    std::istringstream in(data);
    std::string m;
    in >> m;
    if (m != magic) throw DataError(std::string("expected ") + magic + " file");
    int maxval = 0;
    in >> width >> height >> maxval;
    if (!in || width < 1 || height < 1) throw DataError("bad PNM dimensions");
    if (maxval != 255) throw DataError("only 8-bit PNM supported");
    return std::size_t(in.tellg()) + 1;  // single whitespace after maxval
}

}  // namespace

RasterImage read_ppm(const std::string& path) {
    const std::string data = read_file(path);
    RasterImage img;
    const std::size_t off = parse_pnm_header(data, "P6", img.width, img.height);
    const std::size_t need = std::size_t(img.width) * img.height * 3;
    if (data.size() < off + need) throw DataError("truncated PPM: " + path);
    img.pixels.assign(data.begin() + off, data.begin() + off + need);
    return img;
}

void write_ppm(const std::string& path, const RasterImage& image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.append(image.pixels.begin(), image.pixels.end());
    write_file(path, out);
}

Mask read_pgm(const std::string& path) {
    const std::string data = read_file(path);
    Mask mask;
    const std::size_t off = parse_pnm_header(data, "P5", mask.width, mask.height);
    const std::size_t need = std::size_t(mask.width) * mask.height;
    if (data.size() < off + need) throw DataError("truncated PGM: " + path);
    mask.values.resize(need);
    for (std::size_t i = 0; i < need; ++i)
        mask.values[i] = double(std::uint8_t(data[off + i])) / 255.0;
    return mask;
}

void write_pgm(const std::string& path, const Mask& mask) {
    std::string out = "P5\n" + std::to_string(mask.width) + " " +
                      std::to_string(mask.height) + "\n255\n";
    out.reserve(out.size() + mask.values.size());
    for (double v : mask.values)
        out.push_back(char(std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    write_file(path, out);
}

std::vector<PatchFeatureRow> parse_features_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw MissingColumn("empty features file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "slide_id" || header[1] != "patch_x" ||
        header[2] != "patch_y")
        throw MissingColumn("features header must start slide_id,patch_x,patch_y,f0,...");
    const std::size_t d = header.size() - 3;
    for (std::size_t i = 0; i < d; ++i)
        if (header[3 + i] != "f" + std::to_string(i))
            throw MissingColumn("features header: expected f" + std::to_string(i));

    std::vector<PatchFeatureRow> rows;
    int rowno = 1;
    while (std::getline(in, line)) {
        ++rowno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw MissingColumn("features row " + std::to_string(rowno) +
                                ": field count mismatch");
        const std::string ctx = "features row " + std::to_string(rowno);
        PatchFeatureRow r;
        r.slide_id = f[0];
        r.patch_x = static_cast<int>(parse_long(f[1], ctx));
        r.patch_y = static_cast<int>(parse_long(f[2], ctx));
        r.features.values.reserve(d);
        for (std::size_t i = 0; i < d; ++i)
            r.features.values.push_back(parse_double(f[3 + i], ctx));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string serialize_features_csv(const std::vector<PatchFeatureRow>& rows) {
    std::ostringstream out;
    const std::size_t d = rows.empty() ? 0 : rows.front().features.values.size();
    out << "slide_id,patch_x,patch_y";
    for (std::size_t i = 0; i < d; ++i) out << ",f" << i;
    out << "\n";
    for (const auto& r : rows) {
        out << r.slide_id << ',' << r.patch_x << ',' << r.patch_y;
        for (double v : r.features.values) out << ',' << format_double(v);
        out << "\n";
    }
    return out.str();
}

}  // namespace rcc
