#include "rcc/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "rcc/errors.hpp"
#include "rcc/util.hpp"

namespace rcc {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 20;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b"};

std::string svg_header() {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\">\n"
        << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    return out.str();
}

std::string axes(const std::string& xlabel, const std::string& ylabel) {
    std::ostringstream out;
    const int x0 = kMarginLeft, y0 = kHeight - kMarginBottom;
    const int x1 = kWidth - kMarginRight, y1 = kMarginTop;
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << xlabel
        << "</text>\n"
        << "<text x=\"18\" y=\"" << (y0 + y1) / 2
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\""
        << " transform=\"rotate(-90 18 " << (y0 + y1) / 2 << ")\">" << ylabel
        << "</text>\n";
    return out.str();
}

}  // namespace

std::string render_km_svg(const std::vector<KmCurve>& curves,
                          const std::vector<std::string>& names,
                          const std::optional<HazardRatioResult>& hr) {
    if (curves.empty()) throw EmptyCurve("render_km_svg: no curves");
    double tmax = 1.0;
    for (const auto& c : curves) {
        if (!c.event_times.empty()) tmax = std::max(tmax, c.event_times.back());
        if (!c.censor_times.empty())
            tmax = std::max(tmax, *std::max_element(c.censor_times.begin(),
                                                    c.censor_times.end()));
    }
    const double px0 = kMarginLeft, py0 = kHeight - kMarginBottom;
    const double pw = kWidth - kMarginLeft - kMarginRight;
    const double ph = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double t) { return px0 + pw * t / tmax; };
    auto py = [&](double s) { return py0 - ph * s; };

    std::ostringstream out;
    out << svg_header() << axes("time (months)", "survival probability");
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const KmCurve& c = curves[ci];
        const char* color = kPalette[ci % std::size(kPalette)];
        std::ostringstream path;
        path << "M " << format_double(px(0.0)) << ' ' << format_double(py(1.0));
        double s = 1.0;
        for (std::size_t i = 0; i < c.event_times.size(); ++i) {
            path << " L " << format_double(px(c.event_times[i])) << ' '
                 << format_double(py(s));
            s = c.surv[i];
            path << " L " << format_double(px(c.event_times[i])) << ' '
                 << format_double(py(s));
        }
        path << " L " << format_double(px(tmax)) << ' ' << format_double(py(s));
        out << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        for (double t : c.censor_times) {
            const double y = py(c.survival_at(t));
            out << "<line x1=\"" << format_double(px(t)) << "\" y1=\""
                << format_double(y - 5) << "\" x2=\"" << format_double(px(t))
                << "\" y2=\"" << format_double(y + 5) << "\" stroke=\"" << color
                << "\" stroke-width=\"1\"/>\n";
        }
        const std::string label =
            ci < names.size() ? names[ci] : "group " + std::to_string(ci);
        out << "<text x=\"" << kWidth - kMarginRight - 160 << "\" y=\""
            << kMarginTop + 20 + 18 * int(ci)
            << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"" << color << "\">"
            << label << "</text>\n";
    }
    if (hr) {
        out << "<text x=\"" << kMarginLeft + 10 << "\" y=\"" << kMarginTop + 20
            << "\" font-family=\"sans-serif\" font-size=\"13\">HR "
            << format_double(hr->hr) << " (" << format_double(hr->ci_low) << "-"
            << format_double(hr->ci_high) << "), p=" << format_double(hr->p_value)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_roc_svg(const std::vector<RocCurve>& curves,
                           const std::vector<AucResult>& cis) {
    if (curves.empty()) throw EmptyCurve("render_roc_svg: no curves");
    const double px0 = kMarginLeft, py0 = kHeight - kMarginBottom;
    const double pw = kWidth - kMarginLeft - kMarginRight;
    const double ph = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double f) { return px0 + pw * f; };
    auto py = [&](double t) { return py0 - ph * t; };

    std::ostringstream out;
    out << svg_header() << axes("false positive rate", "true positive rate");
    out << "<line x1=\"" << format_double(px(0)) << "\" y1=\"" << format_double(py(0))
        << "\" x2=\"" << format_double(px(1)) << "\" y2=\"" << format_double(py(1))
        << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const RocCurve& c = curves[ci];
        const char* color = kPalette[ci % std::size(kPalette)];
        std::ostringstream path;
        for (std::size_t i = 0; i < c.points.size(); ++i)
            path << (i == 0 ? "M " : " L ") << format_double(px(c.points[i].fpr)) << ' '
                 << format_double(py(c.points[i].tpr));
        out << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        std::ostringstream label;
        label << (c.name.empty() ? "curve " + std::to_string(ci) : c.name)
              << " AUC=" << format_double(c.auc);
        if (ci < cis.size())
            label << " (" << format_double(cis[ci].ci_low) << "-"
                  << format_double(cis[ci].ci_high) << ")";
        out << "<text x=\"" << kMarginLeft + 170 << "\" y=\""
            << kHeight - kMarginBottom - 20 - 18 * int(curves.size() - 1 - ci)
            << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"" << color << "\">"
            << label.str() << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string manifest_to_json(const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["command_line"] = manifest.command_line;
    j["config_digest"] = manifest.config_digest;
    j["seed"] = manifest.seed;
    j["input_digests"] = manifest.input_digests;
    j["tool_version"] = manifest.tool_version;
    j["timestamp"] = manifest.timestamp;
    j["outputs"] = manifest.outputs;
    return j.dump(2) + "\n";
}

void write_manifest(const std::string& dir, RunManifest manifest) {
    const std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    manifest.timestamp = buf;
    write_file(dir + "/manifest.json", manifest_to_json(manifest));
}

}  // namespace rcc
