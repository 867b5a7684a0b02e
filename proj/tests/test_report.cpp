#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "rcc/cli.hpp"
#include "rcc/imaging.hpp"
#include "rcc/metrics.hpp"
#include "rcc/report.hpp"
#include "rcc/survival.hpp"
#include "rcc/util.hpp"

using namespace rcc;
namespace fs = std::filesystem;

namespace {

std::vector<SurvivalSample> toy_samples() {
    return {{3, 1, {}}, {5, 0, {}}, {9, 1, {}}, {12, 1, {}}, {15, 0, {}}};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rcc_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("KM SVG is byte-deterministic and draws a staircase") {
    const KmCurve km = km_estimate(toy_samples());
    const std::string a = render_km_svg({km}, {"cohort"});
    const std::string b = render_km_svg({km}, {"cohort"});
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    CHECK(a.find("cohort") != std::string::npos);
    // a step path: one M start plus two L segments per event time and a tail
    CHECK(a.find("<path d=\"M ") != std::string::npos);
    std::size_t segments = 0;
    for (std::size_t pos = a.find(" L "); pos != std::string::npos;
         pos = a.find(" L ", pos + 1))
        ++segments;
    CHECK(segments == 2 * km.event_times.size() + 1);

    HazardRatioResult hr;
    hr.hr = 5.664;
    hr.ci_low = 2.0;
    hr.ci_high = 16.0;
    hr.p_value = 0.0001;
    const std::string annotated = render_km_svg({km}, {"cohort"}, hr);
    CHECK(annotated.find("5.664") != std::string::npos);
    CHECK(annotated != a);
}

TEST_CASE("ROC SVG carries the diagonal and AUC legend") {
    const RocCurve roc = roc_curve({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1});
    const std::string svg = render_roc_svg({roc});
    CHECK(svg == render_roc_svg({roc}));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("0.75") != std::string::npos);  // legend AUC
    AucResult ci;
    ci.auc = 0.75;
    ci.ci_low = 0.5;
    ci.ci_high = 1.0;
    const std::string with_ci = render_roc_svg({roc}, {ci});
    CHECK(with_ci.find("0.5") != std::string::npos);
}

TEST_CASE("manifest JSON has the full schema and only the timestamp varies") {
    RunManifest m;
    m.command_line = "rcc tile --input x.ppm --out d";
    m.config_digest = "deadbeef";
    m.seed = 7;
    m.input_digests["x.ppm"] = "abc123";
    m.outputs = {"patches.csv"};
    m.timestamp = "2020-01-01T00:00:00Z";
    const std::string text = manifest_to_json(m);
    const auto j = nlohmann::json::parse(text);
    CHECK(j.at("command_line") == m.command_line);
    CHECK(j.at("config_digest") == "deadbeef");
    CHECK(j.at("seed") == 7);
    CHECK(j.at("input_digests").at("x.ppm") == "abc123");
    CHECK(j.at("tool_version") == std::string(kToolVersion));
    CHECK(j.at("timestamp") == "2020-01-01T00:00:00Z");
    CHECK(j.at("outputs")[0] == "patches.csv");

    const fs::path dir = fresh_dir("manifest");
    write_manifest(dir.string(), m);
    const auto on_disk = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
    CHECK(on_disk.at("seed") == 7);
    // timestamp is filled in with an ISO-8601 UTC stamp
    const std::string ts = on_disk.at("timestamp");
    CHECK(ts.size() == 20);
    CHECK(ts.back() == 'Z');
    CHECK(ts[4] == '-');
    CHECK(ts[10] == 'T');
}

TEST_CASE("CLI rejects unknown flags with exit code 1") {
    CHECK(cli_dispatch({"--bogus"}) == 1);
    CHECK(cli_dispatch({"tile"}) == 1);          // missing required options
    CHECK(cli_dispatch({"frobnicate"}) == 1);    // unknown subcommand
    CHECK(cli_dispatch({"--help"}) == 0);
}

TEST_CASE("CLI tile runs end-to-end on a synthetic slide") {
    const fs::path dir = fresh_dir("tile_in");
    // 8x8 slide: left half dark tissue, right half white background
    RasterImage img;
    img.width = 8;
    img.height = 8;
    img.pixels.assign(8 * 8 * 3, 0);
    for (int y = 0; y < 8; ++y)
        for (int x = 4; x < 8; ++x)
            for (int c = 0; c < 3; ++c)
                img.pixels[3 * (y * 8 + x) + c] = 255;
    const fs::path slide = dir / "slide.ppm";
    write_ppm(slide.string(), img);

    const fs::path out = fresh_dir("tile_out");
    const int rc = cli_dispatch({"tile", "--input", slide.string(), "--patch-size",
                                 "4", "--out", out.string()});
    CHECK(rc == 0);
    CHECK(fs::exists(out / "manifest.json"));

    // a data error (file too small for the patch) exits 2
    const int rc2 = cli_dispatch({"tile", "--input", slide.string(), "--patch-size",
                                  "64", "--out", out.string()});
    CHECK(rc2 == 2);
}

TEST_CASE("CLI survival km produces km.json and a deterministic SVG") {
    const fs::path dir = fresh_dir("km_in");
    write_text(dir / "clinical.csv",
               "patient_id,cohort,age_years,sex,stage,grade,subtype,os_months,event\n"
               "P1,TCGA,60,M,1,2,ccRCC,10,1\n"
               "P2,TCGA,61,F,2,3,ccRCC,20,0\n"
               "P3,TCGA,62,M,3,4,ccRCC,30,1\n"
               "P4,TCGA,63,F,2,2,ccRCC,40,1\n"
               "P5,TCGA,64,M,1,1,ccRCC,50,0\n");
    const fs::path out1 = fresh_dir("km_out1");
    const fs::path out2 = fresh_dir("km_out2");
    for (const fs::path& out : {out1, out2}) {
        const int rc = cli_dispatch({"survival", "km", "--clinical",
                                     (dir / "clinical.csv").string(), "--out",
                                     out.string()});
        REQUIRE(rc == 0);
        CHECK(fs::exists(out / "km.json"));
        CHECK(fs::exists(out / "km.svg"));
        CHECK(fs::exists(out / "manifest.json"));
    }
    CHECK(read_file((out1 / "km.json").string()) ==
          read_file((out2 / "km.json").string()));
    CHECK(read_file((out1 / "km.svg").string()) ==
          read_file((out2 / "km.svg").string()));

    const auto km = nlohmann::json::parse(read_file((out1 / "km.json").string()));
    CHECK(km.at("curves").at("all").at("event_times").size() == 3);
}

TEST_CASE("CLI survival anova computes F and p") {
    const fs::path dir = fresh_dir("anova_in");
    write_text(dir / "groups.csv",
               "group,value\na,1\na,2\na,3\nb,2\nb,3\nb,4\n");
    const fs::path out = fresh_dir("anova_out");
    const int rc = cli_dispatch({"survival", "anova", "--groups",
                                 (dir / "groups.csv").string(), "--out",
                                 out.string()});
    REQUIRE(rc == 0);
    const auto j = nlohmann::json::parse(read_file((out / "anova.json").string()));
    CHECK(j.at("F").get<double>() == doctest::Approx(1.5));
}
