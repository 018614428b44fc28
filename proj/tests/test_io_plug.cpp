#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "hncg/blend.hpp"
#include "hncg/error.hpp"
#include "hncg/image_io.hpp"
#include "hncg/metrics.hpp"
#include "hncg/plug.hpp"
#include "hncg/raster.hpp"
#include "hncg/synthesis.hpp"
#include "oracles.hpp"

using namespace hncg;
namespace fs = std::filesystem;

namespace {

Image quantized(const Image& img) { return dequantize(quantize(img)); }

PlugConfig plug(const std::string& command, double timeout = 20.0) {
    PlugConfig p;
    p.command = command;
    p.timeout_s = timeout;
    return p;
}

SemanticImage random_labels(std::mt19937_64& rng, int w, int h, int classes) {
    SemanticImage m(w, h, 1);
    for (auto& v : m.values()) v = static_cast<ClassId>(std::uniform_int_distribution<int>(0, classes)(rng));
    return m;
}

PlugError::Reason reason_of(auto&& fn) {
    try {
        fn();
    } catch (const PlugError& e) {
        return e.reason();
    }
    FAIL("no PlugError thrown");
    return PlugError::Reason::launch_failed;
}

}  // namespace

TEST_CASE("quantization rounds to nearest and clamps") {
    CHECK(quantize_unit(0.0) == 0);
    CHECK(quantize_unit(1.0) == 255);
    CHECK(quantize_unit(-3.0) == 0);
    CHECK(quantize_unit(7.0) == 255);
    CHECK(quantize_unit(0.5) == 128);
    CHECK(quantize_unit(10.4 / 255.0) == 10);
    CHECK(quantize_unit(10.6 / 255.0) == 11);
}

TEST_CASE("PNG round trips are exact for 8-bit content") {
    std::mt19937_64 rng(1);
    TempDir dir;
    const Image rgb = quantized(oracle::random_image(rng, 13, 7, 3));
    write_rgb_png(dir.file("a.png"), rgb);
    CHECK(read_rgb_png(dir.file("a.png")) == rgb);
    CHECK(read_color_image(dir.file("a.png")) == rgb);

    const Image mask = quantized(oracle::random_image(rng, 13, 7, 1));
    write_mask_png(dir.file("m.png"), mask);
    CHECK(read_mask_png(dir.file("m.png")) == mask);

    const SemanticImage labels = random_labels(rng, 9, 5, 200);
    write_label_png(dir.file("l.png"), labels);
    CHECK(read_label_png(dir.file("l.png")) == labels);

    // An RGB file read as RGBA is opaque with unchanged colors.
    const Bytes8 rgba = read_png(dir.file("a.png"), 4);
    const Bytes8 bytes = quantize(rgb);
    for (int y = 0; y < 7; ++y) {
        for (int x = 0; x < 13; ++x) {
            for (int c = 0; c < 3; ++c) REQUIRE(rgba.at(x, y, c) == bytes.at(x, y, c));
            REQUIRE(rgba.at(x, y, 3) == 255);
        }
    }
}

TEST_CASE("binary PPM textures are read, with comments in the header") {
    TempDir dir;
    const std::string body = std::string("P6\n# made by hand\n2 1\n255\n") + std::string("\xff\x00\x00\x00\x80\xff", 6);
    fixture::write_text(dir.file("t.ppm"), body);
    const Image img = read_color_image(dir.file("t.ppm"));
    REQUIRE(img.width() == 2);
    CHECK(img.at(0, 0, 0) == 1.0);
    CHECK(img.at(1, 0, 1) == 128.0 / 255.0);
    CHECK(img.at(1, 0, 2) == 1.0);
    fixture::write_text(dir.file("bad.ppm"), "P3\n1 1\n255\n0 0 0\n");
    CHECK_THROWS_AS(read_color_image(dir.file("bad.ppm")), ValidationError);
    CHECK_THROWS_AS(read_rgb_png(dir.file("missing.png")), ValidationError);
}

TEST_CASE("shell quoting and template expansion") {
    CHECK(shell_quote("plain") == "'plain'");
    CHECK(shell_quote("it's") == "'it'\\''s'");
    const std::string cmd = expand_template("tool {in} -o {out} {other}", {{"in", "/a b/x.png"}, {"out", "/y.png"}});
    CHECK(cmd == "tool '/a b/x.png' -o '/y.png' {other}");
}

TEST_CASE("plug templates must name input and output") {
    CHECK_THROWS_AS(plug("cat {in}").validate(), ValidationError);
    CHECK_THROWS_AS(plug("cat > {out}").validate(), ValidationError);
    CHECK_NOTHROW(plug("cp {in} {out}").validate());
}

TEST_CASE("plug timeout defaults to 120 s and honours the environment") {
    ::unsetenv("HNCG_PLUG_TIMEOUT");
    CHECK(PlugConfig::default_timeout() == 120.0);
    ::setenv("HNCG_PLUG_TIMEOUT", "2.5", 1);
    CHECK(PlugConfig::from_command("x {in} {out}").timeout_s == 2.5);
    ::unsetenv("HNCG_PLUG_TIMEOUT");
}

TEST_CASE("a failing plug reports its exit status") {
    try {
        run_plug(plug("exit 3 # {in} {out}"), {{"in", "/dev/null"}, {"out", "/dev/null"}});
        FAIL("expected a PlugError");
    } catch (const PlugError& e) {
        CHECK(e.reason() == PlugError::Reason::exit_status);
        CHECK(e.exit_status() == 3);
        CHECK(e.exit_code() == 3);
    }
}

TEST_CASE("a hanging plug is killed at the timeout together with its children") {
    const auto start = std::chrono::steady_clock::now();
    CHECK(reason_of([] {
              run_plug(plug("sleep 30 & sleep 30 # {in} {out}", 0.5), {{"in", "/dev/null"}, {"out", "/dev/null"}});
          }) == PlugError::Reason::timeout);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(elapsed < 5.0);
}

TEST_CASE("identity synthesizer plug returns the colorized layout") {
    std::mt19937_64 rng(2);
    const ClassPalette pal = oracle::test_palette(6);
    const SemanticImage m = random_labels(rng, 20, 11, 6);
    CHECK(external_synthesize(m, pal, plug("cp {in_color} {out} # {in}")) == colorize_semantic(m, pal));
}

TEST_CASE("stub synthesizer as a subprocess equals the in-process stub") {
    std::mt19937_64 rng(3);
    const ClassPalette pal = oracle::test_palette(6);
    const SemanticImage m = random_labels(rng, 24, 16, 6);
    TempDir dir;
    fixture::write_text(dir.file("palette.json"), R"([)" + [&] {
        std::string s;
        for (const auto& e : pal.entries) {
            if (!s.empty()) s += ",";
            s += "{\"id\":" + std::to_string(e.id) + ",\"color\":[" + std::to_string(e.color[0]) + "," +
                 std::to_string(e.color[1]) + "," + std::to_string(e.color[2]) + "],\"name\":\"" + e.name + "\"}";
        }
        return s;
    }() + "]");
    const std::string cmd = fixture::cli + " synthesize --labels {in} --palette " + shell_quote(dir.file("palette.json")) +
                            " --seed 41 --noise-amp 0.05 --output {out}";
    CHECK(external_synthesize(m, pal, plug(cmd)) == quantized(stub_synthesize(m, pal, 41, 0.05)));
}

TEST_CASE("synthesizer plug failures map to distinct errors") {
    const ClassPalette pal = oracle::test_palette(3);
    const SemanticImage m(6, 4, 1, 1);
    TempDir dir;
    write_rgb_png(dir.file("small.png"), Image(3, 3, 3, 0.5));

    CHECK(reason_of([&] { external_synthesize(m, pal, plug("exit 1 # {in} {out}")); }) == PlugError::Reason::exit_status);
    CHECK(reason_of([&] { external_synthesize(m, pal, plug("cp " + shell_quote(dir.file("small.png")) + " {out} # {in}")); }) ==
          PlugError::Reason::dimension_mismatch);
    CHECK(reason_of([&] { external_synthesize(m, pal, plug("echo junk > {out} # {in}")); }) ==
          PlugError::Reason::unreadable_output);
    CHECK(reason_of([&] { external_synthesize(m, pal, plug("true {in} {out}")); }) == PlugError::Reason::unreadable_output);
}

TEST_CASE("plug temporary files are removed on success and on failure") {
    const ClassPalette pal = oracle::test_palette(3);
    const SemanticImage m(6, 4, 1, 2);
    TempDir dir;
    const std::string log = shell_quote(dir.file("seen.txt"));
    CHECK_THROWS_AS(external_synthesize(m, pal, plug("echo {in} > " + log + "; exit 1 # {out}")), PlugError);
    const fs::path failed = fs::path(fixture::read_text(dir.file("seen.txt"))).parent_path();
    CHECK_FALSE(failed.empty());
    CHECK_FALSE(fs::exists(failed));

    CHECK_NOTHROW(external_synthesize(m, pal, plug("echo {in} > " + log + "; cp {in_color} {out} # {in}")));
    const fs::path ok = fs::path(fixture::read_text(dir.file("seen.txt"))).parent_path();
    CHECK_FALSE(fs::exists(ok));
}

TEST_CASE("segmenter plug built on the nearest-color declassifier recovers the ids") {
    std::mt19937_64 rng(4);
    const SceneDescription demo = load_scene(fixture::demo_scene);
    const SemanticImage m = random_labels(rng, 17, 9, 7);
    const std::string cmd = fixture::cli + " declassify --in {in} --palette " + shell_quote(fixture::demo_dir / "palette.json") +
                            " --output {out}";
    CHECK(external_segment(colorize_semantic(m, demo.palette), plug(cmd)) == m);
    CHECK(reason_of([&] { external_segment(Image(4, 4, 3), plug("exit 2 # {in} {out}")); }) ==
          PlugError::Reason::exit_status);
}

TEST_CASE("feature plug driven by the CLI matches in-process stub features") {
    std::mt19937_64 rng(5);
    std::vector<Image> imgs;
    for (int i = 0; i < 3; ++i) imgs.push_back(oracle::random_image(rng, 20, 12, 3));
    const FeatureMatrix got = external_features(imgs, plug(fixture::cli + " metrics features --images {in} --output {out}"));
    std::vector<Image> q;
    for (const auto& img : imgs) q.push_back(quantized(img));
    CHECK(got == stub_feature_matrix(q));
    // A plug that returns the wrong number of rows is rejected.
    TempDir dir;
    FeatureMatrix one(1, 4);
    write_feature_file(dir.file("one.feat"), one);
    CHECK_THROWS_AS(external_features(imgs, plug("cp " + shell_quote(dir.file("one.feat")) + " {out} # {in}")), PlugError);
}

TEST_CASE("identity blend plug leaves the composite unchanged") {
    std::mt19937_64 rng(6);
    const Image comp = quantized(oracle::random_image(rng, 10, 8, 3));
    const Image mask(10, 8, 1, 1.0);
    CHECK(external_gan_blend(comp, mask, plug("cp {in} {out} # {mask}")) == comp);
    CHECK(reason_of([&] { external_gan_blend(comp, mask, plug("exit 4 # {in} {out}")); }) ==
          PlugError::Reason::exit_status);
}
