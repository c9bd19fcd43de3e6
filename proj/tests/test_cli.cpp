#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "ehs/cli.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using namespace ehs;
using testing_util::read_file;
using testing_util::TempDir;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> read_kv(const fs::path& p) {
    std::map<std::string, std::string> kv;
    std::istringstream in(read_file(p));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::string write_step_input(const TempDir& dir, const std::string& name = "in.pgm") {
    save_image(synth::step_with_texture(32, 32, 21).image, dir / name);
    return dir.str(name);
}

}  // namespace

TEST(Cli, AbstractWritesImageAndManifest) {
    TempDir dir;
    const std::string in = write_step_input(dir), out = dir.str("out.pgm");
    const CliRun r = invoke({"abstract", in, out, "--lambda", "15", "--sigma", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto img = std::get<Image>(load_image(out));
    EXPECT_EQ(img.rows(), 32u);
    const auto kv = read_kv(out + ".manifest");
    for (const char* key : {"tool", "version", "command", "input_fnv1a", "lambda", "sigma", "iters", "p", "max_iter", "tol",
                            "solve.c0.k1.iterations", "solve.c0.k3.objective"})
        EXPECT_TRUE(kv.count(key)) << key;
    EXPECT_EQ(kv.at("command"), "abstract");
    EXPECT_EQ(kv.at("iters"), "3");
    EXPECT_EQ(kv.at("p"), "2");
    EXPECT_EQ(kv.at("lambda"), "15");
    EXPECT_EQ(kv.at("input_bytes"), std::to_string(fs::file_size(in)));
}

TEST(Cli, ExaggerateColorPng) {
    TempDir dir;
    const Image g = synth::step_with_texture(24, 24, 22).image;
    Image b = g;
    for (double& v : b.data()) v = 255.0 - v;
    save_image(ColorImage(g, g, b), dir / "in.png");
    const std::string out = dir.str("out.png");
    const CliRun r = invoke({"exaggerate", dir.str("in.png"), out, "--lambda", "25", "--sigma", "0.4", "--s", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::holds_alternative<ColorImage>(load_image(out)));
    const auto kv = read_kv(out + ".manifest");
    EXPECT_EQ(kv.at("s"), "2");
    EXPECT_EQ(kv.at("channels"), "3");
    EXPECT_TRUE(kv.count("solve.c2.k3.iterations"));
}

TEST(Cli, DescanDefaultsToL1AndRecordsBackground) {
    TempDir dir;
    save_image(synth::scanned_page(64, 64).image, dir / "page.pgm");
    const std::string out = dir.str("clean.pgm");
    const CliRun r = invoke({"descan", dir.str("page.pgm"), out, "--lambda", "70", "--trace", dir.str("trace.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto kv = read_kv(out + ".manifest");
    EXPECT_EQ(kv.at("p"), "1");
    EXPECT_EQ(kv.at("background.alpha"), "250");
    EXPECT_TRUE(kv.count("pinned_pixels"));
    const std::string trace = read_file(dir / "trace.csv");
    EXPECT_EQ(trace.substr(0, trace.find('\n')), "channel,outer,iteration,objective,residual_y,residual_z,dual_residual");
}

TEST(Cli, DescanAlphaOverride) {
    TempDir dir;
    save_image(synth::scanned_page(64, 64).image, dir / "page.pgm");
    const std::string out = dir.str("clean.pgm");
    ASSERT_EQ(invoke({"descan", dir.str("page.pgm"), out, "--alpha", "255"}).code, 0);
    const auto kv = read_kv(out + ".manifest");
    EXPECT_EQ(kv.at("alpha_override"), "255");
    EXPECT_EQ(kv.at("pinned_pixels"), "0");
}

TEST(Cli, EdgesProducesBinaryMap) {
    TempDir dir;
    const std::string in = write_step_input(dir), out = dir.str("edges.pgm");
    ASSERT_EQ(invoke({"edges", in, out}).code, 0);
    const auto e = std::get<Image>(load_image(out));
    for (double v : e.data()) EXPECT_TRUE(v == 0.0 || v == 255.0);
}

TEST(Cli, HistogramWritesBothCsvFiles) {
    TempDir dir;
    const std::string in = write_step_input(dir), stem = dir.str("hist");
    ASSERT_EQ(invoke({"histogram", in, stem, "--lambda", "15"}).code, 0);
    const std::string before = read_file(stem + ".input.csv"), after = read_file(stem + ".target.csv");
    EXPECT_EQ(before.substr(0, before.find('\n')), "bin_low,bin_high,count");
    EXPECT_EQ(std::count(after.begin(), after.end(), '\n'), 512);
    const auto kv = read_kv(stem + ".manifest");
    EXPECT_LT(std::stoul(kv.at("nnz.target")), std::stoul(kv.at("nnz.input")));
}

TEST(Cli, DetectBackgroundReportAndOverlay) {
    TempDir dir;
    save_image(synth::flat_patch(3).image, dir / "in.pgm");
    const std::string report = dir.str("bg.txt");
    ASSERT_EQ(invoke({"detect-bg", dir.str("in.pgm"), report, "--overlay", dir.str("overlay.png")}).code, 0);
    const auto kv = read_kv(report);
    EXPECT_EQ(kv.at("background.alpha"), "240");
    const auto overlay = std::get<ColorImage>(load_image(dir / "overlay.png"));
    const std::size_t r0 = std::stoul(kv.at("background.origin_row")), c0 = std::stoul(kv.at("background.origin_col"));
    EXPECT_EQ(overlay.channel(0)(r0, c0), 255.0);
    EXPECT_EQ(overlay.channel(1)(r0, c0), 0.0);
}

TEST(Cli, MissingInputIsIoErrorWithNoOutput) {
    TempDir dir;
    const std::string out = dir.str("out.pgm");
    const CliRun r = invoke({"abstract", dir.str("missing.pgm"), out});
    EXPECT_EQ(r.code, 3);
    EXPECT_FALSE(r.err.empty());
    EXPECT_FALSE(fs::exists(out));
    EXPECT_FALSE(fs::exists(out + ".manifest"));
}

TEST(Cli, UnsupportedOutputFormatIsIoError) {
    TempDir dir;
    const std::string in = write_step_input(dir);
    EXPECT_EQ(invoke({"abstract", in, dir.str("out.jpg")}).code, 3);
}

TEST(Cli, BadFlagsExitTwo) {
    TempDir dir;
    const std::string in = write_step_input(dir), out = dir.str("o.pgm");
    EXPECT_EQ(invoke({"abstract", in, out, "--lambda", "-1"}).code, 2);
    EXPECT_EQ(invoke({"abstract", in, out, "--p", "3"}).code, 2);
    EXPECT_EQ(invoke({"abstract", in, out, "--bogus"}).code, 2);
    EXPECT_EQ(invoke({"descan", in, out, "--alpha", "300"}).code, 2);
    EXPECT_EQ(invoke({"abstract", in}).code, 2);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, HelpAndVersionExitZero) {
    EXPECT_EQ(invoke({"--help"}).code, 0);
    const CliRun v = invoke({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find(cli::kVersion), std::string::npos);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    TempDir dir;
    const std::string in = write_step_input(dir);
    for (const char* cmd : {"abstract", "descan"}) {
        const std::string a = dir.str(std::string(cmd) + "_a.pgm"), b = dir.str(std::string(cmd) + "_b.pgm");
        ASSERT_EQ(invoke({cmd, in, a, "--lambda", "20"}).code, 0);
        ASSERT_EQ(invoke({cmd, in, b, "--lambda", "20"}).code, 0);
        EXPECT_EQ(read_file(a), read_file(b)) << cmd;
        // The manifests differ only in the output path line.
        auto ma = read_kv(a + ".manifest"), mb = read_kv(b + ".manifest");
        ma.erase("output");
        mb.erase("output");
        EXPECT_EQ(ma, mb) << cmd;
    }
}
