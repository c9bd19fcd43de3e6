#pragma once

// Batch command-line front end.
//
//   ehs <abstract|edges|exaggerate|descan|histogram|detect-bg> [flags] INPUT OUTPUT
//
// Every run writes OUTPUT.manifest, a key=value record of the effective
// parameters, input fingerprint, and per-solve iteration counts and final
// objectives. Exit codes: 0 ok, 2 bad flags, 3 I/O failure, 4 non-finite
// solver state, 1 anything else.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "ehs/background.hpp"
#include "ehs/edge_hist.hpp"
#include "ehs/image.hpp"
#include "ehs/image_io.hpp"
#include "ehs/pipeline.hpp"
#include "ehs/solvers.hpp"

namespace ehs::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { ok = 0, failure = 1, bad_flags = 2, io_failure = 3, non_finite = 4 };

struct Options {
    std::string command;
    std::string input;
    std::string output;
    double lambda = 15.0;
    double sigma = 0.0;
    std::size_t iters = 3;
    std::optional<int> p;
    std::size_t max_iter = 500;
    double tol = 1e-4;
    double rho = 1.0;
    double lipschitz = 16.0;
    double s = 2.0;
    double sigma_hat = 3.0;
    std::optional<double> alpha;
    double edge_threshold = 20.0;
    bool no_warm_start = false;
    std::string trace;
    std::string overlay;
};

inline PipelineConfig to_pipeline_config(const Options& o) {
    PipelineConfig cfg;
    cfg.lambda = o.lambda;
    cfg.sigma = o.sigma;
    cfg.outer_iters = o.iters;
    cfg.solver.p = o.p.value_or(o.command == "descan" ? 1 : 2);
    cfg.solver.max_iter = o.max_iter;
    cfg.solver.tol = o.tol;
    cfg.solver.rho = o.rho;
    cfg.solver.lipschitz = o.lipschitz;
    cfg.s = o.s;
    cfg.background.sigma_hat = o.sigma_hat;
    cfg.alpha = o.alpha;
    cfg.warm_start = !o.no_warm_start;
    cfg.validate();
    return cfg;
}

namespace detail {

class IoFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// FNV-1a over the input bytes, so a manifest pins the exact input file.
inline std::string fingerprint(const std::filesystem::path& path, std::uintmax_t& size) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 14695981039346656037ull;
    size = 0;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
        ++size;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

class Manifest {
public:
    template <class T>
    void add(const std::string& key, const T& value) {
        std::ostringstream os;
        if constexpr (std::is_floating_point_v<T>)
            os << fmt(value);
        else if constexpr (std::is_same_v<T, bool>)
            os << (value ? "true" : "false");
        else
            os << value;
        lines_.push_back(key + "=" + os.str());
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoFailure("cannot write manifest " + path.string());
        for (const auto& l : lines_) out << l << '\n';
        if (!out) throw IoFailure("cannot write manifest " + path.string());
    }

private:
    std::vector<std::string> lines_;
};

inline void record_config(Manifest& m, const Options& o, const PipelineConfig& cfg) {
    m.add("lambda", cfg.lambda);
    m.add("sigma", cfg.sigma);
    m.add("iters", cfg.outer_iters);
    m.add("p", cfg.solver.p);
    m.add("max_iter", cfg.solver.max_iter);
    m.add("tol", cfg.solver.tol);
    m.add("rho", cfg.solver.rho);
    m.add("lipschitz", cfg.solver.lipschitz);
    m.add("warm_start", cfg.warm_start);
    if (o.command == "exaggerate") m.add("s", cfg.s);
    if (o.command == "edges") m.add("edge_threshold", o.edge_threshold);
    if (o.command == "descan" || o.command == "detect-bg") {
        m.add("sigma_hat", cfg.background.sigma_hat);
        if (cfg.alpha) m.add("alpha_override", *cfg.alpha);
    }
}

inline void record_background(Manifest& m, const BackgroundResult& bg) {
    m.add("background.alpha", bg.alpha);
    m.add("background.origin_row", bg.origin_row);
    m.add("background.origin_col", bg.origin_col);
    m.add("background.window_size", bg.window_size);
    m.add("background.scale_used", bg.scale_used);
    m.add("background.window_std", bg.window_std);
}

inline void record_log(Manifest& m, const RunLog& log) {
    for (const auto& s : log.solves) {
        const std::string key = "solve.c" + std::to_string(s.channel) + ".k" + std::to_string(s.outer);
        m.add(key + ".iterations", s.result.iterations_run);
        m.add(key + ".converged", s.result.converged);
        m.add(key + ".objective", s.result.final_objective());
    }
    if (log.background) {
        record_background(m, *log.background);
        m.add("pinned_pixels", log.pinned_pixels);
    }
}

inline void write_traces(const std::string& path, const RunLog& log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write trace " + path);
    out << "channel,outer,iteration,objective,residual_y,residual_z,dual_residual\n";
    for (const auto& s : log.solves) {
        const auto& r = s.result;
        for (std::size_t k = 0; k < r.objective_trace.size(); ++k) {
            out << s.channel << ',' << s.outer << ',' << k + 1 << ',' << fmt(r.objective_trace[k]) << ',';
            if (k < r.residual_y_trace.size()) out << fmt(r.residual_y_trace[k]);
            out << ',';
            if (k < r.residual_z_trace.size()) out << fmt(r.residual_z_trace[k]);
            out << ',';
            if (k < r.dual_residual_trace.size()) out << fmt(r.dual_residual_trace[k]);
            out << '\n';
        }
    }
}

inline Image gray_of(const AnyImage& img) {
    if (const auto* g = std::get_if<Image>(&img)) return *g;
    return to_gray(std::get<ColorImage>(img));
}

inline ColorImage draw_window(const AnyImage& img, const BackgroundResult& bg) {
    std::array<Image, 3> ch;
    if (const auto* g = std::get_if<Image>(&img))
        ch = {*g, *g, *g};
    else
        ch = split(std::get<ColorImage>(img));
    const std::size_t r0 = bg.origin_row, c0 = bg.origin_col, w = bg.window_size;
    auto paint = [&](std::size_t r, std::size_t c) {
        ch[0](r, c) = 255.0;
        ch[1](r, c) = 0.0;
        ch[2](r, c) = 0.0;
    };
    for (std::size_t i = 0; i < w; ++i) {
        paint(r0, c0 + i);
        paint(r0 + w - 1, c0 + i);
        paint(r0 + i, c0);
        paint(r0 + i, c0 + w - 1);
    }
    return merge(std::move(ch));
}

inline std::uint64_t pooled_nnz(const std::vector<GradientField>& fields) {
    std::uint64_t n = 0;
    for (const auto& f : fields) n += nnz(f);
    return n;
}

inline void write_pooled_histogram(const std::filesystem::path& path, const std::vector<GradientField>& fields) {
    std::vector<HistogramBin> total;
    for (const auto& f : fields) {
        auto bins = gradient_histogram(f);
        if (total.empty()) {
            total = std::move(bins);
        } else {
            for (std::size_t i = 0; i < total.size(); ++i) total[i].count += bins[i].count;
        }
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write histogram " + path.string());
    write_histogram_csv(out, total);
}

inline void execute(const Options& o) {
    const PipelineConfig cfg = to_pipeline_config(o);
    const AnyImage input = load_image(o.input);
    const bool color = std::holds_alternative<ColorImage>(input);

    Manifest m;
    m.add("tool", "ehs");
    m.add("version", kVersion);
    m.add("command", o.command);
    m.add("input", o.input);
    std::uintmax_t size = 0;
    const std::string fp = fingerprint(o.input, size);
    m.add("input_bytes", size);
    m.add("input_fnv1a", fp);
    m.add("output", o.output);
    m.add("channels", color ? 3 : 1);
    std::visit([&](const auto& im) {
        m.add("rows", im.rows());
        m.add("cols", im.cols());
    }, input);
    record_config(m, o, cfg);

    RunLog log;
    std::filesystem::path manifest_path = o.output + ".manifest";

    if (o.command == "abstract") {
        if (color)
            save_image(smooth_color(std::get<ColorImage>(input), cfg, &log), o.output);
        else
            save_image(smooth(std::get<Image>(input), cfg, &log), o.output);
    } else if (o.command == "exaggerate") {
        if (color)
            save_image(exaggerate_color(std::get<ColorImage>(input), cfg, &log), o.output);
        else
            save_image(exaggerate(std::get<Image>(input), cfg, &log), o.output);
    } else if (o.command == "edges") {
        std::visit([&](const auto& im) { save_image(edge_map(im, cfg, o.edge_threshold, &log), o.output); }, input);
    } else if (o.command == "descan") {
        std::visit([&](const auto& im) { save_image(descan(im, cfg, &log).image, o.output); }, input);
    } else if (o.command == "histogram") {
        std::vector<GradientField> before, after;
        auto collect = [&](const Image& ch) {
            before.push_back(grad(gaussian_smooth(ch, cfg.sigma)));
            after.push_back(threshold_field(before.back(), cfg.lambda));
        };
        if (color)
            for (const auto& ch : std::get<ColorImage>(input).channels()) collect(ch);
        else
            collect(std::get<Image>(input));
        const std::string input_csv = o.output + ".input.csv", target_csv = o.output + ".target.csv";
        write_pooled_histogram(input_csv, before);
        write_pooled_histogram(target_csv, after);
        m.add("histogram.input_csv", input_csv);
        m.add("histogram.target_csv", target_csv);
        m.add("nnz.input", pooled_nnz(before));
        m.add("nnz.target", pooled_nnz(after));
    } else if (o.command == "detect-bg") {
        const BackgroundResult bg = detect_background(gray_of(input), cfg.background);
        Manifest result;
        record_background(result, bg);
        result.write(o.output);
        log.background = bg;
        if (!o.overlay.empty()) {
            save_image(draw_window(input, bg), o.overlay);
            m.add("overlay", o.overlay);
        }
    }

    record_log(m, log);
    if (!o.trace.empty()) {
        write_traces(o.trace, log);
        m.add("trace", o.trace);
    }
    m.write(manifest_path);
}

}  // namespace detail

inline void add_common(CLI::App& sub, Options& o) {
    sub.add_option("input", o.input, "Input image (PGM/PPM/PNG)")->required();
    sub.add_option("output", o.output, "Output path")->required();
    sub.add_option("--lambda", o.lambda, "Gradient threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub.add_option("--sigma", o.sigma, "Gaussian pre-filter std (pixels)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub.add_option("--iters", o.iters, "Outer iterations")->check(CLI::PositiveNumber)->capture_default_str();
    sub.add_option("--p", o.p, "Norm: 2 (FISTA) or 1 (ADMM)")->check(CLI::IsMember({1, 2}));
    sub.add_option("--max-iter", o.max_iter, "Solver iterations per solve")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub.add_option("--tol", o.tol, "Solver stopping tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    sub.add_option("--rho", o.rho, "ADMM penalty")->check(CLI::PositiveNumber)->capture_default_str();
    sub.add_option("--lipschitz", o.lipschitz, "FISTA Lipschitz constant")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub.add_flag("--no-warm-start", o.no_warm_start, "Start every solve from the input image");
    sub.add_option("--trace", o.trace, "Write per-iteration solver trace CSV");
}

/// Parses and executes one invocation. argv[0] is the program name.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Edge-histogram specification: edge-preserving smoothing and scan-through removal", "ehs"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"abstract", "Edge-preserving smoothing (image abstraction)"},
        {"edges", "Gradient-magnitude edge map of the smoothed image"},
        {"exaggerate", "Details exaggeration J = X + s(I - X)"},
        {"descan", "Scan-through removal with pinned background"},
        {"histogram", "Gradient histograms before/after thresholding (OUTPUT is a file stem)"},
        {"detect-bg", "Background level detection (OUTPUT is a key=value report)"},
    };
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        add_common(*sub, o);
        const std::string name = s.name;
        if (name == "exaggerate")
            sub->add_option("--s", o.s, "Exaggeration factor")->check(CLI::PositiveNumber)->capture_default_str();
        if (name == "edges")
            sub->add_option("--edge-threshold", o.edge_threshold, "Gradient magnitude threshold")
                ->check(CLI::NonNegativeNumber)
                ->capture_default_str();
        if (name == "descan" || name == "detect-bg") {
            sub->add_option("--sigma-hat", o.sigma_hat, "Window std bound")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        }
        if (name == "descan")
            sub->add_option("--alpha", o.alpha, "Fixed background level (skips detection)")
                ->check(CLI::Range(0.0, 255.0));
        if (name == "detect-bg") sub->add_option("--overlay", o.overlay, "Write the input with the window marked");
        sub->callback([&o, name] { o.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : bad_flags;
    }

    try {
        detail::execute(o);
    } catch (const std::invalid_argument& e) {
        err << "ehs: invalid parameter: " << e.what() << '\n';
        return bad_flags;
    } catch (const ImageIoError& e) {
        err << "ehs: " << e.what() << '\n';
        return e.kind() == IoErrorKind::out_of_range ? failure : io_failure;
    } catch (const detail::IoFailure& e) {
        err << "ehs: " << e.what() << '\n';
        return io_failure;
    } catch (const NonFiniteError& e) {
        err << "ehs: " << e.what() << '\n';
        return non_finite;
    } catch (const std::exception& e) {
        err << "ehs: " << e.what() << '\n';
        return failure;
    }
    return ok;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"ehs"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ehs::cli
