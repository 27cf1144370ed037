#include "lowlight/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lowlight/config_file.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/gradient_suite.hpp"
#include "lowlight/image_io.hpp"
#include "lowlight/image_ops.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/pipeline.hpp"

namespace lowlight::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kGradTolerance = 1e-3;

struct DumpFlags {
    bool reflectance = false;
    bool illumination = false;
    bool weights = false;
    bool trace = false;
};

struct RunOptions {
    std::vector<std::string> inputs;
    std::string output_dir;
    std::string config_file;
    std::vector<std::string> settings;
    std::string first_stage;
    std::string stage1_file;
    std::uint64_t seed = 0;
    bool force = false;
    bool quiet = false;
    DumpFlags dump;
};

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

PipelineConfig build_config(const RunOptions& opts) {
    PipelineConfig cfg;
    if (!opts.config_file.empty()) apply_settings(cfg, read_key_values(opts.config_file));
    for (const auto& kv : opts.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + kv + "'");
        auto parsed = parse_key_values(kv);
        apply_settings(cfg, parsed);
    }
    if (!opts.first_stage.empty()) apply_setting(cfg, "first_stage", opts.first_stage);
    if (cfg.first_stage == FirstStage::ExternalFile) {
        if (opts.stage1_file.empty()) throw InvalidInput("first stage 'file' needs --stage1-file");
        if (opts.inputs.size() != 1) throw InvalidInput("--stage1-file applies to a single input image");
        cfg.external_stage1 = read_image(opts.stage1_file);
    }
    return cfg;
}

void write_trace(const fs::path& path, const OptimRun& run) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << "step,total,recon,reflectance,illumination\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < run.term_trace.size(); ++k) {
        const auto& t = run.term_trace[k];
        out << k << ',' << t.total << ',' << t.recon << ',' << t.reflectance << ','
            << t.illumination << '\n';
    }
}

// Per-map rescale to [0, 1] for viewing; the maps already live in [0, 1].
ImageTensor visualize(const ImageTensor& a, const ImageTensor& b) {
    ImageTensor out(a.shape());
    double hi = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = std::max(a[k], b[k]);
        hi = std::max(hi, out[k]);
    }
    if (hi > 0.0) {
        for (double& v : out.data()) v /= hi;
    }
    return out;
}

ImageTensor to_rgb(const ImageTensor& img) {
    if (img.channels() == 3) return img;
    ImageTensor out(img.height(), img.width(), 3);
    for (std::size_t p = 0; p < img.size(); ++p) {
        for (std::size_t c = 0; c < 3; ++c) out[3 * p + c] = img[p];
    }
    return out;
}

int process(const RunOptions& opts, const PipelineConfig& cfg, std::ostream& out) {
    const fs::path dir(opts.output_dir);
    fs::create_directories(dir);

    for (const auto& input : opts.inputs) {
        const fs::path in_path(input);
        const std::string stem = in_path.stem().string();
        std::vector<fs::path> planned{dir / (stem + ".final.png"), dir / (stem + ".stage1.png")};
        if (opts.dump.reflectance) planned.push_back(dir / (stem + ".target.png"));
        if (opts.dump.illumination) {
            planned.push_back(dir / (stem + ".illum.png"));
            planned.push_back(dir / (stem + ".stage1.illum.png"));
        }
        if (opts.dump.weights) {
            planned.push_back(dir / (stem + ".W.png"));
            planned.push_back(dir / (stem + ".WI.png"));
            planned.push_back(dir / (stem + ".WR.png"));
        }
        if (opts.dump.trace) {
            planned.push_back(dir / (stem + ".trace.csv"));
            planned.push_back(dir / (stem + ".stage1.trace.csv"));
        }
        if (!opts.force) {
            for (const auto& p : planned) {
                if (fs::exists(p)) {
                    throw InvalidInput("'" + p.string() + "' exists; pass --force to overwrite");
                }
            }
        }

        ImageTensor s = read_image(in_path);
        s = to_rgb(s);
        const EnhancementResult res = ablate(s, cfg);

        write_png(dir / (stem + ".final.png"), res.r_final);
        write_png(dir / (stem + ".stage1.png"), res.r_stage1);
        if (opts.dump.reflectance) write_png(dir / (stem + ".target.png"), max_channel(res.r_stage1));
        if (opts.dump.illumination) {
            write_png(dir / (stem + ".illum.png"), res.i_final);
            write_png(dir / (stem + ".stage1.illum.png"), res.i_stage1);
        }
        if (opts.dump.weights) {
            const auto& w = res.weights_final;
            write_png(dir / (stem + ".W.png"), visualize(w.w.x, w.w.y));
            write_png(dir / (stem + ".WI.png"), visualize(w.wi.x, w.wi.y));
            write_png(dir / (stem + ".WR.png"), visualize(w.wr.x, w.wr.y));
        }
        if (opts.dump.trace) {
            write_trace(dir / (stem + ".trace.csv"), res.red_run);
            write_trace(dir / (stem + ".stage1.trace.csv"), res.ice_run);
        }
        if (!opts.quiet) {
            out << input << ": stage1 steps=" << res.ice_run.step_count
                << " red steps=" << res.red_run.step_count << " -> "
                << (dir / (stem + ".final.png")).string() << '\n';
        }
    }
    return kOk;
}

void add_run_options(CLI::App* cmd, RunOptions& opts) {
    cmd->add_option("-o,--output", opts.output_dir, "Output directory (created if absent)")->required();
    cmd->add_option("-c,--config", opts.config_file, "Flat key = value configuration file");
    cmd->add_option("--set", opts.settings, "Override one setting, key=value (repeatable)");
    cmd->add_option("--first-stage", opts.first_stage, "me-retinex | he | ahe | file");
    cmd->add_option("--stage1-file", opts.stage1_file, "Enhanced image used by --first-stage file");
    cmd->add_option("--seed", opts.seed, "Seed recorded with the run");
    cmd->add_flag("-f,--force", opts.force, "Overwrite existing outputs");
    cmd->add_flag("-q,--quiet", opts.quiet, "No progress lines");
    cmd->add_flag("--dump-reflectance", opts.dump.reflectance, "Write <stem>.target.png (stage-1 max channel)");
    cmd->add_flag("--dump-illumination", opts.dump.illumination, "Write <stem>.illum.png");
    cmd->add_flag("--dump-weights", opts.dump.weights, "Write <stem>.W.png, .WI.png, .WR.png");
    cmd->add_flag("--dump-trace", opts.dump.trace, "Write <stem>.trace.csv loss traces");
}

int report_gradients(const std::vector<GradCheckResult>& results, std::ostream& out) {
    double worst = 0.0;
    out << "check,max_rel_error\n";
    for (const auto& r : results) {
        out << r.name << ',' << format_value(r.max_rel_error) << '\n';
        worst = std::max(worst, r.max_rel_error);
    }
    const bool pass = worst < kGradTolerance;
    out << "max," << format_value(worst) << '\n' << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kOk : kNumericFailure;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-supervised low-light enhancement and denoising"};
    app.require_subcommand(1);

    RunOptions enhance_opts;
    auto* enhance_cmd = app.add_subcommand("enhance", "Two-stage enhancement of one or more images");
    enhance_cmd->add_option("inputs", enhance_opts.inputs, "PNG/JPEG inputs")->required();
    add_run_options(enhance_cmd, enhance_opts);

    RunOptions ablate_opts;
    std::string drop;
    auto* ablate_cmd = app.add_subcommand("ablate", "Enhancement with one objective factor removed");
    ablate_cmd->add_option("input", ablate_opts.inputs, "PNG/JPEG input")->required();
    ablate_cmd->add_option("--drop", drop, "W | WI_WR | exp_WI | exp_WR")
        ->required()
        ->check(CLI::IsMember({"W", "WI_WR", "exp_WI", "exp_WR"}));
    add_run_options(ablate_cmd, ablate_opts);

    std::string metric_a, metric_b;
    double peak = 1.0;
    bool header = false;
    auto* metrics_cmd = app.add_subcommand("metrics", "PSNR, SSIM and entropy of <test> against <reference>");
    metrics_cmd->add_option("reference", metric_a)->required();
    metrics_cmd->add_option("test", metric_b)->required();
    metrics_cmd->add_option("--peak", peak, "Peak value for PSNR (intensities are in [0, 1])");
    metrics_cmd->add_flag("--header", header, "Print a header row first");

    std::uint64_t check_seed = 0;
    int check_size = 8;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of both objectives");
    grad_cmd->add_option("--seed", check_seed);
    grad_cmd->add_option("--size", check_size, "Side length of the random test point")->check(CLI::Range(2, 64));
    auto* self_cmd = app.add_subcommand("selftest", "Finite-difference check of every primitive and objective");
    self_cmd->add_option("--seed", check_seed);

    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }

    try {
        if (*enhance_cmd) {
            return process(enhance_opts, build_config(enhance_opts), out);
        }
        if (*ablate_cmd) {
            PipelineConfig cfg = build_config(ablate_opts);
            cfg.ablations = {};
            cfg.ablations.drop_w = drop == "W";
            cfg.ablations.drop_wi_wr = drop == "WI_WR";
            cfg.ablations.drop_exp_wi_term = drop == "exp_WI";
            cfg.ablations.drop_exp_wr_term = drop == "exp_WR";
            return process(ablate_opts, cfg, out);
        }
        if (*metrics_cmd) {
            const ImageTensor a = read_image(metric_a);
            const ImageTensor b = read_image(metric_b);
            const double p = psnr(b, a, peak);
            const double q = ssim(b, a);
            const double e = shannon_entropy(b.channels() == 3 ? max_channel(b) : b);
            if (header) out << "psnr_db,ssim,entropy_bits\n";
            out << format_value(p) << ',' << format_value(q) << ',' << format_value(e) << '\n';
            return kOk;
        }
        if (*grad_cmd) {
            return report_gradients(run_gradient_suite(check_seed, check_size, check_size, false), out);
        }
        if (*self_cmd) {
            return report_gradients(run_gradient_suite(check_seed), out);
        }
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const NumericDomainError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const DivergedError& e) {
        err << "diverged: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }
    return kInvalidInput;
}

}  // namespace lowlight::cli
