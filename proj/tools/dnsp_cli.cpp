// Command-line front end: data preparation, training, inference,
// evaluation, gradient checks and the rank/sharpness studies.
//
// Exit codes: 0 success, 1 check failure, 2 usage/config/input error,
// 3 checkpoint format or version error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnsp/dnsp.hpp"

namespace fs = std::filesystem;
using namespace dnsp;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;
constexpr int exit_format = 3;

/// Thrown to leave a command with a specific exit code.
struct Exit {
    int code;
    std::string message;
};

std::vector<fs::path> list_pgm(const std::string& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Exit{exit_usage, "not a directory: " + dir};
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

Image read_input(const fs::path& p) {
    try {
        return read_pgm(p.string());
    } catch (const Error& e) {
        throw Exit{exit_usage, std::string("unreadable input: ") + e.what()};
    }
}

Checkpoint read_checkpoint(const std::string& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw Exit{exit_usage, "checkpoint not found: " + path};
    try {
        return load_checkpoint(path);
    } catch (const Error& e) {
        throw Exit{exit_format, e.what()};
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Exit{exit_usage, "cannot create directory " + dir};
}

Image crop_for_scale(const Image& img, std::size_t s, const std::string& name) {
    Image out = crop_to_multiple(img, s);
    if (!out.same_shape(img))
        std::cerr << name << ": cropped " << img.height() << "x" << img.width() << " to " << out.height() << "x"
                  << out.width() << " (divisible by " << s << ")\n";
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    for (char c : s + ",") {
        if (c == ',') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else if (c != ' ') {
            item += c;
        }
    }
    return out;
}

// --------------------------------------------------------------------------

struct SimulateArgs {
    std::string input, output;
    std::size_t scale = 2;
    double blur = 1.0;
};

int cmd_simulate_lr(const SimulateArgs& a) {
    const auto files = list_pgm(a.input);
    if (files.empty()) throw Exit{exit_usage, "no .pgm images in " + a.input};
    ensure_dir(a.output);
    for (const auto& f : files) {
        const Image hr = crop_for_scale(read_input(f), a.scale, f.filename().string());
        const Image x_s = simulate_lr(hr, a.scale, a.blur);
        const std::string stem = f.stem().string();
        write_pgm((fs::path(a.output) / (stem + ".pgm")).string(), x_s);
        write_pgm((fs::path(a.output) / (stem + "_hr.pgm")).string(), hr);
    }
    std::cout << "wrote " << files.size() << " simulated LR images to " << a.output << "\n";
    return exit_ok;
}

struct SelectArgs {
    std::string input, output, exclude;
    std::size_t patch = 40;
};

int cmd_select_patches(const SelectArgs& a) {
    const auto files = list_pgm(a.input);
    if (files.empty()) throw Exit{exit_usage, "no .pgm images in " + a.input};
    std::vector<Image> images;
    for (const auto& f : files) images.push_back(read_input(f));
    std::vector<std::size_t> excl;
    for (const auto& s : split_list(a.exclude)) excl.push_back(parse_unsigned("--exclude", s));

    SharpSmoothSelection sel;
    try {
        sel = select_sharp_smooth(images, a.patch, excl);
    } catch (const ArgumentError& e) {
        throw Exit{exit_usage, e.what()};
    }
    ensure_dir(a.output);
    std::string index = "image,source,kind,row,col,score\n";
    auto emit = [&](const PatchRecord& r, const Image& patch, const char* kind) {
        const std::string name = std::string(kind) + "_" + std::to_string(r.image) + ".pgm";
        write_pgm((fs::path(a.output) / name).string(), patch);
        index += std::to_string(r.image) + "," + files[r.image].filename().string() + "," + kind + "," +
                 std::to_string(r.row) + "," + std::to_string(r.col) + "," + csv_real(r.score) + "\n";
    };
    for (std::size_t i = 0; i < sel.sharp.size(); ++i) {
        emit(sel.sharp_records[i], sel.sharp[i], "sharp");
        emit(sel.smooth_records[i], sel.smooth[i], "smooth");
    }
    write_text((fs::path(a.output) / "index.csv").string(), index);
    std::cout << "selected " << sel.sharp.size() << " sharp/smooth pairs\n";
    return exit_ok;
}

struct TrainArgs {
    std::string config, data, out, history;
};

int cmd_train(const TrainArgs& a) {
    RunConfig rc;
    try {
        rc = load_run_config(a.config);
    } catch (const Error& e) {
        throw Exit{exit_usage, std::string("config: ") + e.what()};
    }
    const std::string data_dir = a.data.empty() ? rc.data_dir : a.data;
    if (data_dir.empty()) throw Exit{exit_usage, "no data directory (use --data or 'data =' in the config)"};
    const auto files = list_pgm(data_dir);
    if (files.empty()) throw Exit{exit_usage, "no .pgm images in " + data_dir};
    std::vector<Image> hr;
    for (const auto& f : files) hr.push_back(read_input(f));

    const TrainConfig& cfg = rc.train;
    TrainResult result;
    try {
        validate(cfg);
        DatasetOptions opt = cfg.dataset_options();
        PatchDataset data;
        try {
            data = build_dataset(hr, opt);
        } catch (const ArgumentError& e) {
            // Every image excluded: only an error when the measure is used.
            if (cfg.loss.gamma > 0.0) throw ConfigError(e.what());
            opt.select_patches = false;
            data = build_dataset(hr, opt);
        }
        std::cerr << "training on " << data.pairs.size() << " patch pairs, " << data.sharp.size()
                  << " sharp/smooth pairs\n";
        TrainState state = init_train_state(cfg);
        check_dataset(cfg, data);
        for (std::size_t e = 0; e < cfg.epochs; ++e) {
            result.history.push_back(train_epoch(state, cfg, data));
            const auto& r = result.history.back();
            std::cout << "epoch " << r.epoch << " total " << csv_real(r.total) << " mse " << csv_real(r.parts.mse)
                      << "\n";
        }
        result.state = std::move(state);
    } catch (const ConfigError& e) {
        throw Exit{exit_usage, std::string("config: ") + e.what()};
    } catch (const ArgumentError& e) {
        throw Exit{exit_usage, e.what()};
    } catch (const DimensionError& e) {
        throw Exit{exit_usage, e.what()};
    }
    save_checkpoint(a.out, Checkpoint{cfg, result.state});
    const std::string history = a.history.empty() ? a.out + ".history.csv" : a.history;
    write_text(history, history_csv(result.history));
    std::cout << "wrote " << a.out << " and " << history << "\n";
    return exit_ok;
}

struct InferArgs {
    std::string checkpoint, input, output;
    std::size_t scale = 2;
};

int cmd_infer(const InferArgs& a) {
    const Checkpoint ck = read_checkpoint(a.checkpoint);
    const Image lr = read_input(a.input);
    write_pgm(a.output, infer(ck.state.theta, lr, a.scale));
    return exit_ok;
}

struct EvalArgs {
    std::string checkpoint, hr, csv;
    std::size_t scale = 2;
};

int cmd_eval(const EvalArgs& a) {
    const Checkpoint ck = read_checkpoint(a.checkpoint);
    const auto files = list_pgm(a.hr);
    if (files.empty()) throw Exit{exit_usage, "no .pgm images in " + a.hr};
    std::string out = "image,psnr,ssim,bicubic_psnr,bicubic_ssim\n";
    MetricReport model_sum, bic_sum;
    for (const auto& f : files) {
        const Image hr = crop_for_scale(read_input(f), a.scale, f.filename().string());
        const Image lr = downsample(gaussian_blur(hr, ck.config.blur_sigma), a.scale);
        const MetricReport m = evaluate(infer(ck.state.theta, lr, a.scale), hr);
        const MetricReport b = evaluate(clamp01(bicubic_resize(lr, static_cast<double>(a.scale))), hr);
        out += f.filename().string() + "," + csv_real(m.psnr_db) + "," + csv_real(m.ssim) + "," +
               csv_real(b.psnr_db) + "," + csv_real(b.ssim) + "\n";
        model_sum.psnr_db += m.psnr_db;
        model_sum.ssim += m.ssim;
        bic_sum.psnr_db += b.psnr_db;
        bic_sum.ssim += b.ssim;
    }
    const double n = static_cast<double>(files.size());
    out += "mean," + csv_real(model_sum.psnr_db / n) + "," + csv_real(model_sum.ssim / n) + "," +
           csv_real(bic_sum.psnr_db / n) + "," + csv_real(bic_sum.ssim / n) + "\n";
    write_text(a.csv, out);
    std::cout << "mean PSNR " << csv_real(model_sum.psnr_db / n) << " dB (bicubic " << csv_real(bic_sum.psnr_db / n)
              << " dB)\n";
    return exit_ok;
}

struct GradcheckArgs {
    std::uint64_t seed = 1;
    std::size_t size = 0;
    std::string which = "all";
};

int cmd_gradcheck(const GradcheckArgs& a) {
    gradcheck::Which which{};
    try {
        which = gradcheck::which_from_string(a.which);
    } catch (const ArgumentError& e) {
        throw Exit{exit_usage, e.what()};
    }
    bool ok = true;
    std::string failed;
    for (const auto& r : gradcheck::run(which, a.seed, a.size)) {
        std::printf("%-28s max_rel_error %.3e  tolerance %.0e  draws %zu  skipped %zu  %s\n", r.name.c_str(),
                    r.max_rel_error, r.tolerance, r.draws, r.skipped, r.passed() ? "ok" : "FAIL");
        if (!r.passed()) {
            ok = false;
            failed += (failed.empty() ? "" : ", ") + r.name;
        }
    }
    if (!ok) throw Exit{exit_check_failed, "gradient check failed: " + failed};
    return exit_ok;
}

struct StudyArgs {
    std::string kind, input, params, csv;
};

int cmd_study(const StudyArgs& a) {
    const Image img = read_input(a.input);
    const auto items = split_list(a.params);
    if (items.empty()) throw Exit{exit_usage, "--params is empty"};
    std::vector<StudyRow> rows;
    try {
        if (a.kind == "rank") {
            std::vector<std::size_t> ranks;
            for (const auto& s : items) ranks.push_back(parse_unsigned("--params", s));
            rows = rank_study(img, ranks);
        } else if (a.kind == "sharpness") {
            std::vector<double> zetas;
            for (const auto& s : items) zetas.push_back(parse_real("--params", s));
            rows = sharpness_study(img, zetas);
        } else {
            throw Exit{exit_usage, "--kind must be rank or sharpness"};
        }
    } catch (const ConfigError& e) {
        throw Exit{exit_usage, e.what()};
    } catch (const ArgumentError& e) {
        throw Exit{exit_usage, e.what()};
    }
    write_text(a.csv, study_csv(rows));
    return exit_ok;
}

struct SynthArgs {
    std::string output;
    std::size_t count = 20;
    std::size_t size = 80;
    std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a) {
    ensure_dir(a.output);
    for (std::size_t i = 0; i < a.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "synth_%03zu.pgm", i);
        write_pgm((fs::path(a.output) / name).string(), make_textured_image(a.size, a.size, a.seed + i));
    }
    std::cout << "wrote " << a.count << " images to " << a.output << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prior-regularized single-image super-resolution"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate-lr", "Blur, decimate and bicubic-enlarge every image in a directory");
    c_sim->add_option("--input", sim.input, "Directory of HR .pgm images")->required();
    c_sim->add_option("--scale", sim.scale, "Scale factor")->check(CLI::PositiveNumber);
    c_sim->add_option("--blur", sim.blur, "Gaussian blur sigma")->check(CLI::PositiveNumber);
    c_sim->add_option("--output", sim.output, "Output directory")->required();

    SelectArgs sel;
    auto* c_sel = app.add_subcommand("select-patches", "Pick the sharpest and smoothest patch of every image");
    c_sel->add_option("--input", sel.input, "Directory of .pgm images")->required();
    c_sel->add_option("--patch", sel.patch, "Patch size")->check(CLI::PositiveNumber);
    c_sel->add_option("--exclude", sel.exclude, "Comma-separated image indices to drop");
    c_sel->add_option("--output", sel.output, "Output directory")->required();

    TrainArgs tr;
    auto* c_tr = app.add_subcommand("train", "Train the network and sharpness filters");
    c_tr->add_option("--config", tr.config, "Run configuration (key = value)")->required();
    c_tr->add_option("--data", tr.data, "Directory of HR training .pgm images");
    c_tr->add_option("--out", tr.out, "Checkpoint path")->required();
    c_tr->add_option("--history", tr.history, "History CSV path (default: <out>.history.csv)");

    InferArgs inf;
    auto* c_inf = app.add_subcommand("infer", "Super-resolve one LR image");
    c_inf->add_option("--checkpoint", inf.checkpoint)->required();
    c_inf->add_option("--input", inf.input, "LR .pgm image")->required();
    c_inf->add_option("--scale", inf.scale)->check(CLI::PositiveNumber);
    c_inf->add_option("--output", inf.output, "Output .pgm image")->required();

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "PSNR/SSIM of model and bicubic baseline on HR images");
    c_ev->add_option("--checkpoint", ev.checkpoint)->required();
    c_ev->add_option("--hr", ev.hr, "Directory of HR .pgm images")->required();
    c_ev->add_option("--scale", ev.scale)->check(CLI::PositiveNumber);
    c_ev->add_option("--csv", ev.csv, "Per-image metrics CSV")->required();

    GradcheckArgs gc;
    auto* c_gc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    c_gc->add_option("--seed", gc.seed);
    c_gc->add_option("--size", gc.size, "Image size for the checks (0: per-check default)");
    c_gc->add_option("--which", gc.which, "rank|sharpness|vmod|smeasure|network|all");

    StudyArgs st;
    auto* c_st = app.add_subcommand("study", "Rank-truncation or blur-vs-sharpness sweep");
    c_st->add_option("--kind", st.kind, "rank|sharpness")->required();
    c_st->add_option("--input", st.input, ".pgm image")->required();
    c_st->add_option("--params", st.params, "Comma-separated ranks or blur sigmas")->required();
    c_st->add_option("--csv", st.csv, "Output CSV")->required();

    SynthArgs sy;
    auto* c_sy = app.add_subcommand("synth", "Write procedurally generated textured test images");
    c_sy->add_option("--output", sy.output)->required();
    c_sy->add_option("--count", sy.count);
    c_sy->add_option("--size", sy.size)->check(CLI::PositiveNumber);
    c_sy->add_option("--seed", sy.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*c_sim) return cmd_simulate_lr(sim);
        if (*c_sel) return cmd_select_patches(sel);
        if (*c_tr) return cmd_train(tr);
        if (*c_inf) return cmd_infer(inf);
        if (*c_ev) return cmd_eval(ev);
        if (*c_gc) return cmd_gradcheck(gc);
        if (*c_st) return cmd_study(st);
        if (*c_sy) return cmd_synth(sy);
    } catch (const Exit& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_format;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
