// idcnn command-line tool: corrupt, train, denoise, evaluate, verify, sweep.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "idcnn/detector.hpp"
#include "idcnn/metrics.hpp"
#include "idcnn/netpbm.hpp"
#include "idcnn/noise.hpp"
#include "idcnn/oracles.hpp"
#include "idcnn/parallel.hpp"
#include "idcnn/train.hpp"

namespace fs = std::filesystem;
using namespace idcnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

// Seed streams derived from the master seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kDataStream = 1ull << 32;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    unsigned threads = default_thread_count();
    bool deterministic = false;
};

void add_common(CLI::App* app, Common& common) {
    app->option_defaults()->always_capture_default();
    // Consumed by expand_config() before parsing; kept here for --help.
    app->add_option("--config", "key=value file; explicit flags override its values");
    app->add_option("--threads", common.threads, "worker threads (default: IDCNN_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    app->add_flag("--deterministic", common.deterministic, "fixed reduction order (byte-identical reruns)");
}

void apply_common(const Common& common) {
    set_execution_policy({common.threads, common.deterministic});
}

// Resolved settings of a subcommand as key=value lines (no config path).
std::string resolved_config(const CLI::App* app) {
    std::istringstream in(app->config_to_str(true, false));
    std::string out, line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == '[') continue;
        if (line.rfind("config=", 0) == 0 || line.rfind("help=", 0) == 0) continue;
        out += line + "\n";
    }
    return out;
}

std::string commented(const std::string& text) {
    std::istringstream in(text);
    std::string out, line;
    while (std::getline(in, line)) out += "# " + line + "\n";
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string format_metric(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

NoiseModel noise_model_arg(const std::string& name) {
    try {
        return parse_noise_model(name);
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
}

// ---------------------------------------------------------------- corrupt

struct CorruptArgs {
    Common common;
    std::string in, out, map;
    std::string model = "ctri";
    double rho = 0.3;
    std::uint64_t seed = 0;
};

void setup_corrupt(CLI::App& root, CorruptArgs& a, std::function<int()>& run) {
    auto* sub = root.add_subcommand("corrupt", "add impulse noise and write the ground-truth map");
    add_common(sub, a.common);
    sub->add_option("--in", a.in, "clean PPM")->required();
    sub->add_option("--out", a.out, "noisy PPM")->required();
    sub->add_option("--map", a.map, "ground-truth PGM map")->required();
    sub->add_option("--noise-model,--noise_model", a.model, "ctri or spin");
    sub->add_option("--rho", a.rho, "corruption probability")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", a.seed, "master seed");
    sub->callback([&, sub] {
        run = [&, sub] {
            apply_common(a.common);
            const auto clean = load_ppm(a.in);
            const auto result = corrupt(clean, NoiseSpec{noise_model_arg(a.model), a.rho, a.seed});
            save_ppm(result.noisy, a.out);
            save_map_pgm(result.map, a.map);
            write_text(a.out + ".cfg", resolved_config(sub));
            const auto flagged = count_flagged(result.map);
            std::printf("flagged %zu of %zu pixels (density %.6f)\n", flagged, result.map.pixels(),
                        static_cast<double>(flagged) / static_cast<double>(result.map.pixels()));
            return kExitOk;
        };
    });
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    Common common;
    std::string data, out, loss_csv, resume, patch_cache;
    TrainConfig config;
    std::string model = "ctri";
    bool augment = false;
    std::size_t checkpoint_every = 0;
};

void write_loss_csv(const fs::path& path, const TrainConfig& config, const TrainState& state) {
    std::string text = commented(format_config(config)) + "epoch,lr,loss\n";
    for (std::size_t e = 0; e < state.loss_history.size(); ++e) {
        char row[128];
        std::snprintf(row, sizeof row, "%zu,%.9g,%.9f\n", e + 1, learning_rate(config, e + 1), state.loss_history[e]);
        text += row;
    }
    write_text(path, text);
}

void setup_train(CLI::App& root, TrainArgs& a, std::function<int()>& run) {
    auto* sub = root.add_subcommand("train", "train the impulse detector on a directory of clean PPM images");
    add_common(sub, a.common);
    auto& c = a.config;
    sub->add_option("--data", a.data, "directory of clean .ppm training images")->required();
    sub->add_option("--out", a.out, "checkpoint path")->required();
    sub->add_option("--loss-csv,--loss_csv", a.loss_csv, "per-epoch loss CSV (default: <out>.loss.csv)");
    sub->add_option("--resume", a.resume, "continue from this checkpoint");
    sub->add_option("--checkpoint-every,--checkpoint_every", a.checkpoint_every, "save every k epochs (0: only at the end)");
    sub->add_option("--patch-cache,--patch_cache", a.patch_cache, "load patches from / save patches to this file");
    auto* epochs = sub->add_option("--epochs", c.epochs, "training epochs");
    sub->add_option("--depth", c.depth, "number of conv layers");
    sub->add_option("--filters", c.filters, "feature maps per hidden layer");
    sub->add_option("--lr", c.lr, "initial learning rate");
    sub->add_option("--lr-decay,--lr_decay", c.lr_decay, "learning-rate factor after the decay epoch");
    sub->add_option("--decay-epoch,--decay_epoch", c.decay_epoch, "last epoch at the initial rate");
    sub->add_option("--batch-size,--batch_size", c.batch_size, "mini-batch size");
    sub->add_option("--patch-size,--patch_size", c.patch_size, "training patch side");
    sub->add_option("--noise-model,--noise_model", a.model, "ctri or spin");
    sub->add_option("--rho", c.noise.rho, "fixed training noise density");
    sub->add_flag("--rho-random,--rho_random", c.noise.random, "draw the density per patch from [rho-min, rho-max]");
    sub->add_option("--rho-min,--rho_min", c.noise.rho_min, "lower density bound");
    sub->add_option("--rho-max,--rho_max", c.noise.rho_max, "upper density bound");
    sub->add_flag("--augment", a.augment, "add rot90/180/270 and vertical flip variants");
    sub->add_option("--seed", c.seed, "master seed");
    sub->callback([&, sub, epochs] {
        run = [&, sub, epochs] {
            apply_common(a.common);
            TrainConfig config = a.config;
            config.noise.model = noise_model_arg(a.model);
            IdcnnModel model;
            TrainState state;
            if (!a.resume.empty()) {
                auto ck = load_checkpoint(a.resume);
                // The stored run defines the config; only the epoch budget may grow.
                const std::size_t wanted = epochs->count() ? config.epochs : ck.config.epochs;
                config = ck.config;
                config.epochs = wanted;
                model = std::move(ck.model);
                state = std::move(ck.state);
                std::printf("resuming at epoch %zu of %zu\n", state.epochs_completed, config.epochs);
            }
            try {
                config.validate();
            } catch (const ContractError& e) {
                throw UsageError(e.what());
            }
            if (a.resume.empty()) {
                Rng init(derive_seed(config.seed, kInitStream));
                model = build_model<float>(config.depth, config.filters, init);
            }

            PatchSet patches;
            if (!a.patch_cache.empty() && fs::exists(a.patch_cache)) {
                patches = load_patch_cache(a.patch_cache);
                if (patches.patch_size != config.patch_size) throw DataError("patch cache has a different patch size");
            } else {
                TrainingSetOptions options;
                options.patch_size = config.patch_size;
                options.augment = a.augment;
                options.noise = config.noise;
                options.seed = derive_seed(config.seed, kDataStream);
                patches = build_training_set(a.data, options);
                if (!a.patch_cache.empty()) save_patch_cache(patches, a.patch_cache);
            }
            if (patches.patches.empty()) throw DataError("training images are smaller than the patch size");
            std::printf("training on %zu patches of %zux%zu\n", patches.patches.size(), config.patch_size,
                        config.patch_size);

            const fs::path csv = a.loss_csv.empty() ? fs::path(a.out + ".loss.csv") : fs::path(a.loss_csv);
            write_text(a.out + ".cfg", resolved_config(sub));
            const auto started = std::chrono::steady_clock::now();
            state = train(model, patches, config, std::move(state),
                          [&](std::size_t epoch, const IdcnnModel& m, const TrainState& s) {
                              const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
                              std::printf("epoch %zu/%zu loss %.6f (%.1fs)\n", epoch, config.epochs, s.loss_history.back(), secs);
                              std::fflush(stdout);
                              if (a.checkpoint_every && epoch % a.checkpoint_every == 0 && epoch < config.epochs) {
                                  save_checkpoint(Checkpoint{m, config, s}, a.out);
                                  write_loss_csv(csv, config, s);
                              }
                          });
            save_checkpoint(Checkpoint{model, config, state}, a.out);
            write_loss_csv(csv, config, state);
            return kExitOk;
        };
    });
}

// ---------------------------------------------------------------- denoise

struct DenoiseArgs {
    Common common;
    std::string in, model, out, map_out, prob_out, oracle_map;
    double threshold = 0.5;
};

void setup_denoise(CLI::App& root, DenoiseArgs& a, std::function<int()>& run) {
    auto* sub = root.add_subcommand("denoise", "detect impulses and restore only the flagged pixels");
    add_common(sub, a.common);
    sub->add_option("--in", a.in, "noisy PPM")->required();
    sub->add_option("--model", a.model, "checkpoint");
    sub->add_option("--out", a.out, "restored PPM")->required();
    sub->add_option("--map-out,--map_out", a.map_out, "binary detection map PGM");
    sub->add_option("--prob-out,--prob_out", a.prob_out, "16-bit probability map PGM");
    sub->add_option("--oracle-map,--oracle_map", a.oracle_map, "use this map instead of the detector");
    sub->add_option("--threshold", a.threshold, "probability threshold");
    sub->callback([&, sub] {
        run = [&, sub] {
            apply_common(a.common);
            if (a.oracle_map.empty() == a.model.empty()) throw UsageError("denoise needs exactly one of --model or --oracle-map");
            if (!(a.threshold > 0.0 && a.threshold < 1.0)) throw UsageError("--threshold must lie in (0, 1)");
            if (!a.oracle_map.empty() && !a.prob_out.empty()) throw UsageError("--prob-out needs the detector");
            const auto noisy = load_ppm(a.in);
            NoiseMap map;
            ColorImage restored;
            if (!a.oracle_map.empty()) {
                map = load_map_pgm(a.oracle_map);
                if (!map.same_size(noisy)) throw DataError("oracle map dimensions do not match the image");
                restored = adaptive_mean_restore(noisy, map);
            } else {
                const auto ck = load_checkpoint(a.model);
                auto result = switching_filter(noisy, ck.model, a.threshold);
                if (!a.prob_out.empty()) save_probability_pgm(result.probability, a.prob_out);
                map = std::move(result.map);
                restored = std::move(result.restored);
            }
            save_ppm(restored, a.out);
            if (!a.map_out.empty()) save_map_pgm(map, a.map_out);
            write_text(a.out + ".cfg", resolved_config(sub));
            std::printf("flagged %zu of %zu pixels\n", count_flagged(map), map.pixels());
            return kExitOk;
        };
    });
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    Common common;
    std::string clean, restored, truth, estimate, csv;
    std::string clean_dir, restored_dir, truth_dir, estimate_dir;
};

constexpr const char* kEvalHeader = "image,wacc,fpr,fnr,psnr,mae,ssim,aim_tp,aim_fp,aim_fn,aim_tn";
constexpr std::size_t kEvalColumns = 10;

std::array<double, kEvalColumns> evaluate_one(const fs::path& clean, const fs::path& restored, const fs::path& truth,
                                              const fs::path& estimate) {
    const auto a = load_ppm(clean);
    const auto b = load_ppm(restored);
    const auto t = load_map_pgm(truth);
    const auto e = load_map_pgm(estimate);
    if (!a.same_size(b) || !a.same_size(t) || !a.same_size(e)) {
        throw DataError("evaluate: image and map dimensions disagree for '" + clean.string() + "'");
    }
    const auto c = confusion(t, e);
    const auto q = quality(a, b);
    const auto aim = aim_diagram(a, b, t, e);
    return {wacc(c), fpr(c), fnr(c), q.psnr, q.mae, q.ssim, aim.mae_tp, aim.mae_fp, aim.mae_fn, aim.mae_tn};
}

std::string eval_row(const std::string& name, const std::array<double, kEvalColumns>& v) {
    std::string row = name;
    for (const double x : v) row += "," + format_metric(x);
    return row + "\n";
}

fs::path find_with_stem(const fs::path& dir, const std::string& stem, const char* ext) {
    const fs::path p = dir / (stem + ext);
    if (!fs::exists(p)) throw DataError("missing '" + p.string() + "'");
    return p;
}

void setup_evaluate(CLI::App& root, EvaluateArgs& a, std::function<int()>& run) {
    auto* sub = root.add_subcommand("evaluate", "detection and restoration metrics as CSV");
    add_common(sub, a.common);
    sub->add_option("--clean", a.clean, "clean PPM");
    sub->add_option("--restored", a.restored, "noisy or restored PPM");
    sub->add_option("--truth", a.truth, "ground-truth map PGM");
    sub->add_option("--estimate", a.estimate, "estimated map PGM");
    sub->add_option("--clean-dir,--clean_dir", a.clean_dir, "batch mode: directory of clean <name>.ppm");
    sub->add_option("--restored-dir,--restored_dir", a.restored_dir, "batch mode: <name>.ppm");
    sub->add_option("--truth-dir,--truth_dir", a.truth_dir, "batch mode: <name>.pgm");
    sub->add_option("--estimate-dir,--estimate_dir", a.estimate_dir, "batch mode: <name>.pgm");
    sub->add_option("--csv", a.csv, "output CSV (default: standard output)");
    sub->callback([&, sub] {
        run = [&, sub] {
            apply_common(a.common);
            const bool single = !a.clean.empty() || !a.restored.empty() || !a.truth.empty() || !a.estimate.empty();
            const bool batch = !a.clean_dir.empty() || !a.restored_dir.empty() || !a.truth_dir.empty() || !a.estimate_dir.empty();
            if (single == batch) throw UsageError("evaluate takes either single-image or directory arguments");
            std::string text = commented(resolved_config(sub)) + kEvalHeader + "\n";
            if (single) {
                if (a.clean.empty() || a.restored.empty() || a.truth.empty() || a.estimate.empty()) {
                    throw UsageError("evaluate needs --clean, --restored, --truth and --estimate");
                }
                text += eval_row(fs::path(a.restored).stem().string(), evaluate_one(a.clean, a.restored, a.truth, a.estimate));
            } else {
                if (a.clean_dir.empty() || a.restored_dir.empty() || a.truth_dir.empty() || a.estimate_dir.empty()) {
                    throw UsageError("batch evaluate needs all four directories");
                }
                std::array<double, kEvalColumns> sum{};
                const auto files = list_images(a.clean_dir);
                for (const auto& clean : files) {
                    const auto stem = clean.stem().string();
                    const auto row = evaluate_one(clean, find_with_stem(a.restored_dir, stem, ".ppm"),
                                                  find_with_stem(a.truth_dir, stem, ".pgm"),
                                                  find_with_stem(a.estimate_dir, stem, ".pgm"));
                    for (std::size_t i = 0; i < kEvalColumns; ++i) sum[i] += row[i];
                    text += eval_row(stem, row);
                }
                for (auto& s : sum) s /= static_cast<double>(files.size());
                text += eval_row("mean", sum);
            }
            if (a.csv.empty()) {
                std::fputs(text.c_str(), stdout);
            } else {
                write_text(a.csv, text);
            }
            return kExitOk;
        };
    });
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    Common common;
    std::string fault = "none";
    std::uint64_t seed = 1;
};

void setup_verify(CLI::App& root, VerifyArgs& a, std::function<int()>& run) {
    auto* sub = root.add_subcommand("verify", "gradient checks and oracle self-tests");
    add_common(sub, a.common);
    sub->add_option("--inject-fault,--inject_fault", a.fault,
                    "break a backward formula: conv-weight-grad-doubled, relu-gate-inverted, batchnorm-mean-term-dropped");
    sub->add_option("--seed", a.seed, "seed for the random instances");
    sub->callback([&] {
        run = [&] {
            apply_common(a.common);
            oracle::SelfCheckOptions options;
            try {
                options.fault = nn::parse_backward_fault(a.fault);
            } catch (const ContractError& e) {
                throw UsageError(e.what());
            }
            options.seed = a.seed;
            const auto started = std::chrono::steady_clock::now();
            const auto report = oracle::run_self_check(options);
            for (const auto& c : report.checks) {
                std::printf("%s  %-72s worst %.3e  tol %.1e\n", c.passed ? "ok  " : "FAIL", c.name.c_str(), c.value,
                            c.tolerance);
            }
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            std::printf("%s in %.2fs\n", report.passed() ? "all checks passed" : "verification FAILED", secs);
            return report.passed() ? kExitOk : kExitVerify;
        };
    });
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    Common common;
    std::string axis, data, test, work;
    std::vector<std::string> values;
    std::vector<std::string> train_args;
    std::string model = "ctri";
    double rho = 0.3;
    std::uint64_t seed = 0;
};

std::string quote(const std::string& s) {
    std::string out = "'";
    for (const char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    return out + "'";
}

void shell(const std::string& command) {
    std::printf("+ %s\n", command.c_str());
    std::fflush(stdout);
    const int status = std::system(command.c_str());
    if (status != 0) throw DataError("sweep step failed: " + command);
}

// Mean row of a batch-evaluate CSV.
std::string mean_row(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line, last;
    while (std::getline(in, line)) {
        if (line.rfind("mean,", 0) == 0) last = line.substr(5);
    }
    if (last.empty()) throw DataError("no mean row in '" + csv.string() + "'");
    return last;
}

void setup_sweep(CLI::App& root, SweepArgs& a, std::function<int()>& run) {
    auto* sub = root.add_subcommand("sweep", "ablation over one training axis via train/corrupt/denoise/evaluate");
    add_common(sub, a.common);
    sub->add_option("--axis", a.axis, "patch-size, images, rho or repeat")
        ->required()
        ->check(CLI::IsMember({"patch-size", "images", "rho", "repeat"}));
    sub->add_option("--values", a.values, "axis values (repeat: seeds)")->required()->delimiter(',');
    sub->add_option("--data", a.data, "training images")->required();
    sub->add_option("--test", a.test, "clean held-out images")->required();
    sub->add_option("--work", a.work, "output directory")->required();
    sub->add_option("--noise-model,--noise_model", a.model, "test noise model");
    sub->add_option("--rho", a.rho, "test noise density")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", a.seed, "master seed for test corruption and training");
    sub->add_option("--train-arg,--train_arg", a.train_args, "extra flag passed to train (repeatable)")
        ->allow_extra_args(false);
    sub->callback([&, sub] {
        run = [&, sub] {
            apply_common(a.common);
            noise_model_arg(a.model);
            const std::string self = fs::read_symlink("/proc/self/exe").string();
            const std::string common = " --threads " + std::to_string(a.common.threads) +
                                       (a.common.deterministic ? " --deterministic" : "");
            const fs::path work = a.work;
            fs::create_directories(work);
            const auto tests = list_images(a.test);
            const auto train_images = list_images(a.data);

            // Test inputs do not depend on the axis value.
            const fs::path noisy_dir = work / "noisy", truth_dir = work / "truth";
            fs::create_directories(noisy_dir);
            fs::create_directories(truth_dir);
            for (std::size_t i = 0; i < tests.size(); ++i) {
                const auto stem = tests[i].stem().string();
                shell(quote(self) + " corrupt --in " + quote(tests[i]) + " --out " + quote(noisy_dir / (stem + ".ppm")) +
                      " --map " + quote(truth_dir / (stem + ".pgm")) + " --noise-model " + a.model +
                      " --rho " + format_metric(a.rho) + " --seed " + std::to_string(derive_seed(a.seed, 1000 + i)) + common);
            }

            std::string summary = commented(resolved_config(sub)) + "axis,value,wacc,fpr,fnr,psnr,mae,ssim,aim_tp,aim_fp,aim_fn,aim_tn\n";
            for (const auto& value : a.values) {
                const fs::path run_dir = work / (a.axis + "_" + value);
                fs::create_directories(run_dir);
                std::string data = a.data;
                std::string flags;
                std::uint64_t seed = a.seed;
                if (a.axis == "patch-size") {
                    flags = " --patch-size " + value;
                } else if (a.axis == "rho") {
                    flags = " --rho " + value;
                } else if (a.axis == "repeat") {
                    seed = std::stoull(value);
                } else {
                    const auto n = static_cast<std::size_t>(std::stoul(value));
                    if (n == 0 || n > train_images.size()) throw UsageError("images value out of range: " + value);
                    const fs::path subset = run_dir / "data";
                    fs::remove_all(subset);
                    fs::create_directories(subset);
                    for (std::size_t i = 0; i < n; ++i) fs::copy_file(train_images[i], subset / train_images[i].filename());
                    data = subset.string();
                }
                for (const auto& extra : a.train_args) flags += " " + quote(extra);
                const fs::path ck = run_dir / "model.ckpt";
                shell(quote(self) + " train --data " + quote(data) + " --out " + quote(ck) + " --seed " +
                      std::to_string(seed) + flags + common);
                const fs::path restored_dir = run_dir / "restored", estimate_dir = run_dir / "estimate";
                fs::create_directories(restored_dir);
                fs::create_directories(estimate_dir);
                for (const auto& t : tests) {
                    const auto stem = t.stem().string();
                    shell(quote(self) + " denoise --in " + quote(noisy_dir / (stem + ".ppm")) + " --model " + quote(ck) +
                          " --out " + quote(restored_dir / (stem + ".ppm")) + " --map-out " +
                          quote(estimate_dir / (stem + ".pgm")) + common);
                }
                const fs::path csv = run_dir / "evaluate.csv";
                shell(quote(self) + " evaluate --clean-dir " + quote(a.test) + " --restored-dir " + quote(restored_dir) +
                      " --truth-dir " + quote(truth_dir) + " --estimate-dir " + quote(estimate_dir) + " --csv " +
                      quote(csv) + common);
                summary += a.axis + "," + value + "," + mean_row(csv) + "\n";
            }
            write_text(work / "sweep.csv", summary);
            std::printf("wrote %s\n", (work / "sweep.csv").c_str());
            return kExitOk;
        };
    });
}

std::string option_key(std::string name) {
    std::replace(name.begin(), name.end(), '_', '-');
    return name;
}

// Turns "--config FILE" into --key=value arguments for every key the command
// line does not already set.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string file;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (file.empty()) return kept;
    std::set<std::string> given;
    for (const auto& arg : kept) {
        if (arg.rfind("--", 0) == 0) given.insert(option_key(arg.substr(2, arg.find('=') - 2)));
    }
    std::ifstream in(file);
    if (!in) throw UsageError("cannot read config file '" + file + "'");
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
        const auto trim = [](std::string v) {
            const auto b = v.find_first_not_of(" \t\r");
            const auto e = v.find_last_not_of(" \t\r");
            v = b == std::string::npos ? "" : v.substr(b, e - b + 1);
            if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
            return v;
        };
        const std::string key = option_key(trim(line.substr(0, eq)));
        if (given.count(key)) continue;
        kept.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
    }
    return kept;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Impulse-noise detection CNN with adaptive mean restoration"};
    app.require_subcommand(1);
    std::function<int()> run;
    CorruptArgs corrupt_args;
    TrainArgs train_args;
    DenoiseArgs denoise_args;
    EvaluateArgs evaluate_args;
    VerifyArgs verify_args;
    SweepArgs sweep_args;
    setup_corrupt(app, corrupt_args, run);
    setup_train(app, train_args, run);
    setup_denoise(app, denoise_args, run);
    setup_evaluate(app, evaluate_args, run);
    setup_verify(app, verify_args, run);
    setup_sweep(app, sweep_args, run);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        try {
            args = expand_config(std::move(args));
        } catch (const UsageError& e) {
            std::fprintf(stderr, "usage error: %s\n", e.what());
            return kExitUsage;
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    try {
        return run();
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
}
