// hsfuse: simulate degraded inputs from ground-truth cubes, train the fusion
// model, score fused outputs, and drive the switch-comparison runs.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 validation.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "hsf/error.hpp"
#include "hsf/manifest.hpp"
#include "hsf/metrics.hpp"
#include "hsf/network.hpp"
#include "hsf/simulate.hpp"
#include "hsf/train.hpp"

namespace fs = std::filesystem;
using namespace hsf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;

// ---------------------------------------------------------------------------
// flat key=value config file with [sections]
// ---------------------------------------------------------------------------

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::map<std::string, std::string> values;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValueError("config " + path + ":" + std::to_string(lineno) + ": bad section header");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValueError("config " + path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = section.empty() ? trim(line.substr(0, eq))
                                                : section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto [it, inserted] = values.emplace(key, value);
        if (!inserted)
            throw ValueError("config " + path + ": duplicate key '" + key + "' (values '" +
                             it->second + "' and '" + value + "')");
    }
    return values;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ValueError("config key " + key + ": expected a boolean, got '" + v + "'");
}

// Applies [model]/[train] keys onto a TrainConfig. Band counts and scale come
// from the data, not the config.
void apply_config(const std::map<std::string, std::string>& kv, TrainConfig& cfg) {
    for (const auto& [key, value] : kv) {
        try {
            if (key == "train.lr") cfg.lr = std::stod(value);
            else if (key == "train.epochs") cfg.epochs = std::stoll(value);
            else if (key == "train.batch") cfg.batch = std::stoll(value);
            else if (key == "train.seed") cfg.seed = std::stoull(value);
            else if (key == "train.checkpoint_every") cfg.checkpoint_every = std::stoll(value);
            else if (key == "train.loss") {
                if (value == "l1_mean") cfg.loss_reduction = Reduction::kMean;
                else if (value == "l1_sum") cfg.loss_reduction = Reduction::kSum;
                else throw ValueError("config key train.loss: expected l1_mean or l1_sum, got '" + value + "'");
            } else if (key == "model.d1") cfg.model.d1 = std::stoll(value);
            else if (key == "model.d2") cfg.model.d2 = std::stoll(value);
            else if (key == "model.channels") cfg.model.channels = std::stoll(value);
            else if (key == "model.kernel") cfg.model.kernel = std::stoll(value);
            else if (key == "model.mlp_depth") cfg.model.mlp_depth = std::stoi(value);
            else if (key == "model.decoder_relu") cfg.model.decoder_relu = parse_bool(key, value);
            else if (key == "model.lr_injection") cfg.model.use_lr_injection = parse_bool(key, value);
            else if (key == "model.hr_injection") cfg.model.use_hr_injection = parse_bool(key, value);
            else if (key == "model.rel_coord") cfg.model.use_rel_coord = parse_bool(key, value);
            else if (key == "model.weight_mode") cfg.model.weight_mode = weight_mode_from(value);
            else if (key == "model.cosine_logit") {
                if (value == "dot") cfg.model.cosine_logit = CosineLogitMode::kDotProduct;
                else if (value == "cosine") cfg.model.cosine_logit = CosineLogitMode::kNormalizedCosine;
                else throw ValueError("config key model.cosine_logit: expected dot or cosine, got '" + value + "'");
            } else if (key == "model.upsampler") cfg.model.upsample_mode = upsample_mode_from(value);
            else throw ValueError("config: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ValueError("config key " + key + ": cannot parse '" + value + "'");
        } catch (const std::out_of_range&) {
            throw ValueError("config key " + key + ": value out of range: '" + value + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// dataset helpers
// ---------------------------------------------------------------------------

std::vector<TrainPair> load_pairs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("dataset directory does not exist: " + dir);
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = "_gt.cube";
        if (name.size() > suffix.size() && name.ends_with(suffix))
            stems.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(stems.begin(), stems.end());
    if (stems.empty()) throw IoError("no *_gt.cube files in " + dir);
    std::vector<TrainPair> pairs;
    for (const auto& stem : stems) {
        TrainPair p;
        p.name = stem;
        p.gt = load_cube(dir + "/" + stem + "_gt.cube");
        p.lr = load_cube(dir + "/" + stem + "_lr.cube");
        p.msi = load_cube(dir + "/" + stem + "_msi.cube");
        pairs.push_back(std::move(p));
    }
    return pairs;
}

void write_pgm(const HsiCube& cube, int64_t band, const std::string& path) {
    if (band < 0 || band >= cube.bands)
        throw ValueError("band " + std::to_string(band) + " out of range for cube with " +
                         std::to_string(cube.bands) + " bands");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << "P5\n" << cube.width << " " << cube.height << "\n255\n";
    for (int64_t i = 0; i < cube.height; ++i)
        for (int64_t j = 0; j < cube.width; ++j) {
            const double v = std::clamp(cube.at(i, j, band), 0.0, 1.0);
            os.put(static_cast<char>(std::lround(v * 255.0)));
        }
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string out;
    int64_t size = 64;
    int64_t bands = 31;
    uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& args, const std::vector<std::string>& argv) {
    RunManifest manifest;
    manifest.command = "synth";
    manifest.argv = argv;
    manifest.seed = args.seed;
    manifest.started_at = iso8601_utc_now();
    HsiCube cube = make_synthetic_cube(args.size, args.size, args.bands, args.seed);
    save_cube(cube, args.out);
    manifest.outputs = {args.out};
    manifest.config = {{"size", std::to_string(args.size)}, {"bands", std::to_string(args.bands)}};
    manifest.finished_at = iso8601_utc_now();
    manifest.write(args.out + ".manifest.json");
    std::cout << "wrote " << args.out << " (" << args.size << "x" << args.size << "x" << args.bands
              << ")\n";
    return kExitOk;
}

struct SimulateArgs {
    std::string input;
    std::string out;
    int64_t scale = 4;
    int64_t patch = 64;
    int64_t stride = 0;  // 0 -> patch
    std::string srf_path;
    uint64_t seed = 0;
    double split = 0.8;
    bool block_mean = false;
};

int cmd_simulate(const SimulateArgs& args, const std::vector<std::string>& argv) {
    RunManifest manifest;
    manifest.command = "simulate";
    manifest.argv = argv;
    manifest.seed = args.seed;
    manifest.started_at = iso8601_utc_now();

    std::vector<std::string> input_files;
    if (fs::is_directory(args.input)) {
        for (const auto& entry : fs::directory_iterator(args.input))
            if (entry.path().extension() == ".cube") input_files.push_back(entry.path().string());
        std::sort(input_files.begin(), input_files.end());
        if (input_files.empty()) throw IoError("no .cube files in " + args.input);
    } else if (fs::exists(args.input)) {
        input_files.push_back(args.input);
    } else {
        throw IoError("input does not exist: " + args.input);
    }
    for (const auto& f : input_files) manifest.add_input(f);
    if (args.split < 0.0 || args.split > 1.0) throw ValueError("--split must be within [0,1]");

    const int64_t stride = args.stride > 0 ? args.stride : args.patch;
    const DownsampleMethod method =
        args.block_mean ? DownsampleMethod::kBlockMean : DownsampleMethod::kDecimate;

    std::vector<HsiCube> patches;
    SpectralResponse srf;
    bool srf_ready = false;
    if (!args.srf_path.empty()) {
        srf = load_srf(args.srf_path);
        manifest.add_input(args.srf_path);
        srf_ready = true;
    }
    for (const auto& file : input_files) {
        HsiCube gt = load_cube(file);
        if (!srf_ready) {
            srf = default_srf(gt.wavelengths.empty() ? default_wavelengths(gt.bands)
                                                     : gt.wavelengths);
            srf_ready = true;
        }
        auto cube_patches = extract_patches(gt, args.patch, stride);
        for (auto& p : cube_patches) patches.push_back(std::move(p));
    }

    // seeded split into train/ and test/
    std::vector<size_t> order(patches.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(args.seed);
    Rng split_rng = rng.fork("split");
    split_rng.shuffle(order);
    const size_t train_count =
        std::max<size_t>(1, static_cast<size_t>(args.split * static_cast<double>(order.size())));

    fs::create_directories(args.out + "/train");
    if (train_count < order.size()) fs::create_directories(args.out + "/test");

    int64_t written = 0;
    for (size_t pos = 0; pos < order.size(); ++pos) {
        const HsiCube& gt = patches[order[pos]];
        SimulatedPair pair = simulate_pair(gt, srf, args.scale, method);
        char stem[32];
        std::snprintf(stem, sizeof(stem), "%04zu", pos);
        const std::string sub = pos < train_count ? "/train/" : "/test/";
        const std::string base = args.out + sub + stem;
        save_cube(gt, base + "_gt.cube");
        save_cube(pair.lr, base + "_lr.cube");
        save_cube(pair.msi, base + "_msi.cube");
        manifest.outputs.push_back(base + "_gt.cube");
        manifest.outputs.push_back(base + "_lr.cube");
        manifest.outputs.push_back(base + "_msi.cube");
        ++written;
    }

    manifest.config = {{"scale", std::to_string(args.scale)},
                       {"patch", std::to_string(args.patch)},
                       {"stride", std::to_string(stride)},
                       {"split", std::to_string(args.split)},
                       {"downsample", args.block_mean ? "block_mean" : "decimate"},
                       {"srf", args.srf_path.empty() ? "default" : args.srf_path}};
    manifest.finished_at = iso8601_utc_now();
    manifest.write(args.out + "/manifest.json");
    std::cout << "wrote " << written << " triples under " << args.out << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string data;
    std::string out;
    std::string config_path;
    uint64_t seed = 0;
    bool seed_given = false;
    int64_t epochs = -1;  // -1: from config/default
    double lr = -1.0;
    int64_t batch = -1;
};

TrainConfig build_train_config(const TrainArgs& args, const std::vector<TrainPair>& pairs) {
    TrainConfig cfg;
    std::map<std::string, std::string> file_cfg;
    if (!args.config_path.empty()) {
        file_cfg = parse_config_file(args.config_path);
        apply_config(file_cfg, cfg);
    }
    // flags override the config file; both values are reported
    auto notice = [&](const char* flag, const std::string& key, const std::string& new_value) {
        auto it = file_cfg.find(key);
        if (it != file_cfg.end() && it->second != new_value)
            std::cerr << "note: " << flag << " " << new_value << " overrides config " << key << " = "
                      << it->second << "\n";
    };
    if (args.seed_given) {
        notice("--seed", "train.seed", std::to_string(args.seed));
        cfg.seed = args.seed;
    }
    if (args.epochs >= 0) {
        notice("--epochs", "train.epochs", std::to_string(args.epochs));
        cfg.epochs = args.epochs;
    }
    if (args.lr > 0) {
        notice("--lr", "train.lr", std::to_string(args.lr));
        cfg.lr = args.lr;
    }
    if (args.batch > 0) {
        notice("--batch", "train.batch", std::to_string(args.batch));
        cfg.batch = args.batch;
    }
    // geometry follows the data
    cfg.model.bands_hsi = pairs[0].lr.bands;
    cfg.model.bands_msi = pairs[0].msi.bands;
    if (pairs[0].msi.height % pairs[0].lr.height != 0)
        throw ValueError("guide height is not a multiple of the LR height");
    cfg.model.scale = pairs[0].msi.height / pairs[0].lr.height;
    return cfg;
}

int cmd_train(const TrainArgs& args, const std::vector<std::string>& argv) {
    RunManifest manifest;
    manifest.command = "train";
    manifest.argv = argv;
    manifest.started_at = iso8601_utc_now();

    auto pairs = load_pairs(args.data);
    TrainConfig cfg = build_train_config(args, pairs);
    manifest.seed = cfg.seed;
    if (!args.config_path.empty()) manifest.add_input(args.config_path);

    fs::create_directories(args.out);
    TrainOutcome outcome = train(pairs, cfg, args.out);

    const std::string ckpt_path = args.out + "/model.ckpt";
    outcome.model.save(ckpt_path);
    const std::string loss_path = args.out + "/loss.csv";
    {
        std::ofstream os(loss_path);
        write_loss_csv(os, outcome.history);
    }
    manifest.outputs = {ckpt_path, loss_path};
    manifest.config = {{"epochs", std::to_string(cfg.epochs)},
                       {"lr", std::to_string(cfg.lr)},
                       {"batch", std::to_string(cfg.batch)},
                       {"loss", cfg.loss_reduction == Reduction::kMean ? "l1_mean" : "l1_sum"},
                       {"model", outcome.model.config().to_json()},
                       {"data", args.data},
                       {"pairs", std::to_string(pairs.size())}};
    manifest.finished_at = iso8601_utc_now();
    manifest.write(args.out + "/manifest.json");
    std::cout << "trained " << outcome.history.size() << " steps; checkpoint at " << ckpt_path
              << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string data;
    std::string out;
    std::string ckpt;
    std::string baseline;
    std::string profile;  // "row,col"
    int64_t dump_band = -1;
    bool save_fused = false;
    bool per_band_psnr = false;
};

int cmd_eval(const EvalArgs& args, const std::vector<std::string>& argv) {
    RunManifest manifest;
    manifest.command = "eval";
    manifest.argv = argv;
    manifest.started_at = iso8601_utc_now();

    if (args.ckpt.empty() && args.baseline.empty())
        throw ValueError("eval needs either --ckpt or --baseline bicubic");
    if (!args.baseline.empty() && args.baseline != "bicubic")
        throw ValueError("unknown baseline: " + args.baseline);

    auto pairs = load_pairs(args.data);
    const PsnrMode mode = args.per_band_psnr ? PsnrMode::kPerBand : PsnrMode::kJoint;
    fs::create_directories(args.out);

    MetricsReport report;
    std::vector<HsiCube> fused;
    fused.reserve(pairs.size());
    if (!args.ckpt.empty()) {
        manifest.add_input(args.ckpt);
        FusionModel model = FusionModel::load(args.ckpt);
        report.param_count = model.param_count();
        for (const auto& pair : pairs) {
            Tensor pred = model.forward(cube_to_tensor(pair.lr), cube_to_tensor(pair.msi));
            fused.push_back(tensor_to_cube(pred, pair.gt.wavelengths, /*clamp_unit=*/true));
        }
    } else {
        report.param_count = -1;
        for (const auto& pair : pairs) {
            const int64_t r = pair.gt.height / pair.lr.height;
            HsiCube up = upsample(pair.lr, r, ResampleKernel::kBicubic);
            for (auto& v : up.data) v = std::clamp(v, 0.0, 1.0);
            fused.push_back(std::move(up));
        }
    }
    for (size_t i = 0; i < pairs.size(); ++i) {
        const int64_t r = pairs[i].gt.height / pairs[i].lr.height;
        ImageMetrics m;
        m.name = pairs[i].name;
        m.psnr = psnr(fused[i], pairs[i].gt, mode);
        m.sam = sam(fused[i], pairs[i].gt);
        m.ergas = ergas(fused[i], pairs[i].gt, r);
        m.ssim = fused[i].height >= 11 && fused[i].width >= 11
                     ? ssim(fused[i], pairs[i].gt)
                     : std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(std::move(m));
    }

    {
        std::ofstream csv(args.out + "/metrics.csv");
        report.write_csv(csv);
        std::ofstream text(args.out + "/metrics.txt");
        report.write_text(text);
    }
    report.write_text(std::cout);
    manifest.outputs = {args.out + "/metrics.csv", args.out + "/metrics.txt"};

    if (args.save_fused)
        for (size_t i = 0; i < pairs.size(); ++i) {
            const std::string path = args.out + "/" + pairs[i].name + "_fused.cube";
            save_cube(fused[i], path);
            manifest.outputs.push_back(path);
        }
    if (!args.profile.empty()) {
        const size_t comma = args.profile.find(',');
        if (comma == std::string::npos) throw ValueError("--profile expects row,col");
        const int64_t row = std::stoll(args.profile.substr(0, comma));
        const int64_t col = std::stoll(args.profile.substr(comma + 1));
        for (size_t i = 0; i < pairs.size(); ++i) {
            const int64_t r = pairs[i].gt.height / pairs[i].lr.height;
            HsiCube bicubic_up = upsample(pairs[i].lr, r, ResampleKernel::kBicubic);
            const std::string path = args.out + "/" + pairs[i].name + "_profile.csv";
            std::ofstream os(path);
            write_spectral_profile(
                os, {{"gt", &pairs[i].gt}, {"fused", &fused[i]}, {"bicubic", &bicubic_up}}, row, col);
            manifest.outputs.push_back(path);
        }
    }
    if (args.dump_band >= 0)
        for (size_t i = 0; i < pairs.size(); ++i) {
            const std::string path = args.out + "/" + pairs[i].name + "_band" +
                                     std::to_string(args.dump_band) + ".pgm";
            write_pgm(fused[i], args.dump_band, path);
            manifest.outputs.push_back(path);
        }

    manifest.config = {{"mode", args.ckpt.empty() ? "baseline_bicubic" : "checkpoint"},
                       {"psnr", args.per_band_psnr ? "per_band" : "joint"},
                       {"data", args.data}};
    manifest.finished_at = iso8601_utc_now();
    manifest.write(args.out + "/manifest.json");
    return kExitOk;
}

struct AblateArgs {
    std::string data;
    std::string eval_data;
    std::string out;
    std::string config_path;
    std::string axis = "all";
    uint64_t seed = 0;
    bool seed_given = false;
    int64_t epochs = -1;
};

int cmd_ablate(const AblateArgs& args, const std::vector<std::string>& argv) {
    RunManifest manifest;
    manifest.command = "ablate";
    manifest.argv = argv;
    manifest.started_at = iso8601_utc_now();

    auto pairs = load_pairs(args.data);
    auto eval_pairs = args.eval_data.empty() ? pairs : load_pairs(args.eval_data);

    TrainArgs targs;
    targs.config_path = args.config_path;
    targs.seed = args.seed;
    targs.seed_given = args.seed_given;
    targs.epochs = args.epochs;
    TrainConfig base = build_train_config(targs, pairs);
    manifest.seed = base.seed;
    if (!args.config_path.empty()) manifest.add_input(args.config_path);

    std::vector<AblationAxis> axes;
    if (args.axis == "all")
        axes = {AblationAxis::kDualFreq, AblationAxis::kRelCoord, AblationAxis::kWeightMode,
                AblationAxis::kUpsampler};
    else
        axes = {ablation_axis_from(args.axis)};

    fs::create_directories(args.out);
    for (AblationAxis axis : axes) {
        AblationTable table = run_ablation(axis, base, pairs, eval_pairs);
        const std::string stem = args.out + "/ablate_" + table.axis;
        {
            std::ofstream csv(stem + ".csv");
            table.write_csv(csv);
            std::ofstream text(stem + ".txt");
            table.write_text(text);
        }
        table.write_text(std::cout);
        manifest.outputs.push_back(stem + ".csv");
        manifest.outputs.push_back(stem + ".txt");
    }

    manifest.config = {{"axis", args.axis},
                       {"epochs", std::to_string(base.epochs)},
                       {"data", args.data},
                       {"pairs", std::to_string(pairs.size())}};
    manifest.finished_at = iso8601_utc_now();
    manifest.write(args.out + "/manifest.json");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multispectral + hyperspectral fusion pipeline"};
    app.require_subcommand(1);
    std::vector<std::string> raw_args(argv, argv + argc);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic ground-truth cube");
    synth_cmd->add_option("--out", synth.out, "output .cube path")->required();
    synth_cmd->add_option("--size", synth.size, "square raster extent (default 64)");
    synth_cmd->add_option("--bands", synth.bands, "spectral bands (default 31)");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "degrade ground truth into LR/guide pairs");
    sim_cmd->add_option("--input", sim.input, "GT cube file or directory of .cube files")->required();
    sim_cmd->add_option("--out", sim.out, "output dataset directory")->required();
    sim_cmd->add_option("--scale", sim.scale, "spatial downsampling factor (default 4)");
    sim_cmd->add_option("--patch", sim.patch, "patch size (default 64)");
    sim_cmd->add_option("--stride", sim.stride, "patch stride (default: patch size)");
    sim_cmd->add_option("--srf", sim.srf_path, "spectral response table (default: built-in)");
    sim_cmd->add_option("--seed", sim.seed, "split shuffle seed");
    sim_cmd->add_option("--split", sim.split, "train fraction (default 0.8)");
    sim_cmd->add_flag("--block-mean", sim.block_mean, "average r x r blocks instead of decimating");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train the fusion model");
    train_cmd->add_option("--data", tr.data, "dataset directory (triples)")->required();
    train_cmd->add_option("--out", tr.out, "output directory")->required();
    train_cmd->add_option("--config", tr.config_path, "key=value config file");
    auto* seed_opt = train_cmd->add_option("--seed", tr.seed, "master seed");
    train_cmd->add_option("--epochs", tr.epochs, "training epochs");
    train_cmd->add_option("--lr", tr.lr, "learning rate");
    train_cmd->add_option("--batch", tr.batch, "batch size");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "score fused outputs against ground truth");
    eval_cmd->add_option("--data", ev.data, "dataset directory (triples)")->required();
    eval_cmd->add_option("--out", ev.out, "output directory")->required();
    eval_cmd->add_option("--ckpt", ev.ckpt, "model checkpoint");
    eval_cmd->add_option("--baseline", ev.baseline, "fixed baseline instead of a model (bicubic)");
    eval_cmd->add_option("--profile", ev.profile, "row,col spectral profile CSV per image");
    eval_cmd->add_option("--dump-band", ev.dump_band, "write this band of each fused cube as PGM");
    eval_cmd->add_flag("--save-fused", ev.save_fused, "write fused cubes");
    eval_cmd->add_flag("--per-band-psnr", ev.per_band_psnr, "average per-band PSNRs instead of pooling");

    AblateArgs ab;
    auto* ablate_cmd = app.add_subcommand("ablate", "train and score one model per switch setting");
    ablate_cmd->add_option("--data", ab.data, "training dataset directory")->required();
    ablate_cmd->add_option("--eval-data", ab.eval_data, "evaluation dataset (default: --data)");
    ablate_cmd->add_option("--out", ab.out, "output directory")->required();
    ablate_cmd->add_option("--config", ab.config_path, "key=value config file");
    ablate_cmd
        ->add_option("--axis", ab.axis, "dual_freq | rel_coord | weight_mode | upsampler | all")
        ->check(CLI::IsMember({"dual_freq", "rel_coord", "weight_mode", "upsampler", "all"}));
    auto* ab_seed_opt = ablate_cmd->add_option("--seed", ab.seed, "master seed");
    ablate_cmd->add_option("--epochs", ab.epochs, "epochs per arm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    tr.seed_given = seed_opt->count() > 0;
    ab.seed_given = ab_seed_opt->count() > 0;

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth, raw_args);
        if (sim_cmd->parsed()) return cmd_simulate(sim, raw_args);
        if (train_cmd->parsed()) return cmd_train(tr, raw_args);
        if (eval_cmd->parsed()) return cmd_eval(ev, raw_args);
        if (ablate_cmd->parsed()) return cmd_ablate(ab, raw_args);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}
