#include "saltrack/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "saltrack/config.hpp"
#include "saltrack/image_io.hpp"
#include "saltrack/metrics.hpp"
#include "saltrack/net.hpp"
#include "saltrack/tracker.hpp"

namespace fs = std::filesystem;

namespace saltrack {

namespace {

const char* const kImageExts[] = {".png", ".pgm", ".ppm"};

bool has_image_ext(const fs::path& p) {
    std::string e = p.extension().string();
    for (const char* ext : kImageExts)
        if (e == ext) return true;
    return false;
}

std::string strip_image_ext(const std::string& path) {
    fs::path p(path);
    if (has_image_ext(p)) return (p.parent_path() / p.stem()).string();
    return path;
}

RunConfig load_config_opt(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return parse_config(path);
}

// --- train -------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> collect_pairs(const std::string& dir) {
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    std::vector<std::string> img_files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string name = e.path().filename().string();
        if (name.find(".img.") != std::string::npos && has_image_ext(e.path()))
            img_files.push_back(e.path().string());
    }
    std::sort(img_files.begin(), img_files.end());
    for (const auto& img : img_files) {
        size_t at = img.rfind(".img.");
        std::string stem = img.substr(0, at);
        std::string gt;
        for (const char* ext : kImageExts) {
            std::string cand = stem + ".gt" + ext;
            if (fs::exists(cand)) {
                gt = cand;
                break;
            }
        }
        if (gt.empty()) throw IoError("no ground-truth mask for " + img);
        pairs.emplace_back(img, gt);
    }
    if (pairs.empty())
        throw IoError("no training pairs (*.img.png + *.gt.png) under " + dir);
    return pairs;
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_path) {
    RunConfig cfg = load_config_opt(config_path);
    auto files = collect_pairs(data_dir);
    std::vector<std::pair<ImageTensor, BinaryMask>> pairs;
    pairs.reserve(files.size());
    for (const auto& [img_path, gt_path] : files) {
        ImageTensor img = load_image(img_path);
        BinaryMask gt = load_mask(gt_path);
        pairs.emplace_back(preprocess_image(img, cfg.net_input_size),
                           preprocess_mask(gt, cfg.net_input_size));
    }
    SaliencyNet net = SaliencyNet::random_init(cfg.net_input_size, cfg.seed);
    TrainReport report = net.train(pairs, cfg.train_iterations, cfg.train_lr,
                                   cfg.momentum, cfg.weight_decay);
    net.save_checkpoint(out_path);
    std::printf("trained %zu pairs, %d iterations, final loss %.6f\n", pairs.size(),
                cfg.train_iterations, report.loss_trace.back());
    return 0;
}

// --- detect ------------------------------------------------------------------

int cmd_detect(const std::string& image_path, const std::string& ckpt_path,
               const std::string& config_path) {
    RunConfig cfg = load_config_opt(config_path);
    SaliencyNet expected(cfg.net_input_size);
    SaliencyNet net = SaliencyNet::load_checkpoint(ckpt_path, &expected);
    ImageTensor img = load_image(image_path);
    RegionGrid grid = make_region_grid(img.width / 2.0, img.height / 2.0, img.width,
                                       img.height, cfg.n_scales, img.width, img.height);
    SaliencyMap sal = fuse_pipeline(img, grid, net, cfg.fusion_config());
    std::string out = strip_image_ext(image_path) + ".saliency.png";
    save_saliency_png(out, sal);
    std::printf("%s\n", out.c_str());
    return 0;
}

// --- track -------------------------------------------------------------------

int cmd_track(const std::string& manifest_path, const std::string& ckpt_path,
              const std::string& config_path, const std::string& out_dir) {
    RunConfig cfg = load_config_opt(config_path);
    SequenceManifest manifest = parse_manifest(manifest_path);
    SaliencyNet expected(cfg.net_input_size);
    SaliencyNet net = SaliencyNet::load_checkpoint(ckpt_path, &expected);

    fs::create_directories(out_dir);
    ImageTensor first = load_image(manifest.frames[0]);
    if (manifest.init_x < 0 || manifest.init_y < 0 ||
        manifest.init_x + manifest.init_w > first.width ||
        manifest.init_y + manifest.init_h > first.height)
        throw ConfigError("init box outside frame 1");

    double cx = manifest.init_x + manifest.init_w / 2.0;
    double cy = manifest.init_y + manifest.init_h / 2.0;
    TrackerState state = tracker_initialize(first, cx, cy, manifest.init_w,
                                            manifest.init_h, std::move(net),
                                            cfg.tracker_config());

    std::string csv = "frame,x,y,w,h\n";
    int lost = 0;
    char buf[128];
    for (size_t t = 2; t <= manifest.frames.size(); ++t) {
        ImageTensor frame = load_image(manifest.frames[t - 1]);
        TrackOutput out = track_frame(state, frame);
        if (out.lost) ++lost;
        std::snprintf(buf, sizeof(buf), "mask_%06zu.png", t);
        save_mask_png((fs::path(out_dir) / buf).string(), out.mask);
        std::snprintf(buf, sizeof(buf), "saliency_%06zu.png", t);
        save_saliency_png((fs::path(out_dir) / buf).string(), out.saliency);
        std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%d\n", t, out.bbox.x, out.bbox.y,
                      out.bbox.w, out.bbox.h);
        csv += buf;
    }
    std::ofstream boxes((fs::path(out_dir) / "boxes.csv").string(), std::ios::binary);
    if (!boxes) throw IoError("cannot write boxes.csv under " + out_dir);
    boxes << csv;
    boxes.close();
    std::printf("tracked %zu frames (%d lost)\n", manifest.frames.size() - 1, lost);
    return 0;
}

// --- eval --------------------------------------------------------------------

SaliencyMap load_saliency(const std::string& path) {
    RawImage raw = decode_image_file(path);
    SaliencyMap map(raw.height, raw.width, SaliencyStage::Normalized);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x)
            map.at(y, x) =
                raw.pixels[(static_cast<size_t>(y) * raw.width + x) * raw.channels] / 255.0;
    return map;
}

double bbox_center_error(const Rect& a, const Rect& b, int frame_w, int frame_h) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty())
        return std::hypot(static_cast<double>(frame_w), static_cast<double>(frame_h));
    double dx = (a.x + a.w / 2.0) - (b.x + b.w / 2.0);
    double dy = (a.y + a.h / 2.0) - (b.y + b.h / 2.0);
    return std::hypot(dx, dy);
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir,
             const std::string& mode, const std::string& out_csv) {
    if (!fs::is_directory(pred_dir)) throw IoError("not a directory: " + pred_dir);
    if (!fs::is_directory(gt_dir)) throw IoError("not a directory: " + gt_dir);

    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(pred_dir)) {
        if (!e.is_regular_file() || !has_image_ext(e.path())) continue;
        if (fs::exists(fs::path(gt_dir) / e.path().filename()))
            names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) throw IoError("no matching files between " + pred_dir + " and " + gt_dir);

    std::vector<EvalRecord> records;
    records.reserve(names.size());
    for (const auto& name : names) {
        std::string pred_path = (fs::path(pred_dir) / name).string();
        std::string gt_path = (fs::path(gt_dir) / name).string();
        BinaryMask gt = load_mask(gt_path);
        BinaryMask pred_mask;
        if (mode == "saliency") {
            SaliencyMap sal = load_saliency(pred_path);
            double mx = *std::max_element(sal.data.begin(), sal.data.end());
            pred_mask = BinaryMask(sal.height, sal.width);
            if (mx > 0) {
                double t = std::clamp(adaptive_threshold(sal), 0.1 * mx, 0.9 * mx);
                for (size_t i = 0; i < sal.data.size(); ++i)
                    pred_mask.data[i] = sal.data[i] > t ? 1 : 0;
            }
        } else {
            pred_mask = load_mask(pred_path);
        }
        if (pred_mask.height != gt.height || pred_mask.width != gt.width)
            throw IoError("size mismatch between " + pred_path + " and " + gt_path);

        EvalRecord r;
        r.id = fs::path(name).stem().string();
        auto [p, rec] = precision_recall(pred_mask, gt);
        r.precision = p;
        r.recall = rec;
        r.f_measure = f_measure(p, rec);
        r.iou_mask = iou_mask(pred_mask, gt);
        Rect pb = tight_bbox(pred_mask), gb = tight_bbox(gt);
        r.iou_bbox = iou_bbox(pb, gb);
        r.center_error_px = bbox_center_error(pb, gb, gt.width, gt.height);
        records.push_back(std::move(r));
    }
    write_csv(out_csv, records);

    double mean_f = 0, mean_iou = 0, mean_biou = 0;
    std::vector<double> errors;
    for (const auto& r : records) {
        mean_f += r.f_measure;
        mean_iou += r.iou_mask;
        mean_biou += r.iou_bbox;
        errors.push_back(r.center_error_px);
    }
    size_t n = records.size();
    std::printf("%s: %zu items f=%.4f iou_mask=%.4f iou_bbox=%.4f center_precision=%.4f\n",
                mode.c_str(), n, mean_f / n, mean_iou / n, mean_biou / n,
                center_precision(errors));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"discriminative-saliency non-rigid object tracker"};
    app.require_subcommand(1);

    std::string data_dir, config_path, out_path;
    auto* train = app.add_subcommand("train", "train the saliency network");
    train->add_option("--data", data_dir, "directory of *.img.png + *.gt.png pairs")
        ->required();
    train->add_option("--config", config_path, "key = value config file");
    train->add_option("--out", out_path, "output checkpoint path")->required();

    std::string image_path, ckpt_path;
    auto* detect = app.add_subcommand("detect", "saliency map for one image");
    detect->add_option("--image", image_path, "input image")->required();
    detect->add_option("--ckpt", ckpt_path, "network checkpoint")->required();
    detect->add_option("--config", config_path, "key = value config file");

    std::string seq_path, track_out;
    auto* track = app.add_subcommand("track", "track a sequence from a manifest");
    track->add_option("--seq", seq_path, "sequence manifest")->required();
    track->add_option("--ckpt", ckpt_path, "network checkpoint")->required();
    track->add_option("--config", config_path, "key = value config file");
    track->add_option("--out", track_out, "output directory")->required();

    std::string pred_dir, gt_dir, mode = "saliency", eval_csv = "metrics.csv";
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    eval->add_option("--pred", pred_dir, "prediction directory")->required();
    eval->add_option("--gt", gt_dir, "ground-truth directory")->required();
    eval->add_option("--mode", mode, "saliency|tracking")
        ->check(CLI::IsMember({"saliency", "tracking"}));
    eval->add_option("--out", eval_csv, "metrics CSV path (default metrics.csv)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            std::cout << app.help();
            return 0;
        }
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(data_dir, config_path, out_path);
        if (app.got_subcommand(detect)) return cmd_detect(image_path, ckpt_path, config_path);
        if (app.got_subcommand(track))
            return cmd_track(seq_path, ckpt_path, config_path, track_out);
        if (app.got_subcommand(eval)) return cmd_eval(pred_dir, gt_dir, mode, eval_csv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace saltrack
