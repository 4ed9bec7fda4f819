#include "saltrack/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace saltrack {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& v, const std::string& origin, int line) {
    try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) fail(origin, line, "malformed number '" + v + "'");
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(origin, line, "malformed number '" + v + "'");
    }
}

}  // namespace

FusionConfig RunConfig::fusion_config() const {
    FusionConfig f;
    f.net_input_size = net_input_size;
    f.sigma_s = sigma_s;
    f.sigma_r = sigma_r;
    f.dt_iterations = dt_iterations;
    f.max_crop_edge = max_crop_edge;
    return f;
}

TrackerConfig RunConfig::tracker_config() const {
    TrackerConfig t;
    t.tau = tau;
    t.decay_c = decay_c;
    t.crop_scale = crop_scale;
    t.mask.relative_threshold = mask_threshold;
    t.mask.clamp_lo = mask_clamp_lo;
    t.mask.clamp_hi = mask_clamp_hi;
    t.n_scales = n_scales;
    t.finetune_iterations = finetune_iterations;
    t.init_finetune_iterations = init_finetune_iterations;
    t.finetune_lr = finetune_lr;
    t.momentum = momentum;
    t.weight_decay = weight_decay;
    t.seed = seed;
    t.fusion = fusion_config();
    return t;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;

    struct Field {
        std::function<void(double, int)> set;
    };
    auto int_field = [&](int* dst, int lo, const char* what) {
        return Field{[dst, lo, what, &origin](double v, int line) {
            if (v != std::floor(v)) fail(origin, line, std::string(what) + " must be an integer");
            if (v < lo) fail(origin, line, std::string(what) + " must be >= " + std::to_string(lo));
            *dst = static_cast<int>(v);
        }};
    };
    auto pos_field = [&](double* dst, const char* what) {
        return Field{[dst, what, &origin](double v, int line) {
            if (v <= 0) fail(origin, line, std::string(what) + " must be > 0");
            *dst = v;
        }};
    };
    auto nonneg_field = [&](double* dst, const char* what) {
        return Field{[dst, what, &origin](double v, int line) {
            if (v < 0) fail(origin, line, std::string(what) + " must be >= 0");
            *dst = v;
        }};
    };

    std::map<std::string, Field> fields;
    fields["net_input_size"] = Field{[&](double v, int line) {
        if (v != std::floor(v) || v < 8 || static_cast<int>(v) % 8 != 0)
            fail(origin, line, "net_input_size must be an integer >= 8 divisible by 8");
        cfg.net_input_size = static_cast<int>(v);
    }};
    fields["n_scales"] = int_field(&cfg.n_scales, 1, "n_scales");
    fields["tau"] = int_field(&cfg.tau, 0, "tau");
    fields["c"] = Field{[&](double v, int line) {
        if (v <= 1.0) fail(origin, line, "c must be > 1");
        cfg.decay_c = v;
    }};
    fields["crop_scale"] = Field{[&](double v, int line) {
        if (v < 1.0) fail(origin, line, "crop_scale must be >= 1");
        cfg.crop_scale = v;
    }};
    fields["max_crop_edge"] = int_field(&cfg.max_crop_edge, 16, "max_crop_edge");
    fields["sigma_s"] = pos_field(&cfg.sigma_s, "sigma_s");
    fields["sigma_r"] = pos_field(&cfg.sigma_r, "sigma_r");
    fields["dt_iterations"] = int_field(&cfg.dt_iterations, 1, "dt_iterations");
    fields["mask_threshold"] = Field{[&](double v, int line) {
        if (v < 0 || v >= 1) fail(origin, line, "mask_threshold must be in [0,1)");
        cfg.mask_threshold = v;
    }};
    fields["mask_clamp_lo"] = Field{[&](double v, int line) {
        if (v < 0 || v >= 1) fail(origin, line, "mask_clamp_lo must be in [0,1)");
        cfg.mask_clamp_lo = v;
    }};
    fields["mask_clamp_hi"] = Field{[&](double v, int line) {
        if (v <= 0 || v > 1) fail(origin, line, "mask_clamp_hi must be in (0,1]");
        cfg.mask_clamp_hi = v;
    }};
    fields["train_iterations"] = int_field(&cfg.train_iterations, 1, "train_iterations");
    fields["train_lr"] = pos_field(&cfg.train_lr, "train_lr");
    fields["finetune_iterations"] = int_field(&cfg.finetune_iterations, 0, "finetune_iterations");
    fields["init_finetune_iterations"] =
        int_field(&cfg.init_finetune_iterations, 0, "init_finetune_iterations");
    fields["finetune_lr"] = pos_field(&cfg.finetune_lr, "finetune_lr");
    fields["momentum"] = Field{[&](double v, int line) {
        if (v < 0 || v >= 1) fail(origin, line, "momentum must be in [0,1)");
        cfg.momentum = v;
    }};
    fields["weight_decay"] = nonneg_field(&cfg.weight_decay, "weight_decay");
    fields["seed"] = Field{[&](double v, int line) {
        if (v != std::floor(v) || v < 0) fail(origin, line, "seed must be a non-negative integer");
        cfg.seed = static_cast<uint64_t>(v);
    }};

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(origin, line_no, "empty key");
        auto it = fields.find(key);
        if (it == fields.end()) fail(origin, line_no, "unknown key '" + key + "'");
        it->second.set(parse_number(value, origin, line_no), line_no);
    }
    if (cfg.mask_clamp_lo >= cfg.mask_clamp_hi)
        throw ConfigError(origin + ": mask_clamp_lo must be below mask_clamp_hi");
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str(), path);
}

SequenceManifest parse_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path);
    std::filesystem::path dir = std::filesystem::path(path).parent_path();

    SequenceManifest m;
    bool saw_init = false;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (!saw_init) {
            if (line.rfind("init:", 0) != 0)
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": first entry must be 'init: x y w h'");
            std::istringstream is(line.substr(5));
            if (!(is >> m.init_x >> m.init_y >> m.init_w >> m.init_h) ||
                m.init_w <= 0 || m.init_h <= 0)
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": malformed init box");
            saw_init = true;
            continue;
        }
        std::string frame = line, mask;
        size_t tab = line.find('\t');
        if (tab != std::string::npos) {
            frame = trim(line.substr(0, tab));
            mask = trim(line.substr(tab + 1));
        }
        m.frames.push_back((dir / frame).string());
        if (!mask.empty()) m.gt_masks.push_back((dir / mask).string());
    }
    if (!saw_init) throw ConfigError(path + ": missing 'init:' line");
    if (m.frames.empty()) throw ConfigError(path + ": manifest lists no frames");
    if (!m.gt_masks.empty() && m.gt_masks.size() != m.frames.size())
        throw ConfigError(path + ": mask column must be present on all frames or none");
    return m;
}

}  // namespace saltrack
