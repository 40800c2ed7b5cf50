#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "alfilter/adaptive_filter.hpp"
#include "alfilter/checkpoint.hpp"
#include "alfilter/errors.hpp"
#include "alfilter/image_io.hpp"
#include "alfilter/metrics.hpp"
#include "alfilter/ntk.hpp"
#include "alfilter/tasks.hpp"

namespace alf::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kIo = 3,
    kNumerical = 4,
    kResource = 5,
};

struct SettingSpec {
    std::string key;
    std::string default_value;
    std::string help;
    bool multi = false;  // repeatable flag; values are joined with ','
};

using Settings = std::map<std::string, std::string>;

/// Parses the flat config format: one `key = value` per line, `#` starts a
/// comment, blank lines are ignored.
inline Settings parse_config_text(const std::string& text, const std::string& origin = "config") {
    Settings out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

inline Settings read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path);
}

/// Effective settings: flag > config file > default. Unknown keys in either
/// source are rejected by name.
inline Settings resolve_settings(const std::vector<SettingSpec>& specs, const Settings& from_file,
                                 const Settings& from_flags) {
    Settings out;
    for (const auto& s : specs) out[s.key] = s.default_value;
    auto apply = [&](const Settings& src, const char* what) {
        for (const auto& [k, v] : src) {
            if (!out.contains(k)) throw ConfigError(std::string("unknown ") + what + " key '" + k + "'");
            out[k] = v;
        }
    };
    apply(from_file, "config");
    apply(from_flags, "flag");
    return out;
}

inline std::string format_resolved(const std::string& command, const std::vector<SettingSpec>& specs,
                                   const Settings& s) {
    std::string out = "# resolved settings\ncommand = " + command + "\n";
    for (const auto& spec : specs) out += spec.key + " = " + s.at(spec.key) + "\n";
    return out;
}

namespace detail {

inline std::string require(const Settings& s, const std::string& key) {
    const auto& v = s.at(key);
    if (v.empty()) throw ConfigError("missing required setting '" + key + "'");
    return v;
}

inline double get_double(const Settings& s, const std::string& key) {
    const std::string v = require(s, key);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("setting '" + key + "': expected a number, got '" + v + "'");
    }
}

inline long long get_int(const Settings& s, const std::string& key) {
    const std::string v = require(s, key);
    try {
        std::size_t used = 0;
        const long long d = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("setting '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir);
    }
}

inline std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline std::string image_ext(int channels) { return channels == 3 ? ".ppm" : ".pgm"; }

}  // namespace detail

inline std::vector<SettingSpec> training_specs(bool sparse) {
    std::vector<SettingSpec> s{
        {"image", "", "input PPM/PGM image"},
        {"out", "", "output directory"},
        {"iters", "5000", "training iterations"},
        {"seed", "0", "random seed"},
        {"L", "8", "number of dyadic scales"},
        {"B", "20", "filter bandwidth in channels"},
        {"kappa", "10", "filter sharpness"},
        {"activation", "sine", "relu or sine"},
        {"omega0", "30", "sine frequency of the first hidden layer"},
        {"depth", "3", "hidden layers"},
        {"width", "256", "hidden width"},
        {"filter", "adaptive", "adaptive or allpass"},
        {"lr-net", "1e-3", "network learning rate"},
        {"lr-alpha", "3e-3", "alpha grid learning rate"},
        {"lr-step", "1250", "scheduler step size"},
        {"lr-decay", "0.6", "scheduler decay factor"},
        {"grid", "auto", "alpha grid WxH, or auto (one node per pixel, capped at 512)"},
        {"alpha-init", "auto", "initial alpha, or auto (C_N / 2)"},
        {"tv", sparse ? "1e-3" : "0", "TV weight on the alpha grid"},
        {"log-every", "50", "log interval in steps"},
        {"batch", "16384", "minibatch size for images above 128x128"},
        {"precision", "float", "float or double"},
    };
    if (sparse) s.push_back({"fraction", "0.05", "observed pixel fraction"});
    return s;
}

inline std::vector<SettingSpec> ntk_specs() {
    return {
        {"out", "", "output directory"},
        {"mode", "compare", "compare (adaptive vs all-pass) or single"},
        {"model", "linear", "linear (affine readout of features) or mlp"},
        {"n", "256", "number of sampled coordinates"},
        {"seed", "0", "random seed"},
        {"d-in", "1", "input dimension"},
        {"L", "8", "number of dyadic scales"},
        {"B", "20", "filter bandwidth"},
        {"kappa", "10", "filter sharpness"},
        {"alpha", "auto", "constant alpha, or auto (C_N / 2)"},
        {"activation", "sine", "mlp activation"},
        {"omega0", "30", "sine frequency"},
        {"depth", "3", "mlp hidden layers"},
        {"width", "64", "mlp hidden width"},
        {"trainable", "mlp", "mlp, alpha or all"},
        {"scalar", "sum", "sum, or an output channel index"},
        {"checkpoint", "", "optional trained model to analyse instead"},
        {"kernel-range", "1", "half-width of the kernel curve in x - x'"},
        {"kernel-samples", "201", "points on the kernel curve"},
    };
}

inline std::vector<SettingSpec> filter_curve_specs() {
    return {
        {"out", "", "output directory"},
        {"alpha", "0,16,31", "alpha values (repeatable)", true},
        {"B", "20", "filter bandwidth"},
        {"kappa", "10", "filter sharpness"},
        {"cn", "32", "encoded channel count"},
    };
}

inline std::vector<SettingSpec> alpha_export_specs() {
    return {
        {"checkpoint", "", "model checkpoint"},
        {"out", "", "output directory"},
    };
}

inline std::vector<SettingSpec> render_specs() {
    return {
        {"checkpoint", "", "model checkpoint"},
        {"out", "", "output directory"},
        {"height", "0", "output height (0: reference height)"},
        {"width", "0", "output width (0: reference width)"},
        {"scale", "1", "multiplier applied to height and width"},
        {"reference", "", "optional ground-truth image for PSNR/SSIM"},
    };
}

inline TrainConfig train_config_from(const Settings& s) {
    using namespace detail;
    TrainConfig c;
    c.iterations = static_cast<int>(get_int(s, "iters"));
    c.seed = static_cast<std::uint64_t>(get_int(s, "seed"));
    c.levels = static_cast<int>(get_int(s, "L"));
    c.bandwidth = get_double(s, "B");
    c.kappa = get_double(s, "kappa");
    c.activation = parse_activation(s.at("activation"));
    c.omega0 = get_double(s, "omega0");
    c.hidden_layers = static_cast<int>(get_int(s, "depth"));
    c.hidden_width = static_cast<int>(get_int(s, "width"));
    c.filter_mode = parse_filter_mode(s.at("filter"));
    c.adam.lr_network = get_double(s, "lr-net");
    c.adam.lr_alpha = get_double(s, "lr-alpha");
    c.adam.step_size = get_int(s, "lr-step");
    c.adam.decay = get_double(s, "lr-decay");
    if (c.filter_mode == FilterMode::all_pass) c.adam.train_alpha = false;
    const std::string grid = s.at("grid");
    if (grid != "auto") {
        const auto x = grid.find('x');
        try {
            if (x == std::string::npos) {
                c.grid_width = c.grid_height = std::stoi(grid);
            } else {
                c.grid_width = std::stoi(grid.substr(0, x));
                c.grid_height = std::stoi(grid.substr(x + 1));
            }
        } catch (const std::exception&) {
            throw ConfigError("setting 'grid': expected WxH or auto, got '" + grid + "'");
        }
    }
    if (s.at("alpha-init") != "auto") c.alpha_init = get_double(s, "alpha-init");
    c.tv_weight = get_double(s, "tv");
    c.log_every = static_cast<int>(get_int(s, "log-every"));
    c.batch_size = static_cast<int>(get_int(s, "batch"));
    c.validate();
    return c;
}

namespace detail {

template <typename F>
auto with_precision(const std::string& p, F&& f) {
    if (p == "float") return f(float{});
    if (p == "double") return f(double{});
    throw ConfigError("setting 'precision': expected float or double, got '" + p + "'");
}

template <typename Real>
void write_model_outputs(const std::string& out, const InrModel<Real>& model) {
    save_checkpoint(model, join(out, "model.ckpt"));
    if (model.alpha.dims() == 2) {
        write_alpha_csv(model.alpha, join(out, "alpha.csv"));
        write_pnm_bytes(join(out, "alpha.pgm"), model.alpha.resolution()[1], model.alpha.resolution()[0], 1,
                        alpha_to_gray(model.alpha));
    }
}

inline int run_fit(const Settings& s, std::ostream& os) {
    const TrainConfig cfg = train_config_from(s);
    const ImageSignal image = read_pnm(require(s, "image"));
    const std::string out = require(s, "out");
    ensure_dir(out);
    return with_precision(s.at("precision"), [&]<typename Real>(Real) {
        const FitResult<Real> r = fit_image<Real>(image, cfg);
        const std::string ext = image_ext(image.channels);
        write_text_file(join(out, "log.csv"), format_log_csv(r.log));
        write_pnm(join(out, "reconstruction" + ext), r.reconstruction);
        write_pnm(join(out, "error" + ext), r.error_map);
        write_model_outputs(out, r.model);
        char buf[256];
        std::snprintf(buf, sizeof buf, "fit: psnr=%.4f dB ssim=%.4f iters=%d out=%s\n", r.psnr, r.ssim,
                      cfg.iterations, out.c_str());
        os << buf;
        return kOk;
    });
}

inline int run_sparse(const Settings& s, std::ostream& os) {
    const TrainConfig cfg = train_config_from(s);
    const ImageSignal image = read_pnm(require(s, "image"));
    const std::string out = require(s, "out");
    const double fraction = get_double(s, "fraction");
    const ObservationMask mask = sample_mask(image.height, image.width, fraction, cfg.seed);
    ensure_dir(out);
    return with_precision(s.at("precision"), [&]<typename Real>(Real) {
        const SparseResult<Real> r = reconstruct_sparse<Real>(image, mask, cfg);
        const std::string ext = image_ext(image.channels);
        ImageSignal masked_input(image.height, image.width, image.channels);
        for (std::size_t p = 0; p < mask.observed.size(); ++p) {
            if (!mask.observed[p]) continue;
            for (int k = 0; k < image.channels; ++k) {
                masked_input.pixels[p * image.channels + k] = image.pixels[p * image.channels + k];
            }
        }
        write_text_file(join(out, "log.csv"), format_log_csv(r.log));
        write_pnm(join(out, "masked_input" + ext), masked_input);
        write_pnm(join(out, "reconstruction" + ext), r.reconstruction);
        write_pnm(join(out, "masked_error" + ext), r.masked_error);
        write_pnm(join(out, "reconstruction_error" + ext), r.reconstruction_error);
        write_model_outputs(out, r.model);
        char buf[320];
        std::snprintf(buf, sizeof buf,
                      "sparse: observed=%zu psnr_all=%.4f dB psnr_unobserved=%.4f dB psnr_observed=%.4f dB "
                      "ssim=%.4f tv=%.6g out=%s\n",
                      mask.count(), r.psnr_all, r.psnr_unobserved, r.psnr_observed, r.ssim,
                      r.model.alpha.tv_penalty(), out.c_str());
        os << buf;
        return kOk;
    });
}

inline TrainableSet parse_trainable(const std::string& v) {
    if (v == "mlp") return {true, true, false};
    if (v == "alpha") return {false, false, true};
    if (v == "all") return {true, true, true};
    throw ConfigError("setting 'trainable': expected mlp, alpha or all, got '" + v + "'");
}

inline int run_ntk(const Settings& s, std::ostream& os) {
    const std::string out = require(s, "out");
    const std::string mode = s.at("mode");
    if (mode != "compare" && mode != "single") {
        throw ConfigError("setting 'mode': expected compare or single, got '" + mode + "'");
    }
    const auto n = static_cast<Eigen::Index>(get_int(s, "n"));
    const auto seed = static_cast<std::uint64_t>(get_int(s, "seed"));
    Scalarization scalar;
    if (s.at("scalar") != "sum") scalar.channel = static_cast<int>(get_int(s, "scalar"));

    InrModel<double> model;
    TrainableSet trainable = parse_trainable(s.at("trainable"));
    if (!s.at("checkpoint").empty()) {
        model = load_checkpoint<double>(s.at("checkpoint"));
    } else {
        const int d_in = static_cast<int>(get_int(s, "d-in"));
        const int levels = static_cast<int>(get_int(s, "L"));
        const int cn = encoded_dim(d_in, levels);
        const double alpha = s.at("alpha") == "auto" ? default_alpha_init(cn) : get_double(s, "alpha");
        const std::string kind = s.at("model");
        if (kind == "linear") {
            model = make_linear_feature_model(d_in, levels, alpha, FilterMode::adaptive, get_double(s, "B"),
                                              get_double(s, "kappa"));
            if (s.at("trainable") == "mlp") trainable = {true, false, false};
        } else if (kind == "mlp") {
            ModelSpec spec;
            spec.d_in = d_in;
            spec.d_out = 1;
            spec.levels = levels;
            spec.bandwidth = get_double(s, "B");
            spec.kappa = get_double(s, "kappa");
            spec.hidden_layers = static_cast<int>(get_int(s, "depth"));
            spec.hidden_width = static_cast<int>(get_int(s, "width"));
            spec.activation = parse_activation(s.at("activation"));
            spec.omega0 = get_double(s, "omega0");
            spec.grid_resolution.assign(static_cast<std::size_t>(d_in), 2);
            spec.alpha_init = alpha;
            model = make_model<double>(spec, seed);
        } else {
            throw ConfigError("setting 'model': expected linear or mlp, got '" + kind + "'");
        }
    }
    ensure_dir(out);
    const Eigen::MatrixXd coords = random_coords(model.encoding.d_in, n, seed);
    const NtkGram gram = empirical_ntk(model, coords, trainable, scalar);
    const NtkSpectrum ours = spectrum(gram);
    std::vector<double> ratio(ours.eigenvalues.size(), 1.0);
    if (mode == "compare") {
        InrModel<double> base = model;
        base.mode = FilterMode::all_pass;
        const NtkSpectrum bs = spectrum(empirical_ntk(base, coords, trainable, scalar));
        ratio = retention_ratio(ours, bs).ratio;
        write_text_file(join(out, "spectrum_baseline.csv"),
                        format_spectrum_csv(bs, std::vector<double>(bs.eigenvalues.size(), 1.0)));
    }
    const std::string path = join(out, "spectrum.csv");
    write_text_file(path, format_spectrum_csv(ours, ratio));
    if (model.encoding.d_in == 1 && model.alpha.dims() == 1) {
        const double alpha = model.alpha.query(std::vector<double>{0.5});
        write_text_file(join(out, "kernel_curve.csv"),
                        format_kernel_curve_csv(model.encoding.levels, alpha, model.filter,
                                                get_double(s, "kernel-range"),
                                                static_cast<int>(get_int(s, "kernel-samples"))));
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "ntk: n=%lld lambda1=%.6g spectrum=%s\n", static_cast<long long>(n),
                  ours.eigenvalues.front(), path.c_str());
    os << buf;
    return kOk;
}

inline int run_filter_curve(const Settings& s, std::ostream& os) {
    const std::string out = require(s, "out");
    const FilterConfig cfg(get_double(s, "B"), get_double(s, "kappa"), static_cast<int>(get_int(s, "cn")));
    std::vector<double> alphas;
    for (const auto& a : split_list(require(s, "alpha"))) {
        Settings tmp{{"alpha", a}};
        alphas.push_back(get_double(tmp, "alpha"));
    }
    ensure_dir(out);
    std::string csv = "alpha,channel_index,response\n";
    char buf[128];
    for (double a : alphas) {
        const auto h = response_vector(a, cfg);
        for (int c = 0; c < cfg.channels; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g\n", a, c, h[static_cast<std::size_t>(c)]);
            csv += buf;
        }
    }
    const std::string path = join(out, "filter_curve.csv");
    write_text_file(path, csv);
    os << "filter-curve: " << alphas.size() << " alpha values x " << cfg.channels << " channels -> " << path << "\n";
    return kOk;
}

inline int run_alpha_export(const Settings& s, std::ostream& os) {
    const std::string out = require(s, "out");
    const InrModel<double> model = load_checkpoint<double>(require(s, "checkpoint"));
    if (model.alpha.dims() != 2) throw ConfigError("alpha-export: checkpoint grid is not 2D");
    ensure_dir(out);
    write_alpha_csv(model.alpha, join(out, "alpha.csv"));
    write_pnm_bytes(join(out, "alpha.pgm"), model.alpha.resolution()[1], model.alpha.resolution()[0], 1,
                    alpha_to_gray(model.alpha));
    char buf[256];
    std::snprintf(buf, sizeof buf, "alpha-export: %dx%d grid, min=%.6g max=%.6g out=%s\n",
                  model.alpha.resolution()[0], model.alpha.resolution()[1], model.alpha.min_value(),
                  model.alpha.max_value(), out.c_str());
    os << buf;
    return kOk;
}

inline int run_render(const Settings& s, std::ostream& os) {
    const std::string ckpt = require(s, "checkpoint");
    const std::string out = require(s, "out");
    const int precision = checkpoint_precision(ckpt);
    ImageSignal reference;
    const bool has_ref = !s.at("reference").empty();
    if (has_ref) reference = read_pnm(s.at("reference"));
    int h = static_cast<int>(get_int(s, "height"));
    int w = static_cast<int>(get_int(s, "width"));
    const double scale = get_double(s, "scale");
    if (h == 0 && has_ref) h = reference.height;
    if (w == 0 && has_ref) w = reference.width;
    h = static_cast<int>(std::lround(h * scale));
    w = static_cast<int>(std::lround(w * scale));
    if (h < 1 || w < 1) throw ConfigError("render: output size must be positive (set height/width or reference)");
    ensure_dir(out);
    auto go = [&]<typename Real>(Real) {
        const InrModel<Real> model = load_checkpoint<Real>(ckpt);
        const ImageSignal img = render(model, h, w);
        write_pnm(join(out, "render" + image_ext(img.channels)), img);
        char buf[256];
        if (has_ref && reference.same_shape(img)) {
            std::snprintf(buf, sizeof buf, "render: %dx%d psnr=%.17g ssim=%.6f out=%s\n", w, h, psnr(img, reference),
                          (h >= 11 && w >= 11) ? ssim(img, reference) : std::nan(""), out.c_str());
        } else {
            std::snprintf(buf, sizeof buf, "render: %dx%d out=%s\n", w, h, out.c_str());
        }
        os << buf;
        return kOk;
    };
    return precision == 4 ? go(float{}) : go(double{});
}

}  // namespace detail

struct Command {
    std::string name;
    std::string help;
    std::vector<SettingSpec> specs;
    int (*run)(const Settings&, std::ostream&);
};

inline std::vector<Command> commands() {
    return {
        {"fit", "fit an image", training_specs(false), detail::run_fit},
        {"sparse", "reconstruct an image from a random subset of pixels", training_specs(true), detail::run_sparse},
        {"ntk", "empirical tangent-kernel spectrum", ntk_specs(), detail::run_ntk},
        {"filter-curve", "export filter responses over the channel axis", filter_curve_specs(),
         detail::run_filter_curve},
        {"alpha-export", "export the alpha grid of a checkpoint", alpha_export_specs(), detail::run_alpha_export},
        {"render", "render a checkpoint at any resolution", render_specs(), detail::run_render},
    };
}

/// Entry point shared by the executable and the tests. Returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& os = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Adaptive local frequency filtering for Fourier-encoded coordinate networks", "alfilter"};
    app.require_subcommand(1);
    const auto cmds = commands();
    std::map<std::string, std::map<std::string, std::vector<std::string>>> raw;
    std::map<std::string, std::string> config_paths;
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        for (const auto& spec : c.specs) {
            auto* opt = sub->add_option("--" + spec.key, raw[c.name][spec.key],
                                        spec.help + " [default: " + (spec.default_value.empty() ? "none" : spec.default_value) + "]");
            if (spec.multi) {
                opt->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
            } else {
                opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            }
            opt->allow_extra_args(spec.multi);
            opt->type_name("VALUE");
            if (!spec.multi) opt->expected(1);
        }
        sub->add_option("--config", config_paths[c.name], "flat key = value settings file");
        subs.emplace_back(sub, &c);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, os, err);
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, os, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, os, err);
        return kUsage;
    }

    for (const auto& [sub, cmd] : subs) {
        if (!sub->parsed()) continue;
        try {
            Settings flags;
            for (const auto& spec : cmd->specs) {
                const auto& vals = raw[cmd->name][spec.key];
                if (sub->get_option("--" + spec.key)->count() == 0) continue;
                std::string joined;
                for (std::size_t i = 0; i < vals.size(); ++i) joined += (i ? "," : "") + vals[i];
                flags[spec.key] = joined;
            }
            Settings file;
            if (!config_paths[cmd->name].empty()) file = read_config_file(config_paths[cmd->name]);
            const Settings settings = resolve_settings(cmd->specs, file, flags);
            if (!settings.at("out").empty()) {
                detail::ensure_dir(settings.at("out"));
                write_text_file(detail::join(settings.at("out"), "resolved_config.txt"),
                                format_resolved(cmd->name, cmd->specs, settings));
            }
            return cmd->run(settings, os);
        } catch (const ConfigError& e) {
            err << "usage error: " << e.what() << "\n";
            return kUsage;
        } catch (const InputError& e) {
            err << "input error: " << e.what() << "\n";
            return kUsage;
        } catch (const ShapeError& e) {
            err << "input error: " << e.what() << "\n";
            return kUsage;
        } catch (const IndexError& e) {
            err << "input error: " << e.what() << "\n";
            return kUsage;
        } catch (const IoError& e) {
            err << "i/o error: " << e.what() << "\n";
            return kIo;
        } catch (const FormatError& e) {
            err << "format error: " << e.what() << "\n";
            return kIo;
        } catch (const NumericalError& e) {
            err << "numerical error: " << e.what() << "\n";
            return kNumerical;
        } catch (const ResourceError& e) {
            err << "resource error: " << e.what() << "\n";
            return kResource;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kFailure;
        }
    }
    return kUsage;
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}

}  // namespace alf::cli
