#include "mrprior/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "mrprior/acquisition.hpp"
#include "mrprior/arrayfile.hpp"
#include "mrprior/diffusion.hpp"
#include "mrprior/errors.hpp"
#include "mrprior/image_io.hpp"
#include "mrprior/metrics.hpp"
#include "mrprior/recon.hpp"

namespace mri {

namespace fs = std::filesystem;

Recipe Recipe::parse_text(const std::string& text) {
    Recipe r;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("recipe: expected key = value, got '" + line + "'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw FormatError("recipe: empty key in '" + line + "'");
        r.values[section.empty() ? key : section + "." + key].push_back(value);
    }
    return r;
}

Recipe Recipe::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open recipe: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

std::string Recipe::get(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    if (it == values.end() || it->second.empty()) return fallback;
    return it->second.back();
}

double Recipe::get_num(const std::string& key, double fallback) const {
    const std::string s = get(key);
    if (s.empty()) return fallback;
    return std::stod(s);
}

std::vector<std::string> Recipe::get_all(const std::string& key) const {
    auto it = values.find(key);
    return it == values.end() ? std::vector<std::string>{} : it->second;
}

namespace {

// "name opt1=v1 opt2=v2" -> (name, options)
struct MethodSpec {
    std::string name;
    std::map<std::string, std::string> opts;

    std::string opt(const std::string& key, const std::string& fallback = "") const {
        auto it = opts.find(key);
        return it == opts.end() ? fallback : it->second;
    }
    double opt_num(const std::string& key, double fallback) const {
        auto it = opts.find(key);
        return it == opts.end() ? fallback : std::stod(it->second);
    }
};

MethodSpec parse_method(const std::string& text) {
    MethodSpec spec;
    std::istringstream in(text);
    in >> spec.name;
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw FormatError("recipe method option must be key=value: '" + token + "'");
        spec.opts[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return spec;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

std::string slug(double accel) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", accel);
    std::string s = buf;
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

struct Stage {
    const char* name;
    std::function<void()> body;
};

} // namespace

ExperimentReport run_experiment(const Recipe& recipe, const std::string& out_dir,
                                uint64_t seed) {
    fs::create_directories(out_dir);
    ExperimentReport report;

    auto run_stage = [](const char* stage, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("experiment stage '") + stage +
                                     "' failed: " + e.what());
        }
    };

    // --- data ---------------------------------------------------------
    std::vector<ComplexGrid> truths;
    int size = 0;
    run_stage("data", [&] {
        size = static_cast<int>(recipe.get_num("data.size", 64));
        const int slices = static_cast<int>(recipe.get_num("data.slices", 1));
        const uint64_t data_seed =
            static_cast<uint64_t>(recipe.get_num("data.seed", 1.0)) + seed;
        const std::string kind = recipe.get("data.kind", "phantom");
        if (kind == "phantom") {
            const PhantomKind pk =
                parse_phantom_kind(recipe.get("data.phantom", "random-ellipses"));
            const PhantomPhase ph = recipe.get("data.phase", "smooth-random") == "none"
                                        ? PhantomPhase::None
                                        : PhantomPhase::SmoothRandom;
            for (int s = 0; s < slices; ++s)
                truths.push_back(phantom(size, size, pk, ph, data_seed + static_cast<uint64_t>(s)));
        } else if (kind == "files") {
            for (const auto& base : recipe.get_all("data.file")) {
                auto stack = read_grid_stack(base);
                truths.insert(truths.end(), stack.begin(), stack.end());
            }
            if (truths.empty()) throw ConfigError("no data.file entries in recipe");
            size = truths[0].rows();
        } else {
            throw ConfigError("unknown data.kind: " + kind);
        }
    });

    // --- coils --------------------------------------------------------
    CoilSet coils;
    run_stage("coils", [&] {
        const int nc = static_cast<int>(recipe.get_num("coils.nc", 8));
        const double smooth = recipe.get_num("coils.smoothness", 0.15);
        const uint64_t coil_seed =
            static_cast<uint64_t>(recipe.get_num("coils.seed", 2.0)) + seed;
        coils = simulate_coils(size, size, nc, smooth, coil_seed);
    });

    const auto accels = parse_list(recipe.get("mask.accel", "4"));
    if (accels.empty()) throw ConfigError("recipe: mask.accel list is empty");
    const auto method_lines = recipe.get_all("methods.method");
    if (method_lines.empty()) throw ConfigError("recipe: no methods.method entries");

    std::ofstream csv(fs::path(out_dir) / "metrics.csv");
    csv << "method,accel,slice,psnr_db,ssim\n";

    for (const double accel : accels) {
        SamplingMask mask;
        run_stage("mask", [&] {
            const std::string kind = recipe.get("mask.kind", "poisson");
            const auto calib = parse_list(recipe.get("mask.calib", "12 12"));
            const int calib_r = calib.empty() ? 0 : static_cast<int>(calib[0]);
            const int calib_c = calib.size() > 1 ? static_cast<int>(calib[1]) : calib_r;
            const uint64_t mask_seed =
                static_cast<uint64_t>(recipe.get_num("mask.seed", 3.0)) + seed;
            if (kind == "poisson")
                mask = make_mask_poisson(size, size, accel, calib_r, calib_c, mask_seed);
            else if (kind == "1d")
                mask = make_mask_1d(size, size, static_cast<int>(accel), calib_c, mask_seed);
            else if (kind == "2d")
                mask = make_mask_2d(size, size, static_cast<int>(std::sqrt(accel)),
                                    static_cast<int>(accel / std::sqrt(accel)), calib_r,
                                    calib_c);
            else
                throw ConfigError("unknown mask.kind: " + kind);
        });

        for (size_t slice = 0; slice < truths.size(); ++slice) {
            std::vector<ComplexGrid> ksp;
            run_stage("simulate", [&] {
                const double noise_sd = recipe.get_num("sim.noise-sd", 0.0);
                const uint64_t sim_seed =
                    static_cast<uint64_t>(recipe.get_num("sim.seed", 4.0)) + seed +
                    static_cast<uint64_t>(slice);
                ksp = forward(truths[slice], coils, mask, noise_sd, sim_seed);
            });

            ComplexGrid truth_mag(size, size);
            for (size_t i = 0; i < truth_mag.size(); ++i)
                truth_mag[i] = std::abs(truths[slice][i]);

            for (const auto& line : method_lines) {
                const MethodSpec spec = parse_method(line);
                ComplexGrid recon_img;
                ComplexGrid compare_img;
                run_stage(spec.name.c_str(), [&] {
                    PicsConfig pcfg;
                    pcfg.iterations = static_cast<int>(spec.opt_num("iters", 100));
                    pcfg.seed = seed;
                    const double alpha = spec.opt_num("alpha", 0.01);
                    const int sched_n =
                        static_cast<int>(spec.opt_num("schedule-n", pcfg.iterations));
                    const double smin = spec.opt_num("sigma-min", 0.01);
                    const double smax = spec.opt_num("sigma-max", 0.3);

                    auto make_prior = [&](const std::string& which) -> std::unique_ptr<Prior> {
                        if (which == "l2") return std::make_unique<L2Prior>();
                        if (which == "l1wav")
                            return std::make_unique<L1WaveletPrior>(
                                static_cast<int>(spec.opt_num("levels", 4)));
                        if (which == "gauss") {
                            const std::string params_base = spec.opt("gauss-params");
                            GaussianPriorParams params =
                                params_base.empty()
                                    ? smooth_gaussian_params(size, size)
                                    : read_gaussian_params(params_base);
                            return std::make_unique<GaussianPrior>(std::move(params));
                        }
                        if (which == "diffusion") {
                            const std::string ckpt = spec.opt("ckpt");
                            if (ckpt.empty())
                                throw ConfigError("diffusion method needs ckpt=<dir>");
                            return std::make_unique<DiffusionPrior>(
                                DiffusionPrior::from_checkpoint(
                                    ckpt, schedule(sched_n, smin, smax)));
                        }
                        throw ConfigError("unknown prior: " + which);
                    };

                    if (spec.name == "zero-filled") {
                        recon_img = adjoint(ksp, coils, mask);
                        compare_img = recon_img;
                    } else if (spec.name.rfind("pics-", 0) == 0) {
                        const std::string which = spec.name.substr(5);
                        if (which == "l2" && spec.opt("solver", "cg") == "cg") {
                            recon_img = pics_cg(ksp, coils, mask, alpha, pcfg).image;
                        } else {
                            auto prior = make_prior(which);
                            recon_img =
                                pics_fista(ksp, coils, mask, *prior, alpha, pcfg).image;
                        }
                        compare_img = recon_img;
                    } else if (spec.name.rfind("nlinv-", 0) == 0) {
                        const std::string which = spec.name.substr(6);
                        NlinvConfig ncfg;
                        ncfg.gn_steps = static_cast<int>(spec.opt_num("gn", 10));
                        ncfg.reg_steps = static_cast<int>(spec.opt_num("reg", 4));
                        ncfg.seed = seed;
                        // diffusion levels advance with Gauss-Newton steps
                        std::unique_ptr<Prior> prior;
                        if (which == "diffusion") {
                            const std::string ckpt = spec.opt("ckpt");
                            if (ckpt.empty())
                                throw ConfigError("diffusion method needs ckpt=<dir>");
                            prior = std::make_unique<DiffusionPrior>(
                                DiffusionPrior::from_checkpoint(
                                    ckpt, schedule(ncfg.gn_steps, smin, smax)));
                        } else {
                            prior = make_prior(which);
                        }
                        auto res = nlinv(ksp, mask, ncfg, *prior);
                        recon_img = res.image;
                        compare_img = res.coil_combined();
                    } else {
                        throw ConfigError("unknown method: " + spec.name);
                    }
                });

                MetricsRow row;
                row.method = spec.name;
                row.accel = accel;
                row.slice = static_cast<int>(slice);
                row.psnr_db = psnr(truth_mag, compare_img);
                row.ssim = ssim(truth_mag, compare_img);
                report.rows.push_back(row);

                char buf[256];
                std::snprintf(buf, sizeof(buf), "%s,%g,%d,%.6f,%.6f", row.method.c_str(),
                              row.accel, row.slice, row.psnr_db, row.ssim);
                csv << buf << "\n";

                const std::string stem = spec.name + "_accel" + slug(accel) + "_slice" +
                                         std::to_string(slice);
                const std::string base = (fs::path(out_dir) / stem).string();
                write_grid(base, recon_img);
                write_png_magnitude(base + "_mag.png", recon_img);
                write_png_phase(base + "_phase.png", recon_img);
            }
        }
    }
    csv.flush();
    if (!csv) throw IoError("failed writing metrics.csv in " + out_dir);

    // human-readable table
    std::ofstream table(fs::path(out_dir) / "metrics.txt");
    table << "method            accel  slice  psnr_db    ssim\n";
    for (const auto& row : report.rows) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-17s %5g  %5d  %8.3f  %7.4f", row.method.c_str(),
                      row.accel, row.slice, row.psnr_db, row.ssim);
        table << buf << "\n";
    }

    report.csv_path = (fs::path(out_dir) / "metrics.csv").string();
    report.table_path = (fs::path(out_dir) / "metrics.txt").string();
    return report;
}

} // namespace mri
