// mrp: command-line front end for the mrprior toolbox. Subcommands mirror
// the library: simulation (phantom/coils/mask/sim), reconstruction
// (pics/nlinv), prior training (train-prior), phase augmentation
// (augment-phase), dataset preparation (prep), metrics and recipe-driven
// experiments (run). All randomness is seed-explicit, so identical
// invocations produce byte-identical outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "mrprior/acquisition.hpp"
#include "mrprior/arrayfile.hpp"
#include "mrprior/dataprep.hpp"
#include "mrprior/diffusion.hpp"
#include "mrprior/errors.hpp"
#include "mrprior/experiment.hpp"
#include "mrprior/image_io.hpp"
#include "mrprior/metrics.hpp"
#include "mrprior/nifti.hpp"
#include "mrprior/phase_aug.hpp"
#include "mrprior/recon.hpp"
#include "mrprior/scorenet.hpp"

namespace fs = std::filesystem;
using namespace mri;

namespace {

struct PriorFlags {
    std::string prior = "l2";
    double weight = 0.01;
    int schedule_n = 100;
    double sigma_min = 0.01;
    double sigma_max = 0.3;
    std::string ckpt;
    std::string gauss_params;
    int wavelet_levels = 4;
};

void add_prior_flags(CLI::App* cmd, PriorFlags& flags) {
    cmd->add_option("--prior", flags.prior, "regularizer: l2, l1wav, gauss, diffusion")
        ->check(CLI::IsMember({"l2", "l1wav", "gauss", "diffusion"}));
    cmd->add_option("--prior-weight,--alpha", flags.weight, "regularization weight");
    cmd->add_option("--schedule-N", flags.schedule_n, "noise scales / iteration coupling");
    cmd->add_option("--sigma-min", flags.sigma_min, "smallest noise scale");
    cmd->add_option("--sigma-max", flags.sigma_max, "largest noise scale");
    cmd->add_option("--ckpt", flags.ckpt, "score network checkpoint directory");
    cmd->add_option("--gauss-params", flags.gauss_params,
                    "basename of <>.mean/<>.prec array files for the gauss prior");
    cmd->add_option("--wavelet-levels", flags.wavelet_levels, "Haar decomposition levels");
}

std::unique_ptr<Prior> make_prior(const PriorFlags& flags, int rows, int cols,
                                  int schedule_n_override = 0) {
    const int n = schedule_n_override > 0 ? schedule_n_override : flags.schedule_n;
    if (flags.prior == "l2") return std::make_unique<L2Prior>();
    if (flags.prior == "l1wav") return std::make_unique<L1WaveletPrior>(flags.wavelet_levels);
    if (flags.prior == "gauss") {
        GaussianPriorParams params = flags.gauss_params.empty()
                                         ? smooth_gaussian_params(rows, cols)
                                         : read_gaussian_params(flags.gauss_params);
        return std::make_unique<GaussianPrior>(std::move(params));
    }
    if (flags.ckpt.empty()) throw ConfigError("--prior diffusion requires --ckpt");
    return std::make_unique<DiffusionPrior>(DiffusionPrior::from_checkpoint(
        flags.ckpt, schedule(n, flags.sigma_min, flags.sigma_max)));
}

std::vector<std::string> list_array_bases(const std::string& dir) {
    std::vector<std::string> bases;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".hdr")
            bases.push_back((entry.path().parent_path() / entry.path().stem()).string());
    std::sort(bases.begin(), bases.end());
    if (bases.empty()) throw IoError("no .hdr/.cfl pairs found in " + dir);
    return bases;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale multi-coil MRI simulation, reconstruction and priors"};
    app.require_subcommand(1);

    // ---- mask ----------------------------------------------------------
    auto* mask_cmd = app.add_subcommand("mask", "generate a sampling mask");
    struct {
        int rows = 256, cols = 256;
        std::string kind = "poisson";
        double accel = 8.2;
        int accel2 = 0;
        std::vector<int> calib;
        uint64_t seed = 0;
        std::string out;
    } mask_args;
    mask_cmd->add_option("--rows", mask_args.rows);
    mask_cmd->add_option("--cols", mask_args.cols);
    mask_cmd->add_option("--kind", mask_args.kind)->check(CLI::IsMember({"1d", "2d", "poisson"}));
    mask_cmd->add_option("--accel", mask_args.accel, "acceleration (row factor for 2d)");
    mask_cmd->add_option("--accel2", mask_args.accel2, "column acceleration for 2d");
    mask_cmd->add_option("--calib", mask_args.calib, "calibration extent(s): lines or rows cols")
        ->expected(1, 2);
    mask_cmd->add_option("--seed", mask_args.seed);
    mask_cmd->add_option("--out", mask_args.out)->required();
    mask_cmd->callback([&] {
        const int calib_r = mask_args.calib.empty() ? 0 : mask_args.calib[0];
        const int calib_c = mask_args.calib.size() > 1 ? mask_args.calib[1] : calib_r;
        SamplingMask m;
        if (mask_args.kind == "1d")
            m = make_mask_1d(mask_args.rows, mask_args.cols,
                             static_cast<int>(mask_args.accel), calib_c, mask_args.seed);
        else if (mask_args.kind == "2d")
            m = make_mask_2d(mask_args.rows, mask_args.cols, static_cast<int>(mask_args.accel),
                             mask_args.accel2 > 0 ? mask_args.accel2
                                                  : static_cast<int>(mask_args.accel),
                             calib_r, calib_c);
        else
            m = make_mask_poisson(mask_args.rows, mask_args.cols, mask_args.accel, calib_r,
                                  calib_c, mask_args.seed);
        write_grid(mask_args.out, m.to_grid());
        std::printf("mask %dx%d kept %zu (acceleration %.3f)\n", m.rows, m.cols,
                    m.kept_count(), m.acceleration);
    });

    // ---- phantom -------------------------------------------------------
    auto* phantom_cmd = app.add_subcommand("phantom", "generate a synthetic image");
    struct {
        int rows = 256, cols = 256;
        std::string kind = "shepp-logan";
        std::string phase = "none";
        uint64_t seed = 0;
        std::string out;
    } ph_args;
    phantom_cmd->add_option("--rows", ph_args.rows);
    phantom_cmd->add_option("--cols", ph_args.cols);
    phantom_cmd->add_option("--kind", ph_args.kind)
        ->check(CLI::IsMember({"shepp-logan", "random-ellipses"}));
    phantom_cmd->add_option("--phase", ph_args.phase)
        ->check(CLI::IsMember({"none", "smooth-random"}));
    phantom_cmd->add_option("--seed", ph_args.seed);
    phantom_cmd->add_option("--out", ph_args.out)->required();
    phantom_cmd->callback([&] {
        ComplexGrid img = phantom(ph_args.rows, ph_args.cols, parse_phantom_kind(ph_args.kind),
                                  ph_args.phase == "none" ? PhantomPhase::None
                                                          : PhantomPhase::SmoothRandom,
                                  ph_args.seed);
        write_grid(ph_args.out, img);
    });

    // ---- coils ---------------------------------------------------------
    auto* coils_cmd = app.add_subcommand("coils", "simulate coil sensitivities");
    struct {
        int rows = 256, cols = 256, nc = 8;
        double smoothness = 0.05;
        uint64_t seed = 0;
        std::string out;
    } coil_args;
    coils_cmd->add_option("--rows", coil_args.rows);
    coils_cmd->add_option("--cols", coil_args.cols);
    coils_cmd->add_option("--nc", coil_args.nc);
    coils_cmd->add_option("--smoothness", coil_args.smoothness,
                          "central k-space fraction per axis");
    coils_cmd->add_option("--seed", coil_args.seed);
    coils_cmd->add_option("--out", coil_args.out)->required();
    coils_cmd->callback([&] {
        CoilSet coils = simulate_coils(coil_args.rows, coil_args.cols, coil_args.nc,
                                       coil_args.smoothness, coil_args.seed);
        write_grid_stack(coil_args.out, coils.maps);
    });

    // ---- sim -----------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("sim", "apply the forward model");
    struct {
        std::string image, coils, mask, out;
        double noise_sd = 0.0;
        uint64_t seed = 0;
    } sim_args;
    sim_cmd->add_option("--image", sim_args.image)->required();
    sim_cmd->add_option("--coils", sim_args.coils)->required();
    sim_cmd->add_option("--mask", sim_args.mask)->required();
    sim_cmd->add_option("--noise-sd", sim_args.noise_sd);
    sim_cmd->add_option("--seed", sim_args.seed);
    sim_cmd->add_option("--out", sim_args.out)->required();
    sim_cmd->callback([&] {
        ComplexGrid img = read_grid(sim_args.image);
        CoilSet coils{read_grid_stack(sim_args.coils)};
        SamplingMask mask = SamplingMask::from_grid(read_grid(sim_args.mask));
        write_grid_stack(sim_args.out,
                         forward(img, coils, mask, sim_args.noise_sd, sim_args.seed));
    });

    // ---- pics ----------------------------------------------------------
    auto* pics_cmd = app.add_subcommand("pics", "linear reconstruction with known coils");
    struct {
        std::string ksp, coils, mask, out;
        int iters = 100;
        uint64_t seed = 0;
        std::string solver = "auto";
    } pics_args;
    PriorFlags pics_prior;
    pics_cmd->add_option("--ksp", pics_args.ksp)->required();
    pics_cmd->add_option("--coils", pics_args.coils)->required();
    pics_cmd->add_option("--mask", pics_args.mask)->required();
    pics_cmd->add_option("--iters", pics_args.iters);
    pics_cmd->add_option("--seed", pics_args.seed);
    pics_cmd->add_option("--solver", pics_args.solver, "auto, cg or fista")
        ->check(CLI::IsMember({"auto", "cg", "fista"}));
    pics_cmd->add_option("--out", pics_args.out)->required();
    add_prior_flags(pics_cmd, pics_prior);
    pics_cmd->callback([&] {
        auto ksp = read_grid_stack(pics_args.ksp);
        CoilSet coils{read_grid_stack(pics_args.coils)};
        SamplingMask mask = SamplingMask::from_grid(read_grid(pics_args.mask));
        PicsConfig cfg;
        cfg.iterations = pics_args.iters;
        cfg.seed = pics_args.seed;
        PicsResult res;
        const bool use_cg = pics_args.solver == "cg" ||
                            (pics_args.solver == "auto" && pics_prior.prior == "l2");
        if (use_cg) {
            res = pics_cg(ksp, coils, mask, pics_prior.weight, cfg);
        } else {
            auto prior = make_prior(pics_prior, coils.rows(), coils.cols(), pics_args.iters);
            res = pics_fista(ksp, coils, mask, *prior, pics_prior.weight, cfg);
        }
        for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        write_grid(pics_args.out, res.image);
    });

    // ---- nlinv ---------------------------------------------------------
    auto* nlinv_cmd = app.add_subcommand("nlinv", "joint image/coil reconstruction");
    struct {
        std::string ksp, mask, out, out_coils, out_combined;
        int gn_steps = 10, reg_steps = 4, inner_cg = 30, inner_fista = 10;
        double alpha_min = 1e-4, sobolev_a = 220.0, sobolev_l = 32.0;
        uint64_t seed = 0;
    } nlinv_args;
    PriorFlags nlinv_prior;
    nlinv_cmd->add_option("--ksp", nlinv_args.ksp)->required();
    nlinv_cmd->add_option("--mask", nlinv_args.mask)->required();
    nlinv_cmd->add_option("--gn-steps", nlinv_args.gn_steps, "n, Gauss-Newton steps");
    nlinv_cmd->add_option("--reg-steps", nlinv_args.reg_steps, "r, prior-regularized steps");
    nlinv_cmd->add_option("--inner-cg", nlinv_args.inner_cg);
    nlinv_cmd->add_option("--inner-fista", nlinv_args.inner_fista);
    nlinv_cmd->add_option("--alpha-min", nlinv_args.alpha_min);
    nlinv_cmd->add_option("--sobolev-a", nlinv_args.sobolev_a);
    nlinv_cmd->add_option("--sobolev-l", nlinv_args.sobolev_l);
    nlinv_cmd->add_option("--seed", nlinv_args.seed);
    nlinv_cmd->add_option("--out", nlinv_args.out)->required();
    nlinv_cmd->add_option("--out-coils", nlinv_args.out_coils);
    nlinv_cmd->add_option("--out-combined", nlinv_args.out_combined,
                          "gauge-invariant |x| * RSS(c) magnitude image");
    add_prior_flags(nlinv_cmd, nlinv_prior);
    nlinv_cmd->callback([&] {
        auto ksp = read_grid_stack(nlinv_args.ksp);
        SamplingMask mask = SamplingMask::from_grid(read_grid(nlinv_args.mask));
        NlinvConfig cfg;
        cfg.gn_steps = nlinv_args.gn_steps;
        cfg.reg_steps = nlinv_args.reg_steps;
        cfg.inner_cg = nlinv_args.inner_cg;
        cfg.inner_fista = nlinv_args.inner_fista;
        cfg.alpha_min = nlinv_args.alpha_min;
        cfg.sobolev_a = nlinv_args.sobolev_a;
        cfg.sobolev_l = nlinv_args.sobolev_l;
        cfg.seed = nlinv_args.seed;
        auto prior = make_prior(nlinv_prior, ksp[0].rows(), ksp[0].cols(), cfg.gn_steps);
        NlinvResult res = nlinv(ksp, mask, cfg, *prior);
        for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        write_grid(nlinv_args.out, res.image);
        if (!nlinv_args.out_coils.empty()) write_grid_stack(nlinv_args.out_coils, res.coils.maps);
        if (!nlinv_args.out_combined.empty()) write_grid(nlinv_args.out_combined, res.coil_combined());
    });

    // ---- train-prior ---------------------------------------------------
    auto* train_cmd = app.add_subcommand("train-prior", "train a diffusion score network");
    struct {
        std::string mode = "smld";
        std::string data, out;
        int epochs = 50, batch = 8, width = 32, layers = 6, schedule_n = 10;
        double lr = 1e-3, sigma_min = 0.01, sigma_max = 0.3;
        uint64_t seed = 0;
        bool no_augment = false;
    } train_args;
    train_cmd->add_option("--mode", train_args.mode)->check(CLI::IsMember({"smld", "ddpm"}));
    train_cmd->add_option("--data", train_args.data, "directory of .hdr/.cfl slices")
        ->required();
    train_cmd->add_option("--epochs", train_args.epochs);
    train_cmd->add_option("--batch", train_args.batch);
    train_cmd->add_option("--lr", train_args.lr);
    train_cmd->add_option("--width", train_args.width);
    train_cmd->add_option("--layers", train_args.layers);
    train_cmd->add_option("--schedule-N", train_args.schedule_n);
    train_cmd->add_option("--sigma-min", train_args.sigma_min);
    train_cmd->add_option("--sigma-max", train_args.sigma_max);
    train_cmd->add_option("--seed", train_args.seed);
    train_cmd->add_flag("--no-augment", train_args.no_augment);
    train_cmd->add_option("--out", train_args.out, "checkpoint directory")->required();
    train_cmd->callback([&] {
        std::vector<ComplexGrid> dataset;
        for (const auto& base : list_array_bases(train_args.data)) {
            auto stack = read_grid_stack(base);
            dataset.insert(dataset.end(), stack.begin(), stack.end());
        }
        TrainConfig cfg;
        cfg.mode = parse_train_mode(train_args.mode);
        cfg.epochs = train_args.epochs;
        cfg.batch = train_args.batch;
        cfg.learn_rate = train_args.lr;
        cfg.seed = train_args.seed;
        cfg.sched = schedule(train_args.schedule_n, train_args.sigma_min, train_args.sigma_max);
        cfg.augment = !train_args.no_augment;
        cfg.width = train_args.width;
        cfg.layers = train_args.layers;
        TrainStats stats;
        ScoreNet<float> net = train_scorenet(dataset, cfg, &stats);
        save_checkpoint(train_args.out, net);
        std::printf("trained %zu samples, %d epochs: loss %.4f -> %.4f (smoothed %.4f)\n",
                    dataset.size(), cfg.epochs, stats.epoch_loss.front(),
                    stats.epoch_loss.back(), stats.smoothed_loss.back());
    });

    // ---- augment-phase --------------------------------------------------
    auto* aug_cmd = app.add_subcommand("augment-phase",
                                       "complex images from magnitude-only inputs");
    struct {
        std::vector<std::string> inputs;
        std::string prior = "gauss";
        std::string gauss_params, ckpt, out;
        int samples = 5, steps = 40, schedule_n = 30;
        double eps = 8000.0, gamma = 0.05, sigma_min = 0.01, sigma_max = 0.3;
        uint64_t seed = 0;
    } aug_args;
    aug_cmd->add_option("--in", aug_args.inputs, "magnitude array-file basenames")->required();
    aug_cmd->add_option("--prior", aug_args.prior, "gauss or diffusion");
    aug_cmd->add_option("--gauss-params", aug_args.gauss_params);
    aug_cmd->add_option("--ckpt", aug_args.ckpt);
    aug_cmd->add_option("--samples", aug_args.samples);
    aug_cmd->add_option("--eps", aug_args.eps);
    aug_cmd->add_option("--gamma", aug_args.gamma);
    aug_cmd->add_option("--steps-per-level", aug_args.steps);
    aug_cmd->add_option("--schedule-N", aug_args.schedule_n);
    aug_cmd->add_option("--sigma-min", aug_args.sigma_min);
    aug_cmd->add_option("--sigma-max", aug_args.sigma_max);
    aug_cmd->add_option("--seed", aug_args.seed);
    aug_cmd->add_option("--out", aug_args.out, "output directory")->required();
    aug_cmd->callback([&] {
        fs::create_directories(aug_args.out);
        AugmentConfig cfg;
        cfg.epsilon = aug_args.eps;
        cfg.gamma = aug_args.gamma;
        cfg.steps_per_level = aug_args.steps;
        cfg.samples_per_image = aug_args.samples;
        cfg.seed = aug_args.seed;
        cfg.sched = schedule(aug_args.schedule_n, aug_args.sigma_min, aug_args.sigma_max);
        for (const auto& input : aug_args.inputs) {
            ComplexGrid mag = read_grid(input);
            std::unique_ptr<Prior> prior;
            if (aug_args.prior == "gauss") {
                GaussianPriorParams params =
                    aug_args.gauss_params.empty()
                        ? [&] {
                              auto p = smooth_gaussian_params(mag.rows(), mag.cols(), 1.0, 1e4);
                              p.mean = ComplexGrid(mag.rows(), mag.cols(), cdouble(0.5, 0.0));
                              return p;
                          }()
                        : read_gaussian_params(aug_args.gauss_params);
                prior = std::make_unique<GaussianPrior>(std::move(params), cfg.sched);
            } else {
                if (aug_args.ckpt.empty())
                    throw ConfigError("--prior diffusion requires --ckpt");
                prior = std::make_unique<DiffusionPrior>(
                    DiffusionPrior::from_checkpoint(aug_args.ckpt, cfg.sched));
            }
            auto samples = augment(mag, *prior, cfg);
            const std::string stem = fs::path(input).stem().string();
            for (size_t j = 0; j < samples.size(); ++j)
                write_grid((fs::path(aug_args.out) / (stem + "_aug" + std::to_string(j))).string(),
                           samples[j]);
        }
    });

    // ---- prep ----------------------------------------------------------
    auto* prep_cmd = app.add_subcommand("prep", "NIfTI volumes to normalized slices");
    struct {
        std::vector<std::string> inputs;
        std::string out, corner = "tl";
        double noise_mean = 0.003, noise_sd = 5.0;
        int target = 256;
        uint64_t seed = 0;
    } prep_args;
    prep_cmd->add_option("--in", prep_args.inputs, "NIfTI files")->required();
    prep_cmd->add_option("--out", prep_args.out, "output directory")->required();
    prep_cmd->add_option("--noise-mean", prep_args.noise_mean);
    prep_cmd->add_option("--noise-sd", prep_args.noise_sd);
    prep_cmd->add_option("--target", prep_args.target, "conformed slice size");
    prep_cmd->add_option("--corner", prep_args.corner)
        ->check(CLI::IsMember({"tl", "tr", "bl", "br"}));
    prep_cmd->add_option("--seed", prep_args.seed);
    prep_cmd->callback([&] {
        fs::create_directories(prep_args.out);
        std::ofstream manifest(fs::path(prep_args.out) / "manifest.txt");
        manifest << "# volume slice kept mean sd output\n";
        const Corner corner = parse_corner(prep_args.corner);
        for (const auto& input : prep_args.inputs) {
            Volume vol = read_nifti(input);
            auto slices = conform_slices(vol, prep_args.target);
            const std::string stem = fs::path(input).stem().string();
            for (size_t z = 0; z < slices.size(); ++z) {
                const uint64_t slice_seed =
                    prep_args.seed + 1000003ULL * z + std::hash<std::string>{}(stem);
                if (!prep_slice(slices[z], prep_args.noise_mean, prep_args.noise_sd,
                                slice_seed)) {
                    manifest << stem << " " << z << " excluded-empty 0 0 -\n";
                    continue;
                }
                PatchStats stats = exclusion_check(slices[z], corner);
                char line[256];
                if (stats.exclude) {
                    std::snprintf(line, sizeof(line), "%s %zu excluded %.6f %.6f -", stem.c_str(),
                                  z, stats.mean, stats.sd);
                    manifest << line << "\n";
                    continue;
                }
                const std::string base =
                    (fs::path(prep_args.out) / (stem + "_slice" + std::to_string(z))).string();
                write_grid(base, slices[z]);
                std::snprintf(line, sizeof(line), "%s %zu kept %.6f %.6f %s", stem.c_str(), z,
                              stats.mean, stats.sd, base.c_str());
                manifest << line << "\n";
            }
        }
    });

    // ---- metrics ---------------------------------------------------------
    auto* metrics_cmd = app.add_subcommand("metrics", "PSNR/SSIM between two images");
    struct {
        std::string ref, test;
    } metrics_args;
    metrics_cmd->add_option("--ref", metrics_args.ref)->required();
    metrics_cmd->add_option("--test", metrics_args.test)->required();
    metrics_cmd->callback([&] {
        ComplexGrid ref = read_grid(metrics_args.ref);
        ComplexGrid test = read_grid(metrics_args.test);
        std::printf("psnr_db %.6f\nssim %.6f\n", psnr(ref, test), ssim(ref, test));
    });

    // ---- render ----------------------------------------------------------
    auto* render_cmd = app.add_subcommand("render", "PNG magnitude/phase of an array file");
    struct {
        std::string in, out;
    } render_args;
    render_cmd->add_option("--in", render_args.in)->required();
    render_cmd->add_option("--out", render_args.out, "output PNG basename")->required();
    render_cmd->callback([&] {
        ComplexGrid g = read_grid(render_args.in);
        write_png_magnitude(render_args.out + "_mag.png", g);
        write_png_phase(render_args.out + "_phase.png", g);
    });

    // ---- run -------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "execute an experiment recipe");
    struct {
        std::string recipe, out;
        uint64_t seed = 0;
    } run_args;
    run_cmd->add_option("--recipe", run_args.recipe)->required();
    run_cmd->add_option("--out", run_args.out)->required();
    run_cmd->add_option("--seed", run_args.seed);
    run_cmd->callback([&] {
        auto report = run_experiment(Recipe::parse_file(run_args.recipe), run_args.out,
                                     run_args.seed);
        std::printf("wrote %s (%zu rows)\n", report.csv_path.c_str(), report.rows.size());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
