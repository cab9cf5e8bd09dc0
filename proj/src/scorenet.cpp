#include "mrprior/scorenet.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrprior/arrayfile.hpp"
#include "mrprior/errors.hpp"
#include "mrprior/random.hpp"

namespace mri {

TrainMode parse_train_mode(const std::string& name) {
    if (name == "smld") return TrainMode::Smld;
    if (name == "ddpm") return TrainMode::Ddpm;
    throw ArgumentError("unknown training mode: " + name);
}

const char* train_mode_name(TrainMode mode) {
    return mode == TrainMode::Smld ? "smld" : "ddpm";
}

namespace {

template <typename T>
T silu(T x) {
    const T s = T(1) / (T(1) + std::exp(-x));
    return x * s;
}

template <typename T>
T silu_deriv(T x) {
    const T s = T(1) / (T(1) + std::exp(-x));
    return s * (T(1) + x * (T(1) - s));
}

// out[co] += sum_ci conv3x3(in[ci], w[co][ci]). One pass per row triple:
// nine fused multiply-adds per interior pixel, borders handled from a
// shared zero row.
template <typename T>
void conv3x3_accumulate(const T* __restrict__ ip, const T* __restrict__ wk, int h, int wd,
                        const T* __restrict__ zero_row, T* __restrict__ op) {
    const T w00 = wk[0], w01 = wk[1], w02 = wk[2];
    const T w10 = wk[3], w11 = wk[4], w12 = wk[5];
    const T w20 = wk[6], w21 = wk[7], w22 = wk[8];
    for (int y = 0; y < h; ++y) {
        const T* __restrict__ rm = y > 0 ? ip + static_cast<size_t>(y - 1) * wd : zero_row;
        const T* __restrict__ r0 = ip + static_cast<size_t>(y) * wd;
        const T* __restrict__ rp = y < h - 1 ? ip + static_cast<size_t>(y + 1) * wd : zero_row;
        T* __restrict__ orow = op + static_cast<size_t>(y) * wd;
        for (int x = 1; x + 1 < wd; ++x) {
            orow[x] += w00 * rm[x - 1] + w01 * rm[x] + w02 * rm[x + 1] + w10 * r0[x - 1] +
                       w11 * r0[x] + w12 * r0[x + 1] + w20 * rp[x - 1] + w21 * rp[x] +
                       w22 * rp[x + 1];
        }
        orow[0] += w01 * rm[0] + w02 * rm[1] + w11 * r0[0] + w12 * r0[1] + w21 * rp[0] +
                   w22 * rp[1];
        if (wd > 1) {
            const int x = wd - 1;
            orow[x] += w00 * rm[x - 1] + w01 * rm[x] + w10 * r0[x - 1] + w11 * r0[x] +
                       w20 * rp[x - 1] + w21 * rp[x];
        }
    }
}

template <typename T>
void conv3x3_forward(const FeatureMap<T>& in, const T* w, const T* b, FeatureMap<T>& out) {
    const int h = in.h, wd = in.w, cin = in.channels, cout = out.channels;
    const std::vector<T> zero_row(static_cast<size_t>(wd), T(0));
    for (int co = 0; co < cout; ++co) {
        T* op = out.plane(co);
        std::fill(op, op + static_cast<size_t>(h) * wd, b[co]);
        for (int ci = 0; ci < cin; ++ci)
            conv3x3_accumulate(in.plane(ci), w + (static_cast<size_t>(co) * cin + ci) * 9, h,
                               wd, zero_row.data(), op);
    }
}

// Gradients of the same convolution: accumulate dL/dw, dL/db (scaled) and
// optionally dL/din. Weight gradients run one row-pass per kernel row with
// three lane accumulators; the input gradient is a convolution with the
// flipped kernel, reusing the forward row-triple kernel.
template <typename T>
void conv3x3_backward(const FeatureMap<T>& in, const T* w, const FeatureMap<T>& gout,
                      double* gw, double* gb, FeatureMap<T>* gin, double scale) {
    const int h = in.h, wd = in.w, cin = in.channels, cout = gout.channels;
    const std::vector<T> zero_row(static_cast<size_t>(wd), T(0));
    for (int co = 0; co < cout; ++co) {
        const T* gp = gout.plane(co);
        double acc_b = 0.0;
        for (size_t i = 0; i < static_cast<size_t>(h) * wd; ++i)
            acc_b += static_cast<double>(gp[i]);
        gb[co] += scale * acc_b;
        for (int ci = 0; ci < cin; ++ci) {
            const T* ip = in.plane(ci);
            double* gwk = gw + (static_cast<size_t>(co) * cin + ci) * 9;
            for (int dy = -1; dy <= 1; ++dy) {
                T acc_m = T(0), acc_0 = T(0), acc_p = T(0);
                for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
                    const T* __restrict__ grow = gp + static_cast<size_t>(y) * wd;
                    const T* __restrict__ irow = ip + static_cast<size_t>(y + dy) * wd;
                    T lane_m = T(0), lane_0 = T(0), lane_p = T(0);
                    for (int x = 1; x + 1 < wd; ++x) {
                        lane_m += grow[x] * irow[x - 1];
                        lane_0 += grow[x] * irow[x];
                        lane_p += grow[x] * irow[x + 1];
                    }
                    lane_0 += grow[0] * irow[0];
                    lane_p += grow[0] * irow[1];
                    if (wd > 1) {
                        lane_m += grow[wd - 1] * irow[wd - 2];
                        lane_0 += grow[wd - 1] * irow[wd - 1];
                    }
                    acc_m += lane_m;
                    acc_0 += lane_0;
                    acc_p += lane_p;
                }
                gwk[(dy + 1) * 3 + 0] += scale * static_cast<double>(acc_m);
                gwk[(dy + 1) * 3 + 1] += scale * static_cast<double>(acc_0);
                gwk[(dy + 1) * 3 + 2] += scale * static_cast<double>(acc_p);
            }
            if (gin) {
                const T* wk = w + (static_cast<size_t>(co) * cin + ci) * 9;
                T flipped[9];
                for (int k = 0; k < 9; ++k) flipped[k] = wk[8 - k];
                conv3x3_accumulate(gp, flipped, h, wd, zero_row.data(), gin->plane(ci));
            }
        }
    }
}

} // namespace

template <typename T>
ScoreNet<T>::ScoreNet(ScoreNetConfig cfg, uint64_t init_seed) : cfg_(std::move(cfg)) {
    if (cfg_.layers < 2) throw ArgumentError("ScoreNet: need at least 2 layers");
    if (cfg_.width < 1) throw ArgumentError("ScoreNet: width must be >= 1");
    if (cfg_.sched.n_scales < 1) throw ArgumentError("ScoreNet: schedule missing");

    RandomStream rng(init_seed, 0x73636f7265ULL);
    for (int layer = 0; layer < cfg_.layers; ++layer) {
        const int cin = in_channels(layer), cout = out_channels(layer);
        Tensor<T> w;
        w.name = "conv" + std::to_string(layer) + ".weight";
        w.dims = {cout, cin, 3, 3};
        w.v.resize(static_cast<size_t>(cout) * cin * 9);
        // He-style fan-in scaling; final layer damped so the initial output
        // is near zero and the first loss sits at the noise floor
        const double sd = (layer == cfg_.layers - 1 ? 0.01 : 1.0) / std::sqrt(9.0 * cin);
        for (auto& x : w.v) x = static_cast<T>(sd * rng.gaussian());
        params_.push_back(std::move(w));

        Tensor<T> b;
        b.name = "conv" + std::to_string(layer) + ".bias";
        b.dims = {cout};
        b.v.assign(static_cast<size_t>(cout), T(0));
        params_.push_back(std::move(b));
    }
    Tensor<T> e;
    e.name = "embed";
    e.dims = {cfg_.sched.n_scales + 1, cfg_.width};
    e.v.assign(static_cast<size_t>(cfg_.sched.n_scales + 1) * cfg_.width, T(0));
    params_.push_back(std::move(e));

    // per-level multiplicative output conditioning; the additive bias alone
    // cannot express how the optimal denoiser's gain moves with sigma
    Tensor<T> g;
    g.name = "gain";
    g.dims = {cfg_.sched.n_scales + 1};
    g.v.assign(static_cast<size_t>(cfg_.sched.n_scales) + 1, T(1));
    params_.push_back(std::move(g));

    // residual prediction: learned per-level passthrough from input to
    // output, so the conv stack only models the correction
    Tensor<T> sk;
    sk.name = "skip";
    sk.dims = {cfg_.sched.n_scales + 1};
    sk.v.assign(static_cast<size_t>(cfg_.sched.n_scales) + 1, T(0));
    params_.push_back(std::move(sk));
}

template <typename T>
FeatureMap<T> ScoreNet<T>::to_channels(const ComplexGrid& g) {
    FeatureMap<T> f(2, g.rows(), g.cols());
    for (int y = 0; y < g.rows(); ++y)
        for (int x = 0; x < g.cols(); ++x) {
            f.at(0, y, x) = static_cast<T>(g(y, x).real());
            f.at(1, y, x) = static_cast<T>(g(y, x).imag());
        }
    return f;
}

template <typename T>
ComplexGrid ScoreNet<T>::to_grid(const FeatureMap<T>& f) {
    ComplexGrid g(f.h, f.w);
    for (int y = 0; y < f.h; ++y)
        for (int x = 0; x < f.w; ++x)
            g(y, x) = cdouble(static_cast<double>(f.at(0, y, x)),
                              static_cast<double>(f.at(1, y, x)));
    return g;
}

template <typename T>
FeatureMap<T> ScoreNet<T>::forward_cached(const FeatureMap<T>& input, int level,
                                          Cache& cache) const {
    if (input.channels != 2) throw ArgumentError("ScoreNet: input must have 2 channels");
    if (level < 0 || level > cfg_.sched.n_scales)
        throw ArgumentError("ScoreNet: level out of range");

    cache.level = level;
    cache.input = input;
    cache.pre.assign(static_cast<size_t>(cfg_.layers), FeatureMap<T>());
    cache.post.assign(static_cast<size_t>(cfg_.layers), FeatureMap<T>());

    const FeatureMap<T>* cur = &input;
    for (int layer = 0; layer < cfg_.layers; ++layer) {
        FeatureMap<T> z(out_channels(layer), input.h, input.w);
        conv3x3_forward(*cur, weight(layer).v.data(), bias(layer).v.data(), z);
        if (layer == 0) {
            const T* emb = embed().v.data() + static_cast<size_t>(level) * cfg_.width;
            for (int c = 0; c < cfg_.width; ++c) {
                T* p = z.plane(c);
                for (size_t i = 0; i < static_cast<size_t>(z.h) * z.w; ++i) p[i] += emb[c];
            }
        }
        cache.pre[static_cast<size_t>(layer)] = z;
        if (layer < cfg_.layers - 1) {
            for (auto& x : z.v) x = silu(x);
        } else {
            const T g = gain().v[static_cast<size_t>(level)];
            const T s = skip().v[static_cast<size_t>(level)];
            for (size_t i = 0; i < z.v.size(); ++i) z.v[i] = g * z.v[i] + s * input.v[i];
        }
        cache.post[static_cast<size_t>(layer)] = std::move(z);
        cur = &cache.post[static_cast<size_t>(layer)];
    }
    return cache.post.back();
}

template <typename T>
FeatureMap<T> ScoreNet<T>::forward(const FeatureMap<T>& input, int level) const {
    Cache cache;
    return forward_cached(input, level, cache);
}

template <typename T>
std::vector<Tensor<double>> ScoreNet<T>::zero_grads() const {
    std::vector<Tensor<double>> grads;
    grads.reserve(params_.size());
    for (const auto& p : params_) {
        Tensor<double> g;
        g.name = p.name;
        g.dims = p.dims;
        g.v.assign(p.v.size(), 0.0);
        grads.push_back(std::move(g));
    }
    return grads;
}

template <typename T>
void ScoreNet<T>::backward(const Cache& cache, const FeatureMap<T>& dout,
                           std::vector<Tensor<double>>& grads, double scale) const {
    FeatureMap<T> g = dout;
    {
        // through the per-level output gain and input skip
        const auto& pre_out = cache.pre.back();
        const T gv = gain().v[static_cast<size_t>(cache.level)];
        double acc_gain = 0.0, acc_skip = 0.0;
        for (size_t i = 0; i < g.v.size(); ++i) {
            acc_gain += static_cast<double>(g.v[i]) * pre_out.v[i];
            acc_skip += static_cast<double>(g.v[i]) * cache.input.v[i];
        }
        grads[grads.size() - 2].v[static_cast<size_t>(cache.level)] += scale * acc_gain;
        grads.back().v[static_cast<size_t>(cache.level)] += scale * acc_skip;
        for (auto& x : g.v) x *= gv;
    }
    for (int layer = cfg_.layers - 1; layer >= 0; --layer) {
        if (layer < cfg_.layers - 1) {
            const auto& pre = cache.pre[static_cast<size_t>(layer)];
            for (size_t i = 0; i < g.v.size(); ++i) g.v[i] *= silu_deriv(pre.v[i]);
        }
        if (layer == 0) {
            double* ge = grads[grads.size() - 3].v.data() +
                         static_cast<size_t>(cache.level) * cfg_.width;
            for (int c = 0; c < cfg_.width; ++c) {
                const T* p = g.plane(c);
                double acc = 0.0;
                for (size_t i = 0; i < static_cast<size_t>(g.h) * g.w; ++i)
                    acc += static_cast<double>(p[i]);
                ge[c] += scale * acc;
            }
        }
        const FeatureMap<T>& in =
            layer == 0 ? cache.input : cache.post[static_cast<size_t>(layer) - 1];
        FeatureMap<T> gin;
        FeatureMap<T>* gin_ptr = nullptr;
        if (layer > 0) {
            gin = FeatureMap<T>(in.channels, in.h, in.w);
            gin_ptr = &gin;
        }
        conv3x3_backward(in, weight(layer).v.data(), g,
                         grads[2 * static_cast<size_t>(layer)].v.data(),
                         grads[2 * static_cast<size_t>(layer) + 1].v.data(), gin_ptr, scale);
        if (layer > 0) g = std::move(gin);
    }
}

template <typename T>
double dsm_loss(const ScoreNet<T>& net, const std::vector<ComplexGrid>& batch,
                const NoiseSchedule& sched, uint64_t seed, std::vector<Tensor<double>>* grads) {
    if (batch.empty()) throw ArgumentError("dsm_loss: empty batch");
    for (const auto& g : batch)
        if (g.max_abs() > 1.0 + 1e-6)
            throw ArgumentError("dsm_loss: batch grids must be normalized to max magnitude 1");

    RandomStream rng(seed, 0x64736dULL);
    const bool ddpm = net.config().mode == TrainMode::Ddpm;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    // Samples are independent; per-thread gradient buffers are reduced in
    // thread order afterwards, so results are reproducible for any fixed
    // worker count (and exactly specified at one worker).
    int n_threads = 1;
#ifdef _OPENMP
    n_threads = std::min<int>(omp_get_max_threads(), static_cast<int>(batch.size()));
#endif
    std::vector<std::vector<Tensor<double>>> grad_parts;
    if (grads)
        for (int t = 0; t < n_threads; ++t) grad_parts.push_back(net.zero_grads());
    std::vector<double> loss_parts(static_cast<size_t>(n_threads), 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads)
#endif
    for (size_t s = 0; s < batch.size(); ++s) {
        int tid = 0;
#ifdef _OPENMP
        tid = omp_get_thread_num();
#endif
        RandomStream draw = rng.fork(s);
        const int level = 1 + static_cast<int>(draw.uniform_index(
                                  static_cast<uint64_t>(sched.n_scales)));
        const double sigma = sched.sigma(level);
        const ComplexGrid& x0 = batch[s];

        FeatureMap<T> input(2, x0.rows(), x0.cols());
        FeatureMap<T> target(2, x0.rows(), x0.cols());
        for (int y = 0; y < x0.rows(); ++y)
            for (int x = 0; x < x0.cols(); ++x) {
                const cdouble z = draw.complex_gaussian();
                const cdouble xi = x0(y, x) + sigma * z;
                input.at(0, y, x) = static_cast<T>(xi.real());
                input.at(1, y, x) = static_cast<T>(xi.imag());
                // raw network target: -z under SMLD (score scaling), +z
                // under the DDPM epsilon parameterization
                const cdouble t = ddpm ? z : -z;
                target.at(0, y, x) = static_cast<T>(t.real());
                target.at(1, y, x) = static_cast<T>(t.imag());
            }

        typename ScoreNet<T>::Cache cache;
        FeatureMap<T> out = grads ? net.forward_cached(input, level, cache)
                                  : net.forward(input, level);

        FeatureMap<T> residual(2, x0.rows(), x0.cols());
        double sample_loss = 0.0;
        for (size_t i = 0; i < out.v.size(); ++i) {
            const double r = static_cast<double>(out.v[i]) - static_cast<double>(target.v[i]);
            residual.v[i] = static_cast<T>(2.0 * r);
            sample_loss += r * r;
        }
        loss_parts[static_cast<size_t>(tid)] += inv_batch * sample_loss;
        if (grads)
            net.backward(cache, residual, grad_parts[static_cast<size_t>(tid)], inv_batch);
    }

    double loss = 0.0;
    for (int t = 0; t < n_threads; ++t) {
        loss += loss_parts[static_cast<size_t>(t)];
        if (grads)
            for (size_t g = 0; g < grads->size(); ++g)
                for (size_t i = 0; i < (*grads)[g].v.size(); ++i)
                    (*grads)[g].v[i] += grad_parts[static_cast<size_t>(t)][g].v[i];
    }
    return loss;
}

namespace {

ComplexGrid flip_cols(const ComplexGrid& g) {
    ComplexGrid out(g.rows(), g.cols());
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) out(r, g.cols() - 1 - c) = g(r, c);
    return out;
}

ComplexGrid flip_rows(const ComplexGrid& g) {
    ComplexGrid out(g.rows(), g.cols());
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) out(g.rows() - 1 - r, c) = g(r, c);
    return out;
}

ComplexGrid rot90(const ComplexGrid& g) {
    ComplexGrid out(g.cols(), g.rows());
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) out(g.cols() - 1 - c, r) = g(r, c);
    return out;
}

ComplexGrid augment_sample(const ComplexGrid& g, RandomStream& rng) {
    ComplexGrid out = g;
    if (rng.uniform() < 0.5) out = flip_cols(out);
    if (rng.uniform() < 0.5) out = flip_rows(out);
    const int quarter_turns = static_cast<int>(rng.uniform_index(4));
    for (int q = 0; q < quarter_turns; ++q) out = rot90(out);
    return out;
}

} // namespace

ScoreNet<float> train_scorenet(const std::vector<ComplexGrid>& dataset, const TrainConfig& cfg,
                               TrainStats* stats) {
    if (dataset.empty()) throw ArgumentError("train_scorenet: empty dataset");
    if (cfg.batch < 1) throw ArgumentError("train_scorenet: batch must be >= 1");
    if (cfg.learn_rate <= 0.0) throw ArgumentError("train_scorenet: learn_rate must be > 0");
    if (cfg.sched.n_scales < 1) throw ArgumentError("train_scorenet: schedule missing");

    ScoreNetConfig net_cfg;
    net_cfg.width = cfg.width;
    net_cfg.layers = cfg.layers;
    net_cfg.mode = cfg.mode;
    net_cfg.sched = cfg.sched;
    ScoreNet<float> net(net_cfg, cfg.seed);

    // Adam state, double precision
    auto moment1 = net.zero_grads();
    auto moment2 = net.zero_grads();
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    RandomStream shuffle_rng(cfg.seed, 0x747261696eULL);
    std::vector<size_t> order(dataset.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    double ema = -1.0;
    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

        double epoch_loss = 0.0;
        long epoch_batches = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch)) {
            const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch));
            std::vector<ComplexGrid> batch;
            batch.reserve(stop - start);
            for (size_t i = start; i < stop; ++i) {
                if (cfg.augment) {
                    RandomStream aug =
                        RandomStream(cfg.seed, 0x617567ULL).fork(static_cast<uint64_t>(step))
                            .fork(i - start);
                    batch.push_back(augment_sample(dataset[order[i]], aug));
                } else {
                    batch.push_back(dataset[order[i]]);
                }
            }

            auto grads = net.zero_grads();
            const uint64_t draw_seed = cfg.seed * 0x9e3779b9ULL + static_cast<uint64_t>(step);
            const double loss = dsm_loss(net, batch, cfg.sched, draw_seed, &grads);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "training diverged (non-finite loss) at step " << step;
                throw TrainingError(msg.str());
            }

            // global-norm clipping at 1
            double sq = 0.0;
            for (const auto& g : grads)
                for (double v : g.v) sq += v * v;
            const double gnorm = std::sqrt(sq);
            const double clip = gnorm > 1.0 ? 1.0 / gnorm : 1.0;

            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            auto& params = net.params();
            for (size_t t = 0; t < params.size(); ++t) {
                auto& p = params[t].v;
                auto& m1 = moment1[t].v;
                auto& m2 = moment2[t].v;
                const auto& g = grads[t].v;
                for (size_t j = 0; j < p.size(); ++j) {
                    const double gv = g[j] * clip;
                    m1[j] = beta1 * m1[j] + (1.0 - beta1) * gv;
                    m2[j] = beta2 * m2[j] + (1.0 - beta2) * gv * gv;
                    p[j] -= static_cast<float>(cfg.learn_rate * (m1[j] / bc1) /
                                               (std::sqrt(m2[j] / bc2) + eps));
                }
            }

            ema = ema < 0.0 ? loss : 0.98 * ema + 0.02 * loss;
            epoch_loss += loss;
            ++epoch_batches;
        }
        if (stats) {
            stats->epoch_loss.push_back(epoch_loss / std::max(1L, epoch_batches));
            stats->smoothed_loss.push_back(ema);
        }
    }
    return net;
}

void save_checkpoint(const std::string& dir, const ScoreNet<float>& net) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream manifest(fs::path(dir) / "manifest.txt");
    if (!manifest) throw IoError("cannot write manifest in " + dir);
    const auto& cfg = net.config();
    manifest << "format scorenet-ckpt-1\n";
    manifest << "mode " << train_mode_name(cfg.mode) << "\n";
    manifest << "width " << cfg.width << "\n";
    manifest << "layers " << cfg.layers << "\n";
    manifest << "levels " << cfg.sched.n_scales << "\n";
    manifest << "sigma_min " << cfg.sched.sigma_min << "\n";
    manifest << "sigma_max " << cfg.sched.sigma_max << "\n";
    manifest << "tensors";
    for (const auto& p : net.params()) manifest << " " << p.name;
    manifest << "\n";
    if (!manifest.flush()) throw IoError("manifest write failed in " + dir);

    for (const auto& p : net.params())
        write_real_tensor((fs::path(dir) / p.name).string(), p.dims, p.v);
}

ScoreNet<float> load_checkpoint(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream manifest(fs::path(dir) / "manifest.txt");
    if (!manifest) throw IoError("cannot open manifest in " + dir);

    std::string key, format, mode;
    int width = 0, layers = 0, levels = 0;
    double sigma_min = 0.0, sigma_max = 0.0;
    std::vector<std::string> tensor_names;
    std::string line;
    while (std::getline(manifest, line)) {
        std::istringstream in(line);
        in >> key;
        if (key == "format")
            in >> format;
        else if (key == "mode")
            in >> mode;
        else if (key == "width")
            in >> width;
        else if (key == "layers")
            in >> layers;
        else if (key == "levels")
            in >> levels;
        else if (key == "sigma_min")
            in >> sigma_min;
        else if (key == "sigma_max")
            in >> sigma_max;
        else if (key == "tensors") {
            std::string name;
            while (in >> name) tensor_names.push_back(name);
        }
    }
    if (format != "scorenet-ckpt-1")
        throw ConfigError(dir + ": unrecognized checkpoint format '" + format + "'");
    if (width < 1 || layers < 2 || levels < 1 || sigma_min <= 0.0 || sigma_max <= 0.0)
        throw ConfigError(dir + ": incomplete checkpoint manifest");

    ScoreNetConfig cfg;
    cfg.width = width;
    cfg.layers = layers;
    cfg.mode = parse_train_mode(mode);
    cfg.sched = schedule(levels, sigma_min, sigma_max);
    ScoreNet<float> net(cfg, 0);

    if (tensor_names.size() != net.params().size())
        throw ConfigError(dir + ": tensor list does not match architecture");
    for (size_t t = 0; t < tensor_names.size(); ++t) {
        auto& p = net.params()[t];
        if (tensor_names[t] != p.name)
            throw ConfigError(dir + ": unexpected tensor '" + tensor_names[t] + "'");
        std::vector<long> dims;
        auto values = read_real_tensor((fs::path(dir) / p.name).string(), &dims);
        if (values.size() != p.v.size())
            throw ConfigError(dir + ": tensor '" + p.name + "' has wrong size");
        p.v = std::move(values);
    }
    return net;
}

template class ScoreNet<float>;
template class ScoreNet<double>;
template double dsm_loss<float>(const ScoreNet<float>&, const std::vector<ComplexGrid>&,
                                const NoiseSchedule&, uint64_t, std::vector<Tensor<double>>*);
template double dsm_loss<double>(const ScoreNet<double>&, const std::vector<ComplexGrid>&,
                                 const NoiseSchedule&, uint64_t, std::vector<Tensor<double>>*);

} // namespace mri
