#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrprior/grid.hpp"
#include "mrprior/schedule.hpp"

namespace mri {

// Channel-major dense feature map: index (c, y, x).
template <typename T>
struct FeatureMap {
    int channels = 0, h = 0, w = 0;
    std::vector<T> v;

    FeatureMap() = default;
    FeatureMap(int c_, int h_, int w_)
        : channels(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, T(0)) {}

    T* plane(int c) { return v.data() + static_cast<size_t>(c) * h * w; }
    const T* plane(int c) const { return v.data() + static_cast<size_t>(c) * h * w; }
    T& at(int c, int y, int x) { return v[(static_cast<size_t>(c) * h + y) * w + x]; }
    const T& at(int c, int y, int x) const {
        return v[(static_cast<size_t>(c) * h + y) * w + x];
    }
};

template <typename T>
struct Tensor {
    std::string name;
    std::vector<long> dims;
    std::vector<T> v;

    size_t size() const { return v.size(); }
};

enum class TrainMode { Smld, Ddpm };

TrainMode parse_train_mode(const std::string& name);
const char* train_mode_name(TrainMode mode);

struct ScoreNetConfig {
    int width = 32;
    int layers = 6; // total conv layers, >= 2
    TrainMode mode = TrainMode::Smld;
    NoiseSchedule sched; // noise scales the level conditioning refers to
};

// Small convolutional score model on 2-channel (re, im) grids: 3x3 zero-pad
// convs with SiLU nonlinearities, level conditioning through a learned
// per-scale bias on the first hidden layer plus a per-scale gain on the
// linear output layer. The raw network output predicts the negative unit
// noise; score conversion happens in diffusion_score. Templated so tests
// can run the same graph in double while training runs float.
template <typename T>
class ScoreNet {
public:
    ScoreNet() = default;
    ScoreNet(ScoreNetConfig cfg, uint64_t init_seed);

    const ScoreNetConfig& config() const { return cfg_; }

    // Deterministic forward pass. Input/output shape (2, h, w).
    FeatureMap<T> forward(const FeatureMap<T>& input, int level) const;

    // Complex-grid convenience wrappers.
    static FeatureMap<T> to_channels(const ComplexGrid& g);
    static ComplexGrid to_grid(const FeatureMap<T>& f);

    // Forward with cached activations, then reverse-mode accumulation of
    // parameter gradients. `dout` is dLoss/dOutput; gradients accumulate
    // (scaled by `scale`) into `grads`, which must be shaped like
    // zero_grads().
    struct Cache {
        int level = 0;
        FeatureMap<T> input;
        std::vector<FeatureMap<T>> pre;  // pre-activation per layer
        std::vector<FeatureMap<T>> post; // post-activation per layer
    };
    FeatureMap<T> forward_cached(const FeatureMap<T>& input, int level, Cache& cache) const;
    void backward(const Cache& cache, const FeatureMap<T>& dout,
                  std::vector<Tensor<double>>& grads, double scale) const;

    std::vector<Tensor<double>> zero_grads() const;

    std::vector<Tensor<T>>& params() { return params_; }
    const std::vector<Tensor<T>>& params() const { return params_; }

    template <typename U>
    ScoreNet<U> cast() const {
        ScoreNet<U> out;
        out.cfg_ = cfg_;
        out.params_.resize(params_.size());
        for (size_t i = 0; i < params_.size(); ++i) {
            out.params_[i].name = params_[i].name;
            out.params_[i].dims = params_[i].dims;
            out.params_[i].v.assign(params_[i].v.begin(), params_[i].v.end());
        }
        return out;
    }

    template <typename U>
    friend class ScoreNet;

private:
    // params_ layout: [conv0.w, conv0.b, ..., embed, gain, skip]
    Tensor<T>& weight(int layer) { return params_[2 * static_cast<size_t>(layer)]; }
    const Tensor<T>& weight(int layer) const { return params_[2 * static_cast<size_t>(layer)]; }
    Tensor<T>& bias(int layer) { return params_[2 * static_cast<size_t>(layer) + 1]; }
    const Tensor<T>& bias(int layer) const {
        return params_[2 * static_cast<size_t>(layer) + 1];
    }
    Tensor<T>& embed() { return params_[params_.size() - 3]; }
    const Tensor<T>& embed() const { return params_[params_.size() - 3]; }
    Tensor<T>& gain() { return params_[params_.size() - 2]; }
    const Tensor<T>& gain() const { return params_[params_.size() - 2]; }
    Tensor<T>& skip() { return params_.back(); }
    const Tensor<T>& skip() const { return params_.back(); }

    int in_channels(int layer) const { return layer == 0 ? 2 : cfg_.width; }
    int out_channels(int layer) const { return layer == cfg_.layers - 1 ? 2 : cfg_.width; }

    ScoreNetConfig cfg_;
    std::vector<Tensor<T>> params_;
};

struct TrainConfig {
    TrainMode mode = TrainMode::Smld;
    int epochs = 50;
    int batch = 8;
    double learn_rate = 1e-3;
    uint64_t seed = 0;
    NoiseSchedule sched;
    bool augment = true;
    int width = 32;
    int layers = 6;
};

// Denoising score-matching loss over one batch and its parameter gradients.
// Every sample draws a level i in [1, N] and complex unit-variance noise z,
// forms x_i = x0 + sigma_i z and regresses the network output against the
// scaled conditional score target; with lambda_i = sigma_i^2 (SMLD) or unit
// weighting on the epsilon parameterization (DDPM) both reduce to a
// unit-magnitude residual. Loss is the batch mean of per-sample pixel sums.
template <typename T>
double dsm_loss(const ScoreNet<T>& net, const std::vector<ComplexGrid>& batch,
                const NoiseSchedule& sched, uint64_t seed,
                std::vector<Tensor<double>>* grads = nullptr);

struct TrainStats {
    std::vector<double> epoch_loss;    // mean batch loss per epoch
    std::vector<double> smoothed_loss; // EMA of batch losses sampled per epoch
};

// Adam optimization of dsm_loss with optional mirror/flip/rot90
// augmentation and global-norm-1 gradient clipping. Deterministic for a
// fixed worker count; guaranteed reproducible at worker count 1.
ScoreNet<float> train_scorenet(const std::vector<ComplexGrid>& dataset, const TrainConfig& cfg,
                               TrainStats* stats = nullptr);

// Checkpoint: directory of named-tensor array files plus manifest.txt.
void save_checkpoint(const std::string& dir, const ScoreNet<float>& net);
ScoreNet<float> load_checkpoint(const std::string& dir);

} // namespace mri
