#pragma once

#include "nilm/preprocessing.hpp"
#include "nilm/rng.hpp"
#include "nilm/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace nilm {

struct LstmConfig {
    int input_dim = 1;
    int lstm_units = 32;   // 500 in the paper preset
    int fc_units = 16;     // 200 in the paper preset
    int output_dim = 1;
    double dropout_p = 0.3;
    double init_range = 0.05;  // uniform [-r, r]

    void validate() const {
        if (input_dim < 1 || lstm_units < 1 || fc_units < 1 || output_dim < 1)
            throw NilmError("InvalidConfig: all LSTM dimensions must be > 0");
        if (dropout_p < 0.0 || dropout_p >= 1.0)
            throw NilmError("InvalidConfig: dropout_p must be in [0, 1)");
    }
};

struct TrainConfig {
    int batch_size = 50;
    int epochs = 50;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 5.0;  // global-norm gradient clip
    std::uint64_t seed = 1;

    void validate() const {
        if (batch_size < 1) throw NilmError("InvalidConfig: batch_size must be >= 1");
        if (epochs < 0) throw NilmError("InvalidConfig: epochs must be >= 0");
        if (lr < 0.0) throw NilmError("InvalidConfig: lr must be >= 0");
    }
};

namespace detail {
template <typename Scalar>
inline Scalar stable_sigmoid(Scalar x) {
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
}
}  // namespace detail

/**
 * Single-layer LSTM with a rectified fully connected hidden layer and
 * per-unit sigmoid outputs, for per-timestep binary labels. All
 * parameters live in one flat vector; the gate/head matrices are Eigen
 * maps into it, which keeps the optimizer and the finite-difference
 * checks layout-agnostic.
 *
 * Recurrence (column vectors, h_0 = c_0 = 0):
 *   i = sigmoid(Wxi x + Whi h' + bi)     f = sigmoid(Wxf x + Whf h' + bf)
 *   o = sigmoid(Wxo x + Who h' + bo)     g = tanh  (Wxg x + Whg h' + bg)
 *   c = f.c' + i.g        h = o.tanh(c)
 * Head (dropout on h only in train mode, inverted scaling):
 *   r = relu(W1 drop(h) + b1)            y = sigmoid(W2 r + b2)
 */
template <typename Scalar>
class LstmNet {
public:
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using MapMat = Eigen::Map<Mat>;
    using MapVec = Eigen::Map<Vec>;
    using CMapMat = Eigen::Map<const Mat>;
    using CMapVec = Eigen::Map<const Vec>;

    LstmConfig cfg;
    Vec theta;
    ScalerParams input_scaler;  // carried for pipeline use; forward takes scaled input

    static Index param_count(const LstmConfig& c) {
        const Index u = c.lstm_units, i = c.input_dim, f = c.fc_units, o = c.output_dim;
        return 4 * (u * i + u * u + u) + f * u + f + o * f + o;
    }

    static LstmNet init(const LstmConfig& cfg, Rng& rng) {
        cfg.validate();
        LstmNet net;
        net.cfg = cfg;
        net.theta.resize(param_count(cfg));
        for (Index j = 0; j < net.theta.size(); ++j)
            net.theta[j] = static_cast<Scalar>(rng.uniform(-cfg.init_range, cfg.init_range));
        return net;
    }

    // Gate order in the flat layout: i, f, o, g, then the head.
    struct Blocks {
        CMapMat Wxi, Whi, Wxf, Whf, Wxo, Who, Wxg, Whg, W1, W2;
        CMapVec bi, bf, bo, bg, b1, b2;
    };
    struct MutBlocks {
        MapMat Wxi, Whi, Wxf, Whf, Wxo, Who, Wxg, Whg, W1, W2;
        MapVec bi, bf, bo, bg, b1, b2;
    };

    Blocks blocks() const { return map_blocks<Blocks, const Scalar>(theta.data(), cfg); }
    MutBlocks blocks_mut() { return map_blocks<MutBlocks, Scalar>(theta.data(), cfg); }
    static MutBlocks map_gradient(Vec& grad, const LstmConfig& cfg) {
        return map_blocks<MutBlocks, Scalar>(grad.data(), cfg);
    }

private:
    template <typename B, typename S>
    static B map_blocks(S* base, const LstmConfig& c) {
        const Index u = c.lstm_units, i = c.input_dim, f = c.fc_units, o = c.output_dim;
        S* p = base;
        auto mat = [&p](Index r, Index cl) {
            S* q = p;
            p += r * cl;
            return typename std::conditional<std::is_const<S>::value, CMapMat, MapMat>::type(q, r,
                                                                                             cl);
        };
        auto vec = [&p](Index r) {
            S* q = p;
            p += r;
            return typename std::conditional<std::is_const<S>::value, CMapVec, MapVec>::type(q, r);
        };
        auto Wxi = mat(u, i), Whi = mat(u, u);
        auto bi = vec(u);
        auto Wxf = mat(u, i), Whf = mat(u, u);
        auto bf = vec(u);
        auto Wxo = mat(u, i), Who = mat(u, u);
        auto bo = vec(u);
        auto Wxg = mat(u, i), Whg = mat(u, u);
        auto bg = vec(u);
        auto W1 = mat(f, u);
        auto b1 = vec(f);
        auto W2 = mat(o, f);
        auto b2 = vec(o);
        return B{Wxi, Whi, Wxf, Whf, Wxo, Who, Wxg, Whg, W1, W2, bi, bf, bo, bg, b1, b2};
    }
};

/// Activations retained by the forward pass for backpropagation through
/// time. Entry [t] holds the step-t values for the whole batch (columns).
template <typename Scalar>
struct LstmCache {
    using Mat = typename LstmNet<Scalar>::Mat;
    std::vector<Mat> x, gi, gf, go, gg, c, tc, h, d, mask, r, y;
    bool train_mode = false;
    LstmConfig cfg;
    Index batch = 0;
};

/**
 * Batched forward pass. x_steps[t] is input_dim x batch; returns
 * output_dim x batch sigmoid activations per step. In train mode an
 * inverted dropout mask (drawn from rng) is applied to the LSTM output
 * before the head. Pass a cache to retain activations for backward.
 */
template <typename Scalar>
std::vector<typename LstmNet<Scalar>::Mat> lstm_forward(
    const LstmNet<Scalar>& net, const std::vector<typename LstmNet<Scalar>::Mat>& x_steps,
    bool train_mode = false, Rng* rng = nullptr, LstmCache<Scalar>* cache = nullptr) {
    using Mat = typename LstmNet<Scalar>::Mat;
    if (x_steps.empty()) throw NilmError("ShapeMismatch: empty sequence");
    const Index T = static_cast<Index>(x_steps.size());
    const Index B = x_steps.front().cols();
    const auto w = net.blocks();
    const Index U = net.cfg.lstm_units;

    for (const auto& x : x_steps) {
        if (x.rows() != net.cfg.input_dim || x.cols() != B)
            throw NilmError("ShapeMismatch: input step must be input_dim x batch");
        if (!x.allFinite()) throw NilmError("NonFiniteInput: lstm_forward");
    }
    const bool use_dropout = train_mode && net.cfg.dropout_p > 0.0;
    if (use_dropout && !rng) throw NilmError("InvalidConfig: train-mode dropout needs an rng");

    if (cache) {
        *cache = LstmCache<Scalar>{};
        cache->train_mode = train_mode;
        cache->cfg = net.cfg;
        cache->batch = B;
    }
    std::vector<Mat> outputs;
    outputs.reserve(T);
    Mat h = Mat::Zero(U, B), c = Mat::Zero(U, B);
    const Scalar keep = Scalar(1) - static_cast<Scalar>(net.cfg.dropout_p);

    for (Index t = 0; t < T; ++t) {
        const Mat& x = x_steps[t];
        Mat gi = ((w.Wxi * x + w.Whi * h).colwise() + w.bi)
                     .unaryExpr([](Scalar v) { return detail::stable_sigmoid(v); });
        Mat gf = ((w.Wxf * x + w.Whf * h).colwise() + w.bf)
                     .unaryExpr([](Scalar v) { return detail::stable_sigmoid(v); });
        Mat go = ((w.Wxo * x + w.Who * h).colwise() + w.bo)
                     .unaryExpr([](Scalar v) { return detail::stable_sigmoid(v); });
        Mat gg = ((w.Wxg * x + w.Whg * h).colwise() + w.bg).array().tanh().matrix();
        c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
        Mat tc = c.array().tanh().matrix();
        h = go.cwiseProduct(tc);

        Mat mask;
        Mat d;
        if (use_dropout) {
            mask.resize(U, B);
            for (Index col = 0; col < B; ++col)
                for (Index row = 0; row < U; ++row)
                    mask(row, col) = rng->uniform() < net.cfg.dropout_p ? Scalar(0) : Scalar(1) / keep;
            d = h.cwiseProduct(mask);
        } else {
            d = h;
        }
        Mat r = ((w.W1 * d).colwise() + w.b1).cwiseMax(Scalar(0));
        Mat y = ((w.W2 * r).colwise() + w.b2)
                    .unaryExpr([](Scalar v) { return detail::stable_sigmoid(v); });

        if (cache) {
            cache->x.push_back(x);
            cache->gi.push_back(gi);
            cache->gf.push_back(gf);
            cache->go.push_back(go);
            cache->gg.push_back(gg);
            cache->c.push_back(c);
            cache->tc.push_back(tc);
            cache->h.push_back(h);
            cache->mask.push_back(use_dropout ? mask : Mat());
            cache->d.push_back(d);
            cache->r.push_back(r);
        }
        outputs.push_back(std::move(y));
    }
    if (cache) cache->y = outputs;
    return outputs;
}

/**
 * Backpropagation through time. grad_outputs[t] is dLoss/dy at step t
 * (gradient with respect to the sigmoid outputs). Returns the gradient in
 * the flat parameter layout.
 */
template <typename Scalar>
typename LstmNet<Scalar>::Vec lstm_backward(
    const LstmNet<Scalar>& net, const LstmCache<Scalar>& cache,
    const std::vector<typename LstmNet<Scalar>::Mat>& grad_outputs) {
    using Mat = typename LstmNet<Scalar>::Mat;
    using Vec = typename LstmNet<Scalar>::Vec;
    if (cache.cfg.input_dim != net.cfg.input_dim || cache.cfg.lstm_units != net.cfg.lstm_units ||
        cache.cfg.fc_units != net.cfg.fc_units || cache.cfg.output_dim != net.cfg.output_dim ||
        cache.y.empty())
        throw NilmError("CacheMismatch: cache does not match the network");
    if (grad_outputs.size() != cache.y.size())
        throw NilmError("CacheMismatch: grad_outputs length vs cached sequence");

    const Index T = static_cast<Index>(cache.y.size());
    const Index B = cache.batch;
    const Index U = net.cfg.lstm_units;
    const auto w = net.blocks();

    Vec grad = Vec::Zero(net.theta.size());
    auto g = LstmNet<Scalar>::map_gradient(grad, net.cfg);

    Mat dh_next = Mat::Zero(U, B), dc_next = Mat::Zero(U, B);
    for (Index t = T - 1; t >= 0; --t) {
        // head
        const Mat& y = cache.y[t];
        Mat dya = grad_outputs[t].cwiseProduct(y.cwiseProduct(Mat::Ones(y.rows(), B) - y));
        g.W2 += dya * cache.r[t].transpose();
        g.b2 += dya.rowwise().sum();
        Mat dr = w.W2.transpose() * dya;
        Mat dra = (cache.r[t].array() > Scalar(0)).template cast<Scalar>().matrix().cwiseProduct(dr);
        g.W1 += dra * cache.d[t].transpose();
        g.b1 += dra.rowwise().sum();
        Mat dd = w.W1.transpose() * dra;
        Mat dh = cache.mask[t].size() ? dd.cwiseProduct(cache.mask[t]) : dd;
        dh += dh_next;

        // cell
        const Mat& tc = cache.tc[t];
        Mat dgo = dh.cwiseProduct(tc);
        Mat dc = dh.cwiseProduct(cache.go[t])
                     .cwiseProduct(Mat::Ones(U, B) - tc.cwiseProduct(tc)) +
                 dc_next;
        Mat dgf = t > 0 ? dc.cwiseProduct(cache.c[t - 1]).eval() : Mat::Zero(U, B).eval();
        Mat dgi = dc.cwiseProduct(cache.gg[t]);
        Mat dgg = dc.cwiseProduct(cache.gi[t]);

        // pre-activation grads
        Mat dai = dgi.cwiseProduct(cache.gi[t].cwiseProduct(Mat::Ones(U, B) - cache.gi[t]));
        Mat daf = dgf.cwiseProduct(cache.gf[t].cwiseProduct(Mat::Ones(U, B) - cache.gf[t]));
        Mat dao = dgo.cwiseProduct(cache.go[t].cwiseProduct(Mat::Ones(U, B) - cache.go[t]));
        Mat dag = dgg.cwiseProduct(Mat::Ones(U, B) - cache.gg[t].cwiseProduct(cache.gg[t]));

        const Mat& x = cache.x[t];
        const Mat h_prev = t > 0 ? cache.h[t - 1] : Mat::Zero(U, B);
        g.Wxi += dai * x.transpose();
        g.Whi += dai * h_prev.transpose();
        g.bi += dai.rowwise().sum();
        g.Wxf += daf * x.transpose();
        g.Whf += daf * h_prev.transpose();
        g.bf += daf.rowwise().sum();
        g.Wxo += dao * x.transpose();
        g.Who += dao * h_prev.transpose();
        g.bo += dao.rowwise().sum();
        g.Wxg += dag * x.transpose();
        g.Whg += dag * h_prev.transpose();
        g.bg += dag.rowwise().sum();

        dh_next = w.Whi.transpose() * dai + w.Whf.transpose() * daf + w.Who.transpose() * dao +
                  w.Whg.transpose() * dag;
        dc_next = dc.cwiseProduct(cache.gf[t]);
    }
    return grad;
}

template <typename Scalar>
struct BceResult {
    Scalar loss = 0;
    std::vector<typename LstmNet<Scalar>::Mat> grad;  // dLoss/dpred, mean reduction
};

/// Mean binary cross-entropy over all steps, outputs and batch columns.
/// Predictions are clamped to [eps, 1-eps] before the logs.
template <typename Scalar>
BceResult<Scalar> bce_loss(const std::vector<typename LstmNet<Scalar>::Mat>& pred,
                           const std::vector<typename LstmNet<Scalar>::Mat>& target,
                           Scalar eps = Scalar(1e-7)) {
    if (pred.size() != target.size()) throw NilmError("ShapeMismatch: bce_loss step count");
    BceResult<Scalar> out;
    Scalar n = 0;
    for (const auto& p : pred) n += static_cast<Scalar>(p.size());
    if (n == 0) throw NilmError("ShapeMismatch: bce_loss on empty prediction");
    out.grad.reserve(pred.size());
    for (std::size_t t = 0; t < pred.size(); ++t) {
        if (pred[t].rows() != target[t].rows() || pred[t].cols() != target[t].cols())
            throw NilmError("ShapeMismatch: bce_loss step " + std::to_string(t));
        auto p = pred[t].array().max(eps).min(Scalar(1) - eps);
        auto y = target[t].array();
        out.loss += -(y * p.log() + (Scalar(1) - y) * (Scalar(1) - p).log()).sum();
        out.grad.push_back(((p - y) / (p * (Scalar(1) - p)) / n).matrix());
    }
    out.loss /= n;
    return out;
}

template <typename Scalar>
struct AdamState {
    typename LstmNet<Scalar>::Vec m, v;
    long t = 0;
};

/// One bias-corrected Adam update; the state advances by one step.
template <typename Scalar>
void adam_step(typename LstmNet<Scalar>::Vec& params, const typename LstmNet<Scalar>::Vec& grads,
               AdamState<Scalar>& state, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8) {
    if (params.size() != grads.size()) throw NilmError("ShapeMismatch: adam_step");
    if (state.m.size() == 0) {
        state.m = LstmNet<Scalar>::Vec::Zero(params.size());
        state.v = LstmNet<Scalar>::Vec::Zero(params.size());
    }
    if (state.m.size() != params.size()) throw NilmError("ShapeMismatch: adam state");
    ++state.t;
    const Scalar b1 = static_cast<Scalar>(beta1), b2 = static_cast<Scalar>(beta2);
    state.m = b1 * state.m + (Scalar(1) - b1) * grads;
    state.v = (b2 * state.v.array() + (Scalar(1) - b2) * grads.array().square()).matrix();
    const Scalar corr1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(state.t));
    const Scalar corr2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(state.t));
    params.array() -= static_cast<Scalar>(lr) * (state.m.array() / corr1) /
                      ((state.v.array() / corr2).sqrt() + static_cast<Scalar>(eps));
}

template <typename Scalar>
void clip_global_norm(typename LstmNet<Scalar>::Vec& grad, double max_norm) {
    if (max_norm <= 0.0) return;
    const double norm = std::sqrt(static_cast<double>(grad.squaredNorm()));
    if (norm > max_norm) grad *= static_cast<Scalar>(max_norm / norm);
}

/// One training window: inputs are T x input_dim, targets T x output_dim.
template <typename Scalar>
struct SeqSample {
    typename LstmNet<Scalar>::Mat inputs;
    typename LstmNet<Scalar>::Mat targets;
};

struct TrainLog {
    std::vector<double> epoch_loss;          // mean training loss per epoch
    std::vector<double> epoch_val_accuracy;  // empty when no validation set given
};

namespace detail {

// windows (T x dim) -> time-major step matrices (dim x batch)
template <typename Scalar>
std::vector<typename LstmNet<Scalar>::Mat> stack_steps(
    const std::vector<const typename LstmNet<Scalar>::Mat*>& windows, bool targets) {
    using Mat = typename LstmNet<Scalar>::Mat;
    const Index T = windows.front()->rows();
    const Index dim = windows.front()->cols();
    std::vector<Mat> steps(T, Mat(dim, static_cast<Index>(windows.size())));
    for (std::size_t b = 0; b < windows.size(); ++b) {
        if (windows[b]->rows() != T || windows[b]->cols() != dim)
            throw NilmError(targets ? "ShapeMismatch: ragged target windows"
                                    : "ShapeMismatch: ragged input windows");
        for (Index t = 0; t < T; ++t)
            steps[t].col(static_cast<Index>(b)) = windows[b]->row(t).transpose();
    }
    return steps;
}

}  // namespace detail

/**
 * Mini-batch training loop: per epoch the window order is reshuffled
 * (seeded), each batch runs one forward/BPTT pass, gradients are clipped
 * at the global norm and applied with Adam. Deterministic for a fixed
 * seed. Returns the per-epoch mean loss (and per-epoch plain accuracy on
 * the validation windows when provided).
 */
template <typename Scalar>
TrainLog train(LstmNet<Scalar>& net, const std::vector<SeqSample<Scalar>>& data,
               const TrainConfig& tc, const std::vector<SeqSample<Scalar>>& validation = {}) {
    using Mat = typename LstmNet<Scalar>::Mat;
    using Vec = typename LstmNet<Scalar>::Vec;
    tc.validate();
    if (data.empty()) throw NilmError("EmptyInput: train needs >= 1 window");
    for (const auto& s : data)
        if (s.inputs.rows() != s.targets.rows() || s.inputs.cols() != net.cfg.input_dim ||
            s.targets.cols() != net.cfg.output_dim)
            throw NilmError("ShapeMismatch: training window");

    Rng shuffle_rng(tc.seed);
    Rng dropout_rng = shuffle_rng.fork(1);
    AdamState<Scalar> adam;
    TrainLog log;

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        long batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += tc.batch_size) {
            const std::size_t end = std::min(order.size(), begin + tc.batch_size);
            std::vector<const Mat*> xs, ys;
            for (std::size_t i = begin; i < end; ++i) {
                xs.push_back(&data[order[i]].inputs);
                ys.push_back(&data[order[i]].targets);
            }
            const auto x_steps = detail::stack_steps<Scalar>(xs, false);
            const auto y_steps = detail::stack_steps<Scalar>(ys, true);

            LstmCache<Scalar> cache;
            const auto out = lstm_forward(net, x_steps, true, &dropout_rng, &cache);
            const auto bce = bce_loss<Scalar>(out, y_steps);
            Vec grad = lstm_backward(net, cache, bce.grad);
            clip_global_norm<Scalar>(grad, tc.clip_norm);
            adam_step<Scalar>(net.theta, grad, adam, tc.lr, tc.beta1, tc.beta2, tc.eps);
            if (!net.theta.allFinite()) throw NilmError("NonFinite: parameters diverged");
            loss_sum += static_cast<double>(bce.loss);
            ++batches;
        }
        log.epoch_loss.push_back(batches ? loss_sum / batches : 0.0);

        if (!validation.empty()) {
            long correct = 0, total = 0;
            for (const auto& s : validation) {
                std::vector<const Mat*> xs{&s.inputs};
                const auto out = lstm_forward(net, detail::stack_steps<Scalar>(xs, false));
                for (Index t = 0; t < s.targets.rows(); ++t)
                    for (Index c = 0; c < s.targets.cols(); ++c) {
                        const bool on = out[t](c, 0) >= Scalar(0.5);
                        correct += on == (s.targets(t, c) >= Scalar(0.5));
                        ++total;
                    }
            }
            log.epoch_val_accuracy.push_back(total ? double(correct) / double(total) : 0.0);
        }
    }
    return log;
}

/// Eval-mode probabilities for one long sequence (T x input_dim),
/// processed in window_len chunks with state reset per chunk to match the
/// training-time distribution. Returns T x output_dim.
template <typename Scalar>
typename LstmNet<Scalar>::Mat predict_sequence(const LstmNet<Scalar>& net,
                                               const typename LstmNet<Scalar>::Mat& inputs,
                                               Index window_len) {
    using Mat = typename LstmNet<Scalar>::Mat;
    if (window_len < 1) throw NilmError("InvalidConfig: window_len must be >= 1");
    const Index T = inputs.rows();
    Mat out(T, net.cfg.output_dim);
    // full chunks go through as one batch
    const Index full = T / window_len;
    if (full > 0) {
        std::vector<Mat> steps(window_len, Mat(net.cfg.input_dim, full));
        for (Index b = 0; b < full; ++b)
            for (Index t = 0; t < window_len; ++t)
                steps[t].col(b) = inputs.row(b * window_len + t).transpose();
        const auto y = lstm_forward(net, steps);
        for (Index b = 0; b < full; ++b)
            for (Index t = 0; t < window_len; ++t)
                out.row(b * window_len + t) = y[t].col(b).transpose();
    }
    const Index tail = T - full * window_len;
    if (tail > 0) {
        std::vector<Mat> steps(tail, Mat(net.cfg.input_dim, 1));
        for (Index t = 0; t < tail; ++t)
            steps[t].col(0) = inputs.row(full * window_len + t).transpose();
        const auto y = lstm_forward(net, steps);
        for (Index t = 0; t < tail; ++t)
            out.row(full * window_len + t) = y[t].col(0).transpose();
    }
    return out;
}

// --- checkpoint io (little-endian, version-tagged) ---

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}
inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}
inline void put_f64(std::ostream& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}
inline double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace detail

inline constexpr std::uint32_t kLstmMagic = 0x4d54534c;  // "LSTM"
inline constexpr std::uint32_t kLstmVersion = 1;

template <typename Scalar>
void save_lstm(const LstmNet<Scalar>& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NilmError("IoError: cannot write " + path);
    detail::put_u32(out, kLstmMagic);
    detail::put_u32(out, kLstmVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(net.cfg.input_dim));
    detail::put_u32(out, static_cast<std::uint32_t>(net.cfg.lstm_units));
    detail::put_u32(out, static_cast<std::uint32_t>(net.cfg.fc_units));
    detail::put_u32(out, static_cast<std::uint32_t>(net.cfg.output_dim));
    detail::put_f64(out, net.cfg.dropout_p);
    detail::put_f64(out, net.cfg.init_range);
    detail::put_u32(out, static_cast<std::uint32_t>(net.input_scaler.dim()));
    for (Index i = 0; i < net.input_scaler.dim(); ++i) {
        detail::put_f64(out, net.input_scaler.min[i]);
        detail::put_f64(out, net.input_scaler.max[i]);
    }
    detail::put_u32(out, static_cast<std::uint32_t>(net.theta.size()));
    for (Index i = 0; i < net.theta.size(); ++i)
        detail::put_f64(out, static_cast<double>(net.theta[i]));
    if (!out) throw NilmError("IoError: short write to " + path);
}

template <typename Scalar>
LstmNet<Scalar> load_lstm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NilmError("IoError: cannot open " + path);
    if (detail::get_u32(in) != kLstmMagic || detail::get_u32(in) != kLstmVersion)
        throw NilmError("VersionMismatch: " + path);
    LstmNet<Scalar> net;
    net.cfg.input_dim = static_cast<int>(detail::get_u32(in));
    net.cfg.lstm_units = static_cast<int>(detail::get_u32(in));
    net.cfg.fc_units = static_cast<int>(detail::get_u32(in));
    net.cfg.output_dim = static_cast<int>(detail::get_u32(in));
    net.cfg.dropout_p = detail::get_f64(in);
    net.cfg.init_range = detail::get_f64(in);
    const Index sdim = static_cast<Index>(detail::get_u32(in));
    net.input_scaler.min.resize(sdim);
    net.input_scaler.max.resize(sdim);
    for (Index i = 0; i < sdim; ++i) {
        net.input_scaler.min[i] = detail::get_f64(in);
        net.input_scaler.max[i] = detail::get_f64(in);
    }
    const Index n = static_cast<Index>(detail::get_u32(in));
    if (n != LstmNet<Scalar>::param_count(net.cfg))
        throw NilmError("VersionMismatch: parameter count in " + path);
    net.theta.resize(n);
    for (Index i = 0; i < n; ++i) net.theta[i] = static_cast<Scalar>(detail::get_f64(in));
    if (!in) throw NilmError("IoError: truncated checkpoint " + path);
    return net;
}

}  // namespace nilm
