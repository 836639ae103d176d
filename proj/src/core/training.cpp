#include "kdg/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "kdg/evaluation.hpp"

namespace kdg {

void TrainConfig::validate() const {
    if (epochs < 0) throw ArgumentError("train.epochs must be >= 0");
    if (batch_size != 1) throw ArgumentError("train.batch_size must be 1");
    if (!(lr_recon_max > 0) || !(lr_traj_cartesian > 0) || !(lr_traj_radial > 0))
        throw ArgumentError("learning rates must be > 0");
    if (acceleration < 1) throw ArgumentError("train.acceleration must be >= 1");
    if (!(center_fraction >= 0.0 && center_fraction <= 1.0)) throw ArgumentError("train.center_fraction must be in [0,1]");
    if (radial_shots < 1) throw ArgumentError("train.radial_shots must be >= 1");
    if (initial_gap < 1) throw ArgumentError("train.initial_gap must be >= 1");
    if (lr_warmup < 1) throw ArgumentError("train.lr_warmup must be >= 1");
    if (weight_decay < 0) throw ArgumentError("train.weight_decay must be >= 0");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ArgumentError("train.val_fraction must be in [0,1)");
    noise.validate();
    model.validate();
}

double lr_schedule(double t, double total, double lr_max, double t_warmup) {
    if (t < 0 || t > total) throw ArgumentError("lr_schedule: epoch outside [0, T]");
    double raw = lr_max;
    if (total >= 2) raw = noise_schedule(t, total, std::clamp(t_warmup, 1.0, total - 1.0), lr_max);
    return std::max(raw, lr_max / 100.0);
}

int TrainState::n_acquired() const { return height / config.acceleration; }

RadialTrajectory default_radial(const TrainConfig& config, int height, int width) {
    const int points = height * width / (config.acceleration * config.radial_shots);
    if (points < 2) throw ArgumentError("radial budget leaves fewer than two points per shot");
    return make_fixed_radial(config.radial_shots, points, height, width);
}

CartesianMask default_cartesian(const TrainConfig& config, int height) {
    return make_fixed_cartesian(height, height / config.acceleration, config.center_fraction, config.seed);
}

namespace {

int total_gap(const TrainConfig& c, int epoch) {
    return c.epochs >= 2 ? gap_schedule(epoch, c.epochs, c.initial_gap) : 1;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), a, b, tag};
    return std::mt19937_64(seq);
}

enum StreamTag : std::uint32_t { kShuffle = 1, kNoise = 2, kSplit = 3, kInit = 4 };

// Network input gradient of the L1 loss for a given acquisition at the
// current parameters.
Image input_grad(const TrainState& s, const Acquired& acq, const Image& gt) {
    return backward(s.params, acq.net_input, gt, 0.0).grads.input;
}

}  // namespace

TrainState init_state(const TrainConfig& config, int height, int width) {
    config.validate();
    TrainState s;
    s.config = config;
    s.height = height;
    s.width = width;
    {
        auto rng = stream(config.seed, 0, 0, kInit);
        s.params = init_params(config.model, rng());
    }
    if (config.sampling == Sampling::Cartesian) {
        CartesianMask mask = default_cartesian(config, height);
        if (config.trajectory_learning) {
            CartesianScores sc{std::vector<double>(mask.lines.begin(), mask.lines.end()), config.center_fraction};
            mask = binarize_quantile(sc, s.n_acquired());
            s.scores = std::move(sc);
        }
        s.pattern = std::move(mask);
    } else {
        RadialTrajectory traj = default_radial(config, height, width);
        if (config.trajectory_learning) traj = parameterize(traj, total_gap(config, 0));
        s.pattern = std::move(traj);
    }
    return s;
}

int current_gap(const TrainState& s) {
    if (const auto* t = std::get_if<RadialTrajectory>(&s.pattern)) return t->gap;
    return 1;
}

void begin_epoch(TrainState& s, int epoch) {
    s.epoch = epoch;
    if (!s.config.trajectory_learning || s.config.sampling != Sampling::Radial) return;
    auto& traj = std::get<RadialTrajectory>(s.pattern);
    const int g = total_gap(s.config, epoch);
    if (g != traj.gap) {
        traj = parameterize(traj, g);
        s.traj_opt = AdamState{};  // control-point vector changed shape
    }
}

StepResult train_step(TrainState& s, const Sample& sample) {
    const TrainConfig& cfg = s.config;
    const int T = cfg.epochs;
    auto rng = stream(cfg.seed, static_cast<std::uint32_t>(s.epoch), sample.id, kNoise);

    GradProvider provider;
    provider.line_grads = [&](const Image& img, const CartesianMask& m) {
        const Acquired a = acquire(img, m);
        return mask_line_grads(a.ctx, input_grad(s, a, sample.gt));
    };
    provider.coord_grads = [&](const Image& img, const RadialTrajectory& t) {
        const Acquired a = acquire(img, t);
        return coord_grads(a.ctx, input_grad(s, a, sample.gt));
    };

    DgResult dg = apply_dg({sample.gt, s.pattern}, cfg.noise, s.epoch, std::max(T, 1), rng, &provider);
    const Acquired acq = acquire(dg.inputs.image, dg.inputs.pattern, cfg.noise.measurement_sigma, &rng);
    BackwardResult br = backward(s.params, acq.net_input, sample.gt, cfg.weight_decay);
    if (!std::isfinite(br.loss))
        throw NumericAbort("non-finite loss at epoch " + std::to_string(s.epoch) + ", sample " +
                           std::to_string(sample.id));

    const double t = std::min<double>(s.epoch, std::max(T, 1));
    adam_step(s.params.values, br.grads.params, lr_schedule(t, std::max(T, 1), cfg.lr_recon_max, cfg.lr_warmup),
              s.recon_opt);

    if (cfg.trajectory_learning) {
        // Gradients come from the (possibly perturbed) forward pass and update
        // the unperturbed trajectory parameters.
        if (cfg.sampling == Sampling::Cartesian) {
            const std::vector<double> lg = mask_line_grads(acq.ctx, br.grads.input);
            const std::vector<double> sg = straight_through_mask_grad(lg, *s.scores, s.n_acquired());
            const double lr = lr_schedule(t, std::max(T, 1), cfg.lr_traj_cartesian, cfg.lr_warmup);
            adam_step(s.scores->scores, sg, lr, s.traj_opt);
            s.pattern = binarize_quantile(*s.scores, s.n_acquired());
        } else {
            auto& traj = std::get<RadialTrajectory>(s.pattern);
            const std::vector<KCoord> cg = coord_grads(acq.ctx, br.grads.input);
            const std::vector<KCoord> ctrl =
                controls_grad_from_coords(cg, traj.shots, traj.controls_per_shot(), traj.points_per_shot);
            // lr_traj_radial is in radians of k-space ([-pi, pi]); coordinates are grid units
            const double scale = std::max(sample.gt.height(), sample.gt.width()) / (2.0 * std::numbers::pi);
            const double lr = scale * lr_schedule(t, std::max(T, 1), cfg.lr_traj_radial, cfg.lr_warmup);
            auto& cp = *traj.control_points;
            std::span<double> flat(reinterpret_cast<double*>(cp.data()), cp.size() * 2);
            std::span<const double> gflat(reinterpret_cast<const double*>(ctrl.data()), ctrl.size() * 2);
            adam_step(flat, gflat, lr, s.traj_opt);
            refresh_coords(traj);
        }
    }
    return {br.loss, dg.applied, dg.strength};
}

void split_dataset(std::size_t n, double val_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                   std::vector<std::size_t>& val) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto rng = stream(seed, 0, 0, kSplit);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_val = 0;
    if (n >= 2 && val_fraction > 0.0)
        n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(val_fraction * n)), 1, n - 1);
    val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val.begin(), val.end());
    if (val.empty()) val = train;
}

double validation_psnr(const TrainState& s, std::span<const Sample> samples, std::span<const std::size_t> idx) {
    if (idx.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i : idx) {
        const Acquired a = acquire(samples[i].gt, s.pattern);
        sum += psnr(forward(s.params, a.net_input), samples[i].gt);
    }
    return sum / static_cast<double>(idx.size());
}

TrainResult train(const TrainConfig& config, std::span<const Sample> dataset, const EpochCallback& on_epoch) {
    if (dataset.empty()) throw ArgumentError("train: dataset is empty");
    const int h = dataset[0].gt.height(), w = dataset[0].gt.width();
    for (const auto& s : dataset)
        if (s.gt.height() != h || s.gt.width() != w) throw ShapeError("train: samples differ in size");

    TrainResult res;
    split_dataset(dataset.size(), config.val_fraction, config.seed, res.train_indices, res.val_indices);
    TrainState state = init_state(config, h, w);
    res.best_state = state;
    double best = -std::numeric_limits<double>::infinity();
    const int T = config.epochs;

    for (int epoch = 0; epoch < T; ++epoch) {
        begin_epoch(state, epoch);
        std::vector<std::size_t> order = res.train_indices;
        auto rng = stream(config.seed, static_cast<std::uint32_t>(epoch), 0, kShuffle);
        std::shuffle(order.begin(), order.end(), rng);

        double sum = 0.0;
        for (std::size_t i : order) {
            const StepResult r = train_step(state, dataset[i]);
            sum += r.loss;
            if (config.noise.kind != NoiseKind::None)
                res.noise_log.push_back({epoch, dataset[i].id, r.noise_applied, config.noise.kind, r.noise_strength});
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.mean_loss = sum / static_cast<double>(order.size());
        m.val_psnr = validation_psnr(state, dataset, res.val_indices);
        m.gap = current_gap(state);
        m.lr = lr_schedule(epoch, std::max(T, 1), config.lr_recon_max, config.lr_warmup);
        m.noise_strength =
            config.noise.kind == NoiseKind::None ? 0.0 : scheduled_strength(config.noise, epoch, T);
        res.metrics.push_back(m);
        if (m.val_psnr > best) {
            best = m.val_psnr;
            res.best_state = state;
        }
        if (on_epoch) on_epoch(m);
    }
    state.epoch = T;
    res.final_state = std::move(state);
    return res;
}

}  // namespace kdg
