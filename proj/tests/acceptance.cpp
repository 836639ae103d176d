// Acceptance suite: one PASS/FAIL line per criterion, then a report table
// for the cross-domain experiments. Exit status is nonzero if any criterion
// fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kdg/acquisition.hpp"
#include "kdg/binary_io.hpp"
#include "kdg/commands.hpp"
#include "kdg/evaluation.hpp"
#include "kdg/perturbation.hpp"
#include "kdg/reconstructor.hpp"
#include "kdg/training.hpp"
#include "kdg/transform.hpp"
#include "oracles.hpp"

using namespace kdg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects sub-checks of one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            failures_ += (failures_.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
    Outcome done() const { return {pass_, pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_)}; }

private:
    bool pass_ = true;
    std::string failures_, notes_;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<KCoord> random_coords(std::size_t n, int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-w / 2.0, w / 2.0), uy(-h / 2.0, h / 2.0);
    std::vector<KCoord> c(n);
    for (auto& k : c) k = {ux(rng), uy(rng)};
    return c;
}

std::vector<Sample> phantoms(Domain d, int size, int n, std::uint64_t seed, std::uint32_t first_id = 0) {
    PhantomSpec s;
    s.domain = d;
    s.size = size;
    return generate_dataset(s, n, seed, first_id);
}

double mean_of(const std::vector<EvalRecord>& r) {
    double s = 0;
    for (const auto& e : r) s += e.psnr;
    return s / static_cast<double>(r.size());
}

// ---- 1 ----------------------------------------------------------------------

Outcome operator_exactness() {
    Checks c;
    const auto t0 = Clock::now();
    const int n = 64;
    const auto x = oracle::random_complex(n, n, 1);

    const auto k = fft2(x);
    std::vector<KCoord> grid;
    std::vector<oracle::cplx> expect;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            grid.push_back({double(v >= n / 2 ? v - n : v), double(u >= n / 2 ? u - n : u)});
            expect.push_back(k(u, v));
        }
    const auto s = nudft_forward(x, grid).values;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        num = std::max(num, std::abs(s[i] - expect[i]));
        den = std::max(den, std::abs(expect[i]));
    }
    c.expect(num / den <= 1e-8, "NUDFT-on-grid vs FFT rel " + fmt("%.2e", num / den));
    c.note("grid rel " + fmt("%.1e", num / den));

    double worst_adj = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto coords = seed == 0 ? make_fixed_radial(16, 64, n, n).coords : random_coords(1024, n, n, seed);
        const auto xi = oracle::random_complex(n, n, 10 + seed);
        KSamples y{oracle::random_complex(1, static_cast<int>(coords.size()), 20 + seed).storage()};
        const auto lhs = oracle::inner(nudft_forward(xi, coords).values, y.values);
        const auto rhs = oracle::inner(xi.data(), nudft_adjoint(y, coords, n, n).data());
        worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::abs(lhs));
    }
    {
        auto y = oracle::random_complex(n, n, 30);
        y.set_tag(DomainTag::KSpace);
        const auto lhs = oracle::inner(fft2(x).data(), y.data());
        const auto rhs = oracle::inner(x.data(), ifft2(y).data());
        worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::abs(lhs));
    }
    c.expect(worst_adj <= 1e-10, "adjoint identity rel " + fmt("%.2e", worst_adj));
    c.note("adjoint rel " + fmt("%.1e", worst_adj));

    const double pars = oracle::rel_err(oracle::norm2(k.data()), oracle::norm2(x.data()));
    c.expect(pars <= 1e-10, "Parseval rel " + fmt("%.2e", pars));
    c.note("Parseval rel " + fmt("%.1e", pars));

    const double dt = seconds_since(t0);
    c.expect(dt < 10.0, "took " + fmt("%.1f", dt) + " s");
    c.note(fmt("%.2f s", dt));
    return c.done();
}

// ---- 2 ----------------------------------------------------------------------

double inner_img(const kdg::Image& a, const kdg::Image& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

Outcome gradient_fidelity() {
    Checks c;
    const auto t0 = Clock::now();
    double worst_elsewhere = 0, worst_chain = 0;
    auto rel = [](double g, double fd) { return std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-12}); };

    {  // nudft_coord_grad
        const auto x = oracle::random_complex(32, 32, 1);
        auto coords = random_coords(12, 32, 32, 2);
        const auto u = oracle::random_complex(1, 12, 3);
        auto loss = [&] { return oracle::inner(u.data(), nudft_forward(x, coords).values).real(); };
        const auto g = nudft_coord_grad(x, coords, u.data());
        for (std::size_t j = 0; j < coords.size(); ++j) {
            worst_elsewhere = std::max(worst_elsewhere, rel(g[j].kx, oracle::central_diff(loss, coords[j].kx, 1e-5)));
            worst_elsewhere = std::max(worst_elsewhere, rel(g[j].ky, oracle::central_diff(loss, coords[j].ky, 1e-5)));
        }
    }
    {  // network parameters and input, smooth upstream
        auto p = init_params(ReconNetConfig{}, 4);
        auto x = oracle::random_image(32, 32, 5);
        const auto up = oracle::random_image(32, 32, 6, -1, 1);
        const auto br = backward_from(p, x, up);
        auto loss = [&] { return inner_img(forward(p, x), up); };
        std::mt19937_64 rng(7);
        for (std::size_t l = 0; l < p.layers.size(); ++l)
            for (int k = 0; k < 3; ++k) {
                const std::size_t i = p.layers[l].weight_offset + rng() % p.layers[l].weight_count();
                worst_elsewhere =
                    std::max(worst_elsewhere, rel(br.grads.params[i], oracle::central_diff(loss, p.values[i], 1e-6)));
            }
        for (std::size_t i = 0; i < x.size(); i += 37)
            worst_elsewhere =
                std::max(worst_elsewhere, rel(br.grads.input.data()[i], oracle::central_diff(loss, x.data()[i], 1e-6)));
    }
    {  // acquire -> recon -> L1 loss w.r.t. radial control points
        const int n = 64;
        const auto gt = phantoms(Domain::Source, n, 1, 8)[0].gt;
        const auto net = init_params(ReconNetConfig{}, 9);
        auto traj = parameterize(make_fixed_radial(16, 64, n, n), 8);
        auto& ctrl = *traj.control_points;
        for (std::size_t i = 0; i < ctrl.size(); ++i) ctrl[i].kx += 0.1 * std::sin(double(i)), ctrl[i].ky += 0.05;
        refresh_coords(traj);
        const auto a = acquire(gt, traj);
        const auto br = backward(net, a.net_input, gt);
        const auto g = controls_grad_from_coords(coord_grads(a.ctx, br.grads.input), traj.shots,
                                                 traj.controls_per_shot(), traj.points_per_shot);
        auto loss = [&] {
            refresh_coords(traj);
            return loss_l1(forward(net, acquire(gt, traj).net_input), gt);
        };
        for (std::size_t i : {std::size_t{1}, std::size_t{4}, std::size_t{40}, ctrl.size() - 3}) {
            worst_chain = std::max(worst_chain, rel(g[i].kx, oracle::central_diff(loss, ctrl[i].kx, 1e-6)));
            worst_chain = std::max(worst_chain, rel(g[i].ky, oracle::central_diff(loss, ctrl[i].ky, 1e-6)));
        }
    }
    c.expect(worst_elsewhere < 1e-5, "operator/network rel err " + fmt("%.2e", worst_elsewhere));
    c.expect(worst_chain < 1e-4, "full chain rel err " + fmt("%.2e", worst_chain));
    const double dt = seconds_since(t0);
    c.expect(dt < 60.0, "took " + fmt("%.1f", dt) + " s");
    c.note("max rel " + fmt("%.1e", worst_elsewhere) + ", chain " + fmt("%.1e", worst_chain) + ", " +
           fmt("%.1f s", dt));
    return c.done();
}

// ---- 3 ----------------------------------------------------------------------

Outcome schedule_exactness() {
    Checks c;
    const double T = 40, tw = 4;
    double worst = 0;
    for (double eps : {1.0, 0.5, 2.0}) {
        for (double t : {0.0, 1.0, 2.0, 3.0, 4.0, 10.0, 22.0, 31.0, 39.0, 40.0, 0.5, 20.5}) {
            const double ref = t <= tw ? eps * t / tw : eps * (T - t) / (T - tw);
            worst = std::max(worst, std::abs(noise_schedule(t, T, tw, eps) - ref));
        }
        c.expect(noise_schedule(tw, T, tw, eps) == eps, "peak at t_warmup != eps_max");
        c.expect(noise_schedule(0, T, tw, eps) == 0.0 && noise_schedule(T, T, tw, eps) == 0.0, "endpoints not 0");
    }
    c.expect(worst <= 2 * std::numeric_limits<double>::epsilon(), "max abs err " + fmt("%.2e", worst));
    c.note("max abs err " + fmt("%.1e", worst));
    return c.done();
}

// ---- 4 ----------------------------------------------------------------------

Outcome perturbation_contracts() {
    Checks c;
    std::mt19937_64 rng(11);
    auto count = [](const CartesianMask& m) { return std::accumulate(m.lines.begin(), m.lines.end(), 0); };
    auto hamming = [](const CartesianMask& a, const CartesianMask& b) {
        int d = 0;
        for (std::size_t i = 0; i < a.size(); ++i) d += a.lines[i] != b.lines[i];
        return d;
    };

    // strength 0
    const auto mask = make_fixed_cartesian(64, 16, 0.1, 1);
    const auto traj = make_fixed_radial(16, 64, 64, 64);
    std::vector<KCoord> g(traj.coords.size(), KCoord{0.3, -0.7});
    std::vector<double> lg(64, 1.0);
    const auto img = phantoms(Domain::Source, 64, 1, 2)[0].gt;
    c.expect(perturb_cartesian_random(mask, 10, 0, rng) == mask, "cartesian jitter at strength 0");
    c.expect(perturb_radial_random(traj, 30, 0, rng).coords == traj.coords, "radial jitter at strength 0");
    c.expect(fgsm_radial(traj, g, 1.0, 0).coords == traj.coords, "FGSM at strength 0");
    c.expect(adversarial_cartesian_xor(mask, lg, 0) == mask, "XOR at 0 bits");
    c.expect(image_noise(img, 6e-5, 0, rng) == img, "image noise at strength 0");

    // cardinality and XOR distance on 1000 random masks
    int bad_card = 0, bad_xor = 0;
    for (int t = 0; t < 1000; ++t) {
        CartesianMask m{std::vector<std::uint8_t>(64, 0)};
        std::vector<int> idx(64);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (int i = 0; i < 16; ++i) m.lines[idx[i]] = 1;
        std::normal_distribution<double> nd;
        std::vector<double> gr(64);
        for (auto& v : gr) v = nd(rng);
        const auto r = perturb_cartesian_random(m, 10, 1.0, rng);
        const auto x = adversarial_cartesian_xor(m, gr, 4);
        bad_card += count(r) != 16 || count(x) != 16;
        bad_xor += hamming(x, m) != 8;
    }
    c.expect(bad_card == 0, std::to_string(bad_card) + " masks changed cardinality");
    c.expect(bad_xor == 0, std::to_string(bad_xor) + " XOR results not at Hamming distance 8");

    // FGSM L-inf budget on dyadic coordinates (exact subtraction)
    auto dy = traj;
    for (auto& k : dy.coords) k = {std::round(k.kx * 4) / 4, std::round(k.ky * 4) / 4};
    std::normal_distribution<double> nd;
    for (auto& v : g) v = {nd(rng), nd(rng)};
    double linf = 0;
    const auto f = fgsm_radial(dy, g, 1.0, 1.0);
    for (std::size_t j = 0; j < g.size(); ++j)
        linf = std::max({linf, std::abs(f.coords[j].kx - dy.coords[j].kx), std::abs(f.coords[j].ky - dy.coords[j].ky)});
    c.expect(linf <= 1.0 && linf == 1.0, "FGSM L-inf " + fmt("%.17g", linf));

    // Monte-Carlo offset stds
    double ss = 0;
    std::size_t n = 0;
    for (int t = 0; t < 200; ++t) {
        std::vector<LineShift> sh;
        perturb_cartesian_random(make_fixed_cartesian(320, 80, 0.1, t), 10, 1.0, rng, &sh);
        for (const auto& s : sh) ss += double(s.to - s.from) * (s.to - s.from), ++n;
    }
    const double sc = std::sqrt(ss / n);
    ss = 0;
    n = 0;
    const auto big = make_fixed_radial(16, 1600 / 16, 320, 320);
    for (int t = 0; t < 20; ++t) {
        const auto p = perturb_radial_random(big, 30, 1.0, rng);
        for (std::size_t j = 0; j < big.coords.size(); ++j) {
            const double dx = p.coords[j].kx - big.coords[j].kx, dyy = p.coords[j].ky - big.coords[j].ky;
            ss += dx * dx + dyy * dyy;
            n += 2;
        }
    }
    const double sr = std::sqrt(ss / n);
    c.expect(std::abs(sc - 10) <= 0.5, "cartesian offset std " + fmt("%.3f", sc));
    c.expect(std::abs(sr - 30) <= 1.5, "radial offset std " + fmt("%.3f", sr));
    c.note("offset std " + fmt("%.2f", sc) + " (tau 10), " + fmt("%.2f", sr) + " (tau 30)");
    return c.done();
}

// ---- 5 ----------------------------------------------------------------------

Outcome fgsm_efficacy() {
    Checks c;
    const auto t0 = Clock::now();
    const int n = 64;
    TrainConfig cfg;
    cfg.sampling = Sampling::Radial;
    cfg.epochs = 8;
    cfg.seed = 5;
    const auto train_set = phantoms(Domain::Source, n, 100, 51);
    const auto val = phantoms(Domain::Source, n, 60, 52, 100000);
    const TrainResult res = train(cfg, train_set);
    const ReconNetParams& net = res.final_state.params;
    const auto& traj = std::get<RadialTrajectory>(res.final_state.pattern);

    struct Losses {
        double clean = 0, adv = 0, rnd = 0;
        int adv_wins = 0;
    };
    auto compare = [&](double eps) {
        std::mt19937_64 rng(53);
        std::bernoulli_distribution coin(0.5);
        Losses l;
        for (const auto& s : val) {
            const auto a = acquire(s.gt, traj);
            const auto br = backward(net, a.net_input, s.gt);
            const auto g = coord_grads(a.ctx, br.grads.input);
            const auto pa = fgsm_radial(traj, g, eps, 1.0);
            // random signs: same L-inf radius as FGSM
            RadialTrajectory pr = traj;
            for (auto& k : pr.coords) k.kx += coin(rng) ? eps : -eps, k.ky += coin(rng) ? eps : -eps;
            const double la = loss_l1(forward(net, acquire(s.gt, pa).net_input), s.gt);
            const double lr = loss_l1(forward(net, acquire(s.gt, pr).net_input), s.gt);
            l.clean += br.loss;
            l.adv += la;
            l.rnd += lr;
            l.adv_wins += la >= lr;
        }
        return l;
    };
    const Losses at = compare(NoiseConfig{}.epsilon_adv);
    const Losses small = compare(0.1);
    const double clean = at.clean, adv = at.adv, rnd = at.rnd;
    const int adv_wins = at.adv_wins;
    const double m = static_cast<double>(val.size());
    c.expect(adv / m >= rnd / m, "mean FGSM loss " + fmt("%.5f", adv / m) + " < random " + fmt("%.5f", rnd / m));
    const double dt = seconds_since(t0);
    c.expect(dt < 300.0, "took " + fmt("%.0f", dt) + " s");
    c.note("loss clean " + fmt("%.5f", clean / m) + ", random " + fmt("%.5f", rnd / m) + ", FGSM " +
           fmt("%.5f", adv / m) + " (FGSM >= random on " + std::to_string(adv_wins) + "/" +
           std::to_string(val.size()) + "); at eps 0.1 FGSM " + fmt("%.5f", small.adv / m) + " vs random " +
           fmt("%.5f", small.rnd / m) + ", " + fmt("%.0f s", dt));
    return c.done();
}

// ---- 6 ----------------------------------------------------------------------

Outcome training_sanity() {
    Checks c;
    const auto t0 = Clock::now();
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.sampling = Sampling::Cartesian;
    cfg.acceleration = 4;
    cfg.seed = 6;
    const auto data = phantoms(Domain::Source, 64, 200, 61);
    const TrainResult res = train(cfg, data);
    double zf = 0;
    for (std::size_t i : res.val_indices) {
        const auto a = acquire(data[i].gt, res.final_state.pattern);
        zf += psnr(a.net_input, data[i].gt);
    }
    zf /= static_cast<double>(res.val_indices.size());
    const double val = validation_psnr(res.final_state, data, res.val_indices);
    c.expect(val >= zf + 3.0, "val PSNR " + fmt("%.2f", val) + " < zero-filled " + fmt("%.2f", zf) + " + 3");
    const double dt = seconds_since(t0);
    c.expect(dt < 600.0, "took " + fmt("%.0f", dt) + " s");
    c.note("val PSNR " + fmt("%.2f", val) + " dB vs zero-filled " + fmt("%.2f", zf) + " dB (" +
           std::to_string(res.val_indices.size()) + " val samples), " + fmt("%.0f s", dt));
    return c.done();
}

// ---- 7, 8 -------------------------------------------------------------------

// Desk-scale cross-domain study. Each seed trains on its own source set and
// is scored on held-out source and target phantoms.
constexpr int kCdSeeds = 5;
constexpr int kCdSize = 32;
constexpr int kCdTrain = 200;
constexpr int kCdTest = 50;
constexpr int kCdEpochs = 20;
constexpr double kCdLrRecon = 2e-3;

struct SeedRuns {
    std::map<std::string, std::vector<EvalRecord>> source, target;
    double radial_seconds = 0;
};

std::vector<SeedRuns> cross_domain_runs() {
    std::vector<SeedRuns> all;
    const std::vector<ModelTag> tags = {
        {Sampling::Radial, false, NoiseKind::None},      {Sampling::Radial, true, NoiseKind::None},
        {Sampling::Cartesian, false, NoiseKind::None},   {Sampling::Cartesian, false, NoiseKind::Image},
        {Sampling::Cartesian, false, NoiseKind::Trajectory},
    };
    for (int seed = 0; seed < kCdSeeds; ++seed) {
        SeedRuns r;
        const std::uint64_t base = 1000 + 10 * seed;
        const auto train_set = phantoms(Domain::Source, kCdSize, kCdTrain, base);
        const auto src = phantoms(Domain::Source, kCdSize, kCdTest, base + 1, 100000);
        const auto tgt = phantoms(Domain::Target, kCdSize, kCdTest, base + 2, 200000);
        for (const auto& tag : tags) {
            TrainConfig cfg;
            cfg.sampling = tag.sampling;
            cfg.trajectory_learning = tag.trajectory_learning;
            cfg.epochs = kCdEpochs;
            cfg.lr_recon_max = kCdLrRecon;
            cfg.seed = static_cast<std::uint64_t>(seed);
            cfg.noise.kind = tag.noise;
            cfg.noise = cfg.noise.scaled_to_grid(kCdSize);
            const auto t0 = Clock::now();
            const TrainResult res = train(cfg, train_set);
            if (tag.sampling == Sampling::Radial) r.radial_seconds += seconds_since(t0);
            const TrainedModel m{tag, tag.name(), res.final_state.params, res.final_state.pattern};
            r.source[m.name] = evaluate_model(m, src);
            r.target[m.name] = evaluate_model(m, tgt);
        }
        std::fprintf(stderr, "  cross-domain seed %d done\n", seed);
        all.push_back(std::move(r));
    }
    return all;
}

const std::string kRadFixed = "radial_fixed_none", kRadTl = "radial_tl_none";
const std::string kCartNone = "cartesian_fixed_none", kCartImage = "cartesian_fixed_image",
                  kCartTraj = "cartesian_fixed_trajectory";

Outcome in_domain_tl(const std::vector<SeedRuns>& runs) {
    Checks c;
    int wins = 0;
    double secs = 0;
    std::string per_seed;
    for (const auto& r : runs) {
        const double fixed = mean_of(r.source.at(kRadFixed)), tl = mean_of(r.source.at(kRadTl));
        wins += tl >= fixed;
        secs += r.radial_seconds;
        per_seed += fmt(" %+.2f", tl - fixed);
    }
    c.expect(wins >= 4, "learned radial >= fixed in " + std::to_string(wins) + "/5 seeds");
    c.expect(secs < 3600, "radial training took " + fmt("%.0f", secs) + " s");
    c.note("learned >= fixed in " + std::to_string(wins) + "/5 seeds, learned-fixed dB:" + per_seed + ", " +
           fmt("%.0f s", secs));
    return c.done();
}

Outcome cross_domain(const std::vector<SeedRuns>& runs) {
    Checks c;
    int a = 0, b = 0;
    for (const auto& r : runs) {
        a += paired_diff(r.target.at(kRadFixed), r.target.at(kRadTl)).mean_diff < 0;
        b += mean_of(r.target.at(kCartTraj)) > mean_of(r.target.at(kCartImage));
    }
    c.expect(a >= 4, "(a) fixed-TL radial target mean negative in " + std::to_string(a) + "/5 seeds");
    c.expect(b >= 4, "(b) trajectory noise > image noise on target in " + std::to_string(b) + "/5 seeds");
    c.note("(a) " + std::to_string(a) + "/5, (b) " + std::to_string(b) + "/5");
    return c.done();
}

void print_table(const std::vector<SeedRuns>& runs) {
    auto cell = [](const std::vector<double>& v) {
        const MeanStd ms = mean_std(v);
        return fmt("%+7.3f", ms.mean) + " (" + fmt("%.3f", ms.std) + ")";
    };
    std::printf("\nPaired mean PSNR differences in dB over %d seeds, mean (std across seeds)\n", kCdSeeds);
    std::printf("%-34s %-20s %-20s\n", "No-TL minus TL", "source", "target");
    std::vector<double> ds, dt;
    for (const auto& r : runs) {
        ds.push_back(paired_diff(r.source.at(kRadFixed), r.source.at(kRadTl)).mean_diff);
        dt.push_back(paired_diff(r.target.at(kRadFixed), r.target.at(kRadTl)).mean_diff);
    }
    std::printf("%-34s %-20s %-20s\n", "radial U-Net", cell(ds).c_str(), cell(dt).c_str());
    std::printf("%-34s %-20s %-20s\n", "Noise minus No-Noise (fixed)", "source", "target");
    for (const auto& [label, name] : {std::pair{"cartesian image noise", kCartImage},
                                      std::pair{"cartesian trajectory noise", kCartTraj}}) {
        std::vector<double> ns, nt;
        for (const auto& r : runs) {
            ns.push_back(paired_diff(r.source.at(name), r.source.at(kCartNone)).mean_diff);
            nt.push_back(paired_diff(r.target.at(name), r.target.at(kCartNone)).mean_diff);
        }
        std::printf("%-34s %-20s %-20s\n", label, cell(ns).c_str(), cell(nt).c_str());
    }
    std::printf("%-34s", "per-seed target means (dB)");
    for (const auto& n : {kRadFixed, kRadTl, kCartNone, kCartImage, kCartTraj}) std::printf(" %s", n.c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::printf("  seed %zu%26s", i, "");
        for (const auto& n : {kRadFixed, kRadTl, kCartNone, kCartImage, kCartTraj})
            std::printf(" %.3f", mean_of(runs[i].target.at(n)));
        std::printf("\n");
    }
}

// ---- 9, 10 ------------------------------------------------------------------

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "kdg");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (rc != 0) std::fprintf(stderr, "kdg %s failed (%d): %s\n", args[1].c_str(), rc, err.str().c_str());
    return rc;
}

std::vector<std::uint8_t> bytes_of(const fs::path& p) { return bin::read_file(p.string()); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
        std::vector<std::string> r;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) r.push_back(cell);
        rows.push_back(r);
    }
    return rows;
}

const fs::path& cli_root() {
    static const fs::path root = fs::temp_directory_path() / "kdg_acceptance_cli";
    return root;
}

// gen-data, train --grid, eval and export into `out`.
bool run_pipeline(const fs::path& out, const fs::path& cfg) {
    const std::string o = out.string(), c = cfg.string();
    return cli({"gen-data", "--config", c, "--out", o, "--seed", "17"}) == 0 &&
           cli({"train", "--config", c, "--out", o, "--seed", "17", "--grid"}) == 0 &&
           cli({"eval", "--config", c, "--out", o, "--seed", "17"}) == 0 &&
           cli({"export", "--config", c, "--out", o, "--seed", "17"}) == 0;
}

Outcome reproducibility() {
    Checks c;
    fs::remove_all(cli_root());
    fs::create_directories(cli_root());
    const fs::path cfg = cli_root() / "config.json";
    {
        std::ofstream f(cfg);
        f << R"({"data": {"size": 16, "n_source": 10, "n_target": 6},
 "train": {"epochs": 3, "radial_shots": 4, "initial_gap": 2, "val_fraction": 0.2,
           "model": {"depth": 2, "base_channels": 2}},
 "export": {"count": 2}})";
    }
    // Both runs use the same --out, which config.json and manifest.json record.
    const fs::path work = cli_root() / "run", a = cli_root() / "a", b = cli_root() / "b";
    c.expect(run_pipeline(work, cfg), "first pipeline run failed");
    fs::rename(work, a);
    c.expect(run_pipeline(work, cfg), "second pipeline run failed");
    fs::rename(work, b);
    int compared = 0, differ = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a);
        ++compared;
        if (!fs::exists(b / rel) || bytes_of(e.path()) != bytes_of(b / rel)) {
            ++differ;
            c.expect(false, rel.string() + " differs");
        }
    }
    int metrics = 0, ckpts = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        metrics += e.path().filename() == "metrics.csv";
        ckpts += e.path().filename() == "checkpoint.kdgw";
    }
    c.expect(metrics == 16 && ckpts == 16, "expected 16 metrics CSVs and checkpoints");
    c.note(std::to_string(compared) + " files byte-identical across two runs (" + std::to_string(metrics) +
           " metrics CSVs, " + std::to_string(ckpts) + " checkpoints)");
    return c.done();
}

Outcome grid_completeness() {
    Checks c;
    const fs::path out = cli_root() / "a";
    if (!fs::exists(out / "eval" / "matrix.csv")) {
        c.expect(false, "pipeline output missing");
        return c.done();
    }
    int runs = 0;
    for (const auto& e : fs::directory_iterator(out / "runs")) runs += e.is_directory();
    c.expect(runs == 16, std::to_string(runs) + " run directories");

    std::map<std::string, double> cell;
    for (const auto& r : read_csv(out / "eval" / "matrix.csv")) cell[r[0] + "/" + r[1]] = std::stod(r[2]);
    c.expect(cell.size() == 32, std::to_string(cell.size()) + " matrix cells");

    auto ends_with = [](const std::string& s, const std::string& t) {
        return s.size() >= t.size() && s.compare(s.size() - t.size(), t.size(), t) == 0;
    };
    int tl_rows = 0, noise_rows = 0;
    for (const char* dom : {"source", "target"}) {
        for (const auto& r : read_csv(out / "eval" / (std::string("paired_tl_") + dom + ".csv"))) {
            ++tl_rows;
            // No-TL minus TL, same sampling and noise
            std::string expect_b = r[0];
            expect_b.replace(expect_b.find("_fixed_"), 7, "_tl_");
            c.expect(r[0].find("_fixed_") != std::string::npos && r[1] == expect_b, "bad TL pair " + r[0] + "," + r[1]);
            const double d = cell[r[0] + "/" + dom] - cell[r[1] + "/" + dom];
            c.expect(std::abs(std::stod(r[2]) - d) < 1e-9, "TL sign/mean mismatch for " + r[0]);
        }
        for (const auto& r : read_csv(out / "eval" / (std::string("paired_noise_") + dom + ".csv"))) {
            ++noise_rows;
            // Noise minus No-Noise, fixed trajectories
            c.expect(r[0].find("_fixed_") != std::string::npos && ends_with(r[1], "_none") && !ends_with(r[0], "_none"),
                     "bad noise pair " + r[0] + "," + r[1]);
            const double d = cell[r[0] + "/" + dom] - cell[r[1] + "/" + dom];
            c.expect(std::abs(std::stod(r[2]) - d) < 1e-9, "noise sign/mean mismatch for " + r[0]);
        }
    }
    c.expect(tl_rows == 16, std::to_string(tl_rows) + " TL rows");
    c.expect(noise_rows == 12, std::to_string(noise_rows) + " noise rows");
    c.note("16 runs, 32 cells, " + std::to_string(tl_rows) + " TL rows, " + std::to_string(noise_rows) +
           " noise rows, signs consistent with the matrix");
    return c.done();
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, Outcome>> results;
    auto run = [&](const std::string& title, const std::function<Outcome()>& f) {
        std::fprintf(stderr, "running %s\n", title.c_str());
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        results.emplace_back(title, o);
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", results.size(), title.c_str(), o.detail.c_str());
        std::fflush(stdout);
    };
    run("operator exactness", operator_exactness);
    run("gradient fidelity", gradient_fidelity);
    run("schedule exactness", schedule_exactness);
    run("perturbation contracts", perturbation_contracts);
    run("FGSM efficacy", fgsm_efficacy);
    run("training sanity", training_sanity);

    std::vector<SeedRuns> cd;
    std::string cd_error;
    try {
        cd = cross_domain_runs();
    } catch (const std::exception& e) {
        cd_error = e.what();
    }
    auto guarded = [&](Outcome (*f)(const std::vector<SeedRuns>&)) {
        return [&, f] { return cd_error.empty() ? f(cd) : Outcome{false, "exception: " + cd_error}; };
    };
    run("in-domain TL benefit", guarded(in_domain_tl));
    run("cross-domain sign structure", guarded(cross_domain));
    run("reproducibility", reproducibility);
    run("grid completeness", grid_completeness);

    if (cd_error.empty()) print_table(cd);
    fs::remove_all(cli_root());

    int failed = 0;
    for (const auto& [t, o] : results) failed += !o.pass;
    std::printf("\n%zu/%zu criteria passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 1;
}
