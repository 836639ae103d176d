#include <gtest/gtest.h>

#include <numeric>

#include "kdg/error.hpp"
#include "kdg/perturbation.hpp"
#include "kdg/trajectory.hpp"
#include "oracles.hpp"

using namespace kdg;

namespace {

int count_ones(const CartesianMask& m) { return std::accumulate(m.lines.begin(), m.lines.end(), 0); }

int hamming(const CartesianMask& a, const CartesianMask& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a.lines[i] != b.lines[i];
    return d;
}

CartesianMask random_mask(int h, int n, std::mt19937_64& rng) {
    std::vector<int> idx(h);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    CartesianMask m{std::vector<std::uint8_t>(h, 0)};
    for (int i = 0; i < n; ++i) m.lines[idx[i]] = 1;
    return m;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

// Closed form: eps_max * t / tw for t <= tw, eps_max * (T - t) / (T - tw) after.
TEST(Schedule, ClosedFormValues) {
    const double T = 40, tw = 4, e = 1.0;
    EXPECT_EQ(noise_schedule(0, T, tw, e), 0.0);
    EXPECT_EQ(noise_schedule(tw, T, tw, e), e);
    EXPECT_EQ(noise_schedule(T, T, tw, e), 0.0);
    EXPECT_EQ(noise_schedule(2, T, tw, e), 0.5);
    EXPECT_EQ(noise_schedule(22, T, tw, e), 0.5);
    for (double t = 0; t <= T; t += 0.5) {
        const double ref = t <= tw ? e * t / tw : e * (T - t) / (T - tw);
        EXPECT_NEAR(noise_schedule(t, T, tw, e), ref, 1e-15);
    }
    EXPECT_EQ(noise_schedule(4, 40, 4, 2.5), 2.5);
}

TEST(Schedule, RejectsBadArguments) {
    EXPECT_THROW(noise_schedule(-1, 40, 4, 1), ArgumentError);
    EXPECT_THROW(noise_schedule(41, 40, 4, 1), ArgumentError);
    EXPECT_THROW(noise_schedule(1, 40, 0, 1), ArgumentError);
    EXPECT_THROW(noise_schedule(1, 4, 4, 1), ArgumentError);
}

TEST(Schedule, ScheduledStrengthClampsWarmup) {
    NoiseConfig c;
    EXPECT_EQ(scheduled_strength(c, 4, 40), 1.0);
    EXPECT_EQ(scheduled_strength(c, 2, 3), 1.0);  // tw clamped to 2
    EXPECT_EQ(scheduled_strength(c, 0, 1), 1.0);
}

TEST(Perturbation, StrengthZeroIsIdentity) {
    std::mt19937_64 rng(1);
    const auto m = random_mask(64, 16, rng);
    const auto t = make_fixed_radial(4, 8, 32, 32);
    const auto img = oracle::random_image(8, 8, 2);
    std::vector<KCoord> g(t.coords.size(), KCoord{1.0, -1.0});

    EXPECT_EQ(perturb_cartesian_random(m, 10, 0.0, rng), m);
    EXPECT_EQ(perturb_radial_random(t, 30, 0.0, rng).coords, t.coords);
    EXPECT_EQ(fgsm_radial(t, g, 1.0, 0.0).coords, t.coords);
    EXPECT_EQ(adversarial_cartesian_xor(m, random_vec(64, rng), 0), m);
    EXPECT_EQ(image_noise(img, 6e-5, 0.0, rng), img);
    const auto ci = oracle::random_complex(8, 8, 3);
    const auto cn = image_noise(ci, 1.0, 0.0, rng);
    for (std::size_t i = 0; i < ci.size(); ++i) EXPECT_EQ(cn.data()[i], ci.data()[i]);
}

TEST(Perturbation, CardinalityPreservedOnThousandMasks) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const int h = 16 + static_cast<int>(rng() % 113);
        const int n = 1 + static_cast<int>(rng() % (h - 1));
        const auto m = random_mask(h, n, rng);
        const auto r = perturb_cartesian_random(m, 10, 1.0, rng);
        ASSERT_EQ(count_ones(r), n) << "random, trial " << trial;
        const int bits = std::min({4, n, h - n});
        const auto x = adversarial_cartesian_xor(m, random_vec(h, rng), bits);
        ASSERT_EQ(count_ones(x), n) << "xor, trial " << trial;
        ASSERT_EQ(hamming(x, m), 2 * bits);
    }
}

TEST(Perturbation, XorFlipsEightEntriesAtFourBits) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = random_mask(64, 16, rng);
        EXPECT_EQ(hamming(adversarial_cartesian_xor(m, random_vec(64, rng), 4), m), 8);
    }
}

TEST(Perturbation, XorPicksByGradientMagnitude) {
    CartesianMask m{{1, 1, 1, 0, 0, 0}};
    const std::vector<double> g{0.1, -5.0, 0.3, 2.0, 0.01, -0.2};
    // removes line 1 (|g| largest among on), adds line 4 (smallest among off)
    EXPECT_EQ(adversarial_cartesian_xor(m, g, 1).lines, (std::vector<std::uint8_t>{1, 0, 1, 0, 1, 0}));
    EXPECT_THROW(adversarial_cartesian_xor(m, g, 4), ArgumentError);
}

TEST(Perturbation, FgsmRespectsLinfBudgetExactly) {
    std::mt19937_64 rng(11);
    // dyadic coordinates keep the measured offsets free of rounding
    auto t = make_fixed_radial(8, 16, 64, 64);
    for (auto& c : t.coords) c = {std::round(c.kx * 8) / 8, std::round(c.ky * 8) / 8};
    std::normal_distribution<double> d;
    std::vector<KCoord> g(t.coords.size());
    for (auto& v : g) v = {d(rng), d(rng)};
    g[3] = {0.0, 0.0};
    for (double eps : {0.25, 1.0, 3.0}) {
        for (double s : {0.5, 1.0}) {
            const auto p = fgsm_radial(t, g, eps, s);
            double linf = 0;
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double dx = p.coords[j].kx - t.coords[j].kx, dy = p.coords[j].ky - t.coords[j].ky;
                linf = std::max({linf, std::abs(dx), std::abs(dy)});
                if (g[j].kx != 0) EXPECT_GT(dx * g[j].kx, 0.0);
            }
            EXPECT_LE(linf, eps * s);
            EXPECT_EQ(linf, eps * s);
            EXPECT_EQ(p.coords[3], t.coords[3]);  // sign(0) = 0
        }
    }
}

TEST(Perturbation, RadialJitterStdMatchesTau) {
    std::mt19937_64 rng(13);
    const auto t = make_fixed_radial(16, 64, 320, 320);
    double ss = 0;
    std::size_t n = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = perturb_radial_random(t, 30, 1.0, rng);
        for (std::size_t j = 0; j < t.coords.size(); ++j) {
            const double dx = p.coords[j].kx - t.coords[j].kx, dy = p.coords[j].ky - t.coords[j].ky;
            ss += dx * dx + dy * dy;
            n += 2;
        }
    }
    EXPECT_NEAR(std::sqrt(ss / n), 30.0, 0.05 * 30.0);
}

TEST(Perturbation, CartesianJitterStdMatchesTau) {
    // 80 of 320 lines, as in the 4x acquisition the jitter magnitude targets.
    std::mt19937_64 rng(17);
    double ss = 0;
    std::size_t n = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = make_fixed_cartesian(320, 80, 0.1, trial);
        std::vector<LineShift> shifts;
        perturb_cartesian_random(m, 10, 1.0, rng, &shifts);
        for (const auto& s : shifts) {
            ss += double(s.to - s.from) * (s.to - s.from);
            ++n;
        }
    }
    EXPECT_NEAR(std::sqrt(ss / n), 10.0, 0.05 * 10.0);
}

TEST(Perturbation, ImageNoiseStd) {
    std::mt19937_64 rng(19);
    const kdg::Image z(128, 128, 0.0);
    const auto p = image_noise(z, 6e-5, 1.0, rng);
    double ss = 0;
    for (double v : p.data()) ss += v * v;
    EXPECT_NEAR(std::sqrt(ss / p.size()), 6e-5, 0.05 * 6e-5);
}

TEST(Perturbation, ScaledToGrid) {
    NoiseConfig c;
    const auto s = c.scaled_to_grid(64, 320);
    EXPECT_DOUBLE_EQ(s.tau_cartesian, 2.0);
    EXPECT_DOUBLE_EQ(s.tau_radial, 6.0);
    EXPECT_EQ(s.num_bits, 1);
    EXPECT_EQ(c.scaled_to_grid(320, 320), c);
}

TEST(Gate, NoneNeverAppliesAndDrawsNothing) {
    std::mt19937_64 rng(21), ref(21);
    NoiseConfig c;
    const auto r = apply_dg({oracle::random_image(8, 8, 1), make_fixed_cartesian(8, 2, 0.1, 0)}, c, 4, 40, rng);
    EXPECT_FALSE(r.applied);
    EXPECT_EQ(rng(), ref());
}

TEST(Gate, BernoulliRateMatchesApplyProb) {
    NoiseConfig c;
    c.kind = NoiseKind::Trajectory;
    std::mt19937_64 rng(23);
    const auto mask = make_fixed_cartesian(64, 16, 0.1, 0);
    int applied = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const auto r = apply_dg({kdg::Image(64, 64), mask}, c, 4, 40, rng);
        if (r.applied) {
            ++applied;
            EXPECT_EQ(r.strength, 1.0);
            EXPECT_EQ(count_ones(std::get<CartesianMask>(r.inputs.pattern)), 16);
        } else {
            EXPECT_EQ(std::get<CartesianMask>(r.inputs.pattern), mask);
        }
    }
    // binomial sd is sqrt(n/4) ~ 32
    EXPECT_NEAR(applied, n / 2, 4 * 32);
}

TEST(Gate, AdversarialNeedsGradients) {
    NoiseConfig c;
    c.kind = NoiseKind::TrajectoryAdversarial;
    std::mt19937_64 rng(1);
    EXPECT_THROW(apply_dg({kdg::Image(8, 8), make_fixed_cartesian(8, 2, 0.1, 0)}, c, 4, 40, rng), ArgumentError);
}

TEST(Gate, AdversarialCartesianFlipsScaledBits) {
    NoiseConfig c;
    c.kind = NoiseKind::TrajectoryAdversarial;
    c.apply_prob = 1.0;
    GradProvider gp;
    gp.line_grads = [](const kdg::Image&, const CartesianMask& m) {
        std::vector<double> g(m.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = double(i);
        return g;
    };
    std::mt19937_64 rng(3);
    const auto mask = make_fixed_cartesian(64, 16, 0.1, 0);
    // epoch 2 of 40 with warmup 4 gives strength 0.5, so round(0.5 * 4) = 2 bits
    const auto r = apply_dg({kdg::Image(64, 64), mask}, c, 2, 40, rng, &gp);
    EXPECT_EQ(r.strength, 0.5);
    EXPECT_EQ(hamming(std::get<CartesianMask>(r.inputs.pattern), mask), 4);
}

TEST(NoiseKinds, NamesRoundTrip) {
    for (auto k : {NoiseKind::None, NoiseKind::Image, NoiseKind::Trajectory, NoiseKind::TrajectoryAdversarial})
        EXPECT_EQ(parse_noise_kind(noise_kind_name(k)), k);
    EXPECT_THROW(parse_noise_kind("gaussian"), ArgumentError);
}
