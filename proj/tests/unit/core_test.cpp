#include "icdm/core/belief.hpp"
#include "icdm/core/config.hpp"
#include "icdm/core/error.hpp"
#include "icdm/core/parallel.hpp"
#include "icdm/core/rng.hpp"
#include "icdm/core/task.hpp"
#include "icdm/envs/energy.hpp"
#include "icdm/rollout/rollout.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace icdm;

namespace {

Kernel identity_kernel(std::size_t n, std::size_t actions)
{
    std::vector<double> data(n * actions * n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < actions; ++a) {
            data[(s * actions + a) * n + s] = 1.0;
        }
    }
    return Kernel(n, actions, n, std::move(data));
}

} // namespace

TEST(Rng, SameSeedSameSequence)
{
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) {
        ASSERT_EQ(a.next(), b.next());
    }
}

TEST(Rng, MatchesReferenceMersenneTwister)
{
    // 10000th output of the default-seeded MT19937-64
    Rng rng(5489);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) {
        x = rng.next();
    }
    EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, StreamsAreDistinct)
{
    auto a = Rng::stream(7, 0);
    auto b = Rng::stream(7, 1);
    EXPECT_NE(a.next(), b.next());
    auto c = Rng::stream(7, 1);
    auto d = Rng::stream(7, 1);
    EXPECT_EQ(c.next(), d.next());
}

TEST(Rng, UniformMoments)
{
    Rng rng(1);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // sd of the mean is sqrt(1/12 / n)
    EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, NormalMoments)
{
    Rng rng(2);
    const int n = 200000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 3.0 / std::sqrt(n));
    // var of z^2 is 2
    EXPECT_NEAR(sq / n, 1.0, 3.0 * std::sqrt(2.0 / n));
}

TEST(Rng, GammaMean)
{
    Rng rng(3);
    for (double shape : {0.3, 1.0, 4.5}) {
        const int n = 100000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            sum += rng.gamma(shape);
        }
        EXPECT_NEAR(sum / n, shape, 3.0 * std::sqrt(shape / n)) << shape;
    }
}

TEST(Rng, CategoricalFrequencies)
{
    Rng rng(4);
    const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
    std::vector<int> counts(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ++counts[rng.categorical(p)];
    }
    EXPECT_EQ(counts[1], 0);
    for (std::size_t k = 0; k < p.size(); ++k) {
        EXPECT_NEAR(counts[k] / double(n), p[k], 3.0 * std::sqrt(p[k] * (1 - p[k]) / n) + 1e-12);
    }
}

TEST(Rng, DirichletZeroAlphaGivesZero)
{
    Rng rng(5);
    const std::vector<double> alpha{2.0, 0.0, 3.0};
    for (int i = 0; i < 100; ++i) {
        const auto d = rng.dirichlet(alpha);
        EXPECT_EQ(d[1], 0.0);
        EXPECT_NEAR(d[0] + d[2], 1.0, 1e-12);
    }
}

TEST(Kernel, RejectsNonStochasticRows)
{
    EXPECT_THROW(Kernel(1, 1, 2, {0.5, 0.6}), ModelError);
    EXPECT_THROW(Kernel(1, 1, 2, {1.2, -0.2}), ModelError);
    EXPECT_THROW(Kernel(1, 1, 2, {1.0}), ModelError);
    EXPECT_NO_THROW(Kernel(1, 1, 2, {0.5, 0.5}));
}

TEST(Belief, ValidatesAndRenormalizes)
{
    EXPECT_THROW(Belief({0.5, 0.6}), ModelError);
    EXPECT_THROW(Belief({1.1, -0.1}), ModelError);
    const Belief b({0.25, 0.75 + 1e-12});
    EXPECT_NEAR(b[0] + b[1], 1.0, 1e-15);
}

TEST(Belief, DeterministicChainMovesTheDelta)
{
    // 2 -> 3 under action 0, identity observations
    const std::size_t n = 4;
    std::vector<double> t(n * n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        t[s * n + std::min(n - 1, s + 1)] = 1.0;
    }
    const Kernel transition(n, 1, n, t);
    const auto post = belief_update(Belief::delta(n, 2), 0, 3, transition, identity_kernel(n, 1));
    EXPECT_EQ(post, Belief::delta(n, 3));
}

TEST(Belief, DirectBayesRule)
{
    const Kernel obs(2, 1, 2, {0.8, 0.2, 0.2, 0.8});
    const auto post = belief_update(Belief::uniform(2), 0, 0, identity_kernel(2, 1), obs);
    EXPECT_NEAR(post[0], 0.8, 1e-15);
    EXPECT_NEAR(post[1], 0.2, 1e-15);
}

TEST(Belief, ZeroLikelihoodThrows)
{
    const auto id = identity_kernel(3, 1);
    EXPECT_THROW(belief_update(Belief::delta(3, 0), 0, 2, id, id), ZeroLikelihood);
}

TEST(Belief, EnergySequenceMatchesPathEnumeration)
{
    envs::EnergyParams params;
    params.energy_cap = 3;
    params.obs_prob = 0.6;
    params.success_prob = 0.7;
    params.horizon = 3;
    const auto pomdp = envs::gen_energy_pomdp(params);
    Task task{"t", Setting::pomdp, pomdp};
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> obs;
        std::vector<int> acts;
        Trajectory history;
        for (int k = 0; k < 3; ++k) {
            obs.push_back(static_cast<int>(rng.index(4)));
            if (k < 2) {
                acts.push_back(static_cast<int>(rng.index(3)));
                history.steps.push_back({obs.back(), acts.back(), 0.0});
            }
        }
        const auto expected = oracle::path_posterior(pomdp, obs, acts);
        const auto b = rollout::belief_from_history(task, history, obs.back());
        for (std::size_t s = 0; s < expected.size(); ++s) {
            EXPECT_NEAR(b[s], expected[s], 1e-12);
        }
    }
}

TEST(Belief, PredictiveIdentityAndUniform)
{
    const auto id = identity_kernel(3, 1);
    const auto p = belief_predictive(Belief::delta(3, 1), 0, id, id);
    EXPECT_EQ(p, (std::vector<double>{0.0, 1.0, 0.0}));
    const Kernel uniform_obs(3, 1, 3, std::vector<double>(9, 1.0 / 3.0));
    const auto u = belief_predictive(Belief::uniform(3), 0, id, uniform_obs);
    for (double x : u) {
        EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
    }
}

TEST(Belief, EnergyPredictiveMatchesClosedFormAndMonteCarlo)
{
    envs::EnergyParams params;
    params.obs_prob = 0.8;
    params.success_prob = 0.7;
    const auto pomdp = envs::gen_energy_pomdp(params);
    const auto& tr = pomdp.mdp().transition();
    const auto& ob = pomdp.observation();
    const auto b = Belief::delta(10, 4);
    const auto pred = belief_predictive(b, envs::charge, tr, ob);
    // successor 5 with 0.7, stay at 4 with 0.3
    EXPECT_NEAR(pred[5], 0.8 * 0.7 + (0.2 / 9) * 0.3, 1e-15);
    EXPECT_NEAR(pred[4], 0.8 * 0.3 + (0.2 / 9) * 0.7, 1e-15);
    EXPECT_NEAR(pred[0], 0.2 / 9, 1e-15);

    Rng rng(99);
    const int n = 1000000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const auto s = rng.categorical(tr.row(4, envs::charge));
        hits += rng.categorical(ob.row(s, envs::charge)) == 5 ? 1 : 0;
    }
    const double f = hits / double(n);
    EXPECT_NEAR(f, pred[5], 3.0 * std::sqrt(pred[5] * (1 - pred[5]) / n));
}

TEST(Divergence, ClosedForms)
{
    const std::vector<double> p{0.2, 0.3, 0.5};
    EXPECT_EQ(kl_divergence(p, p), 0.0);
    EXPECT_NEAR(kl_divergence(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}), std::log(2.0), 1e-15);
    EXPECT_THROW(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}), Unsupported);
}

TEST(Divergence, MatchesReverseOrderAccumulation)
{
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = rng.dirichlet(std::vector<double>(6, 1.0));
        const auto q = rng.dirichlet(std::vector<double>(6, 1.0));
        long double acc = 0.0L;
        for (std::size_t i = p.size(); i-- > 0;) {
            if (p[i] > 0.0) {
                acc += static_cast<long double>(p[i]) * (std::log(static_cast<long double>(p[i])) -
                                                         std::log(static_cast<long double>(q[i])));
            }
        }
        EXPECT_NEAR(kl_divergence(p, q), static_cast<double>(acc), 1e-12);
    }
}

TEST(Task, DiscountedReturnAccumulatesInOrder)
{
    Trajectory t;
    t.steps = {{0, 0, 1.0}, {0, 0, 2.0}, {0, 0, 4.0}};
    EXPECT_DOUBLE_EQ(discounted_return(t, 0.5), 1.0 + 1.0 + 1.0);
    EXPECT_EQ(setting_from_string("apomdp"), Setting::apomdp);
    EXPECT_THROW(setting_from_string("bandit"), ConfigError);
}

TEST(Config, ReaderNamesUnknownAndMistypedFields)
{
    const nlohmann::json j{{"a", 1}, {"b", "x"}, {"c", 2}};
    ConfigReader r(j, "root");
    int a = 0;
    r.read("a", a);
    EXPECT_EQ(a, 1);
    int b = 0;
    try {
        r.read("b", b);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "root.b");
    }
    try {
        r.finish();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "root.c");
    }
}

TEST(Parallel, ResultsIndependentOfJobs)
{
    std::vector<double> one(100);
    std::vector<double> four(100);
    parallel_for(100, 1, [&](std::size_t i) { one[i] = Rng::stream(3, i).uniform(); });
    parallel_for(100, 4, [&](std::size_t i) { four[i] = Rng::stream(3, i).uniform(); });
    EXPECT_EQ(one, four);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                     if (i == 7) {
                         throw ModelError("boom");
                     }
                 }),
                 ModelError);
}
