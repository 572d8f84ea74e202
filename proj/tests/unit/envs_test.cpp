#include "icdm/core/belief.hpp"
#include "icdm/core/error.hpp"
#include "icdm/envs/darkroom.hpp"
#include "icdm/envs/energy.hpp"
#include "icdm/envs/task_io.hpp"
#include "icdm/solvers/mdp_solver.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <set>

using namespace icdm;
using namespace icdm::envs;

TEST(Energy, WorkRewardIsLevelOverCap)
{
    const auto mdp = gen_energy_mdp({});
    EXPECT_NEAR(mdp.reward(3, work), 3.0 / 9.0, 1e-15);
    EXPECT_EQ(mdp.reward(3, charge), -0.02);
    EXPECT_EQ(mdp.reward(3, charge_alt), -0.02);
}

TEST(Energy, BoundaryClampsMergeOutcomes)
{
    EnergyParams p;
    p.success_prob = 0.7;
    const auto mdp = gen_energy_mdp(p);
    EXPECT_EQ(mdp.transition()(9, charge, 9), 1.0);
    EXPECT_EQ(mdp.transition()(0, work, 0), 1.0);
    EXPECT_EQ(mdp.reward(0, work), 0.0);
    EXPECT_NEAR(mdp.transition()(4, work, 3), 0.7, 1e-15);
    EXPECT_NEAR(mdp.transition()(4, work, 4), 0.3, 1e-15);
}

TEST(Energy, ChargeActionsAreRedundant)
{
    const auto mdp = gen_energy_mdp({});
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        for (std::size_t n = 0; n < mdp.num_states(); ++n) {
            EXPECT_EQ(mdp.transition()(s, charge, n), mdp.transition()(s, charge_alt, n));
        }
    }
}

TEST(Energy, ObservationKernel)
{
    EnergyParams p;
    p.obs_prob = 1.0;
    const auto exact = gen_energy_pomdp(p);
    for (std::size_t s = 0; s < 10; ++s) {
        for (std::size_t o = 0; o < 10; ++o) {
            EXPECT_EQ(exact.observation()(s, 0, o), s == o ? 1.0 : 0.0);
        }
    }
    p.obs_prob = 0.5;
    const auto noisy = gen_energy_pomdp(p);
    for (std::size_t s = 0; s < 10; ++s) {
        double sum = 0.0;
        for (std::size_t o = 0; o < 10; ++o) {
            sum += noisy.observation()(s, 1, o);
            if (o != s) {
                EXPECT_NEAR(noisy.observation()(s, 1, o), 0.5 / 9, 1e-15);
            }
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Energy, SampledEmissionsMatchRow)
{
    EnergyParams p;
    p.obs_prob = 0.8;
    const auto pomdp = gen_energy_pomdp(p);
    Rng rng(17);
    const int n = 100000;
    std::vector<int> counts(10, 0);
    for (int i = 0; i < n; ++i) {
        ++counts[rng.categorical(pomdp.observation().row(6, 0))];
    }
    for (std::size_t o = 0; o < 10; ++o) {
        const double q = pomdp.observation()(6, 0, o);
        EXPECT_NEAR(counts[o] / double(n), q, 3.0 * std::sqrt(q * (1 - q) / n));
    }
}

TEST(Energy, ValidationNamesTheField)
{
    EnergyParams p;
    p.obs_prob = 0.0;
    try {
        gen_energy_pomdp(p);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "obs_prob");
    }
    p = {};
    p.success_prob = 1.5;
    EXPECT_THROW(gen_energy_mdp(p), ConfigError);
}

TEST(Ambiguity, AcceptedRowsRespectKlRadius)
{
    AmbiguityConfig cfg;
    cfg.num_models = 5;
    EnergyParams p;
    p.obs_prob = 0.8;
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto task = gen_energy_apomdp(p, cfg, 0.5, rng);
        const auto& base = task.models().front();
        for (std::size_t m = 1; m < task.num_models(); ++m) {
            const auto& km = task.models()[m];
            for (std::size_t s = 0; s < task.num_states(); ++s) {
                for (std::size_t a = 0; a < 3; ++a) {
                    EXPECT_LE(kl_divergence(base.transition.row(s, a), km.transition.row(s, a)), 0.2);
                    EXPECT_LE(kl_divergence(base.observation.row(s, a), km.observation.row(s, a)), 0.2);
                }
                for (std::size_t n = 0; n < task.num_states(); ++n) {
                    EXPECT_EQ(km.transition(s, charge, n), km.transition(s, charge_alt, n));
                }
            }
        }
    }
}

TEST(Ambiguity, SingletonIsTheBase)
{
    Rng rng(1);
    EnergyParams p;
    p.obs_prob = 0.8;
    const auto task = gen_energy_apomdp(p, {}, 1.0, rng);
    ASSERT_EQ(task.num_models(), 1u);
    EXPECT_EQ(task.model_pomdp(0), gen_energy_pomdp(p));
}

TEST(Ambiguity, HighConcentrationConvergesToBase)
{
    AmbiguityConfig cfg;
    cfg.dirichlet_concentration = 1e6;
    Rng rng(9);
    const std::vector<double> base{0.1, 0.2, 0.3, 0.4};
    std::vector<double> kls;
    for (int i = 0; i < 100; ++i) {
        kls.push_back(kl_divergence(base, perturb_row(base, cfg, rng)));
    }
    std::nth_element(kls.begin(), kls.begin() + 50, kls.end());
    EXPECT_LT(kls[50], 1e-3);
}

TEST(Ambiguity, ExhaustionIsReported)
{
    AmbiguityConfig cfg;
    cfg.kl_radius = 1e-12;
    cfg.dirichlet_concentration = 1.0;
    cfg.max_attempts = 20;
    Rng rng(3);
    const std::vector<double> base{0.5, 0.5};
    EXPECT_THROW(perturb_row(base, cfg, rng), SamplingExhausted);
}

TEST(Energy, GeneratedTasksAreSeededPerIndex)
{
    EnergyTaskDistribution dist;
    const auto a = generate_energy_tasks(Setting::mdp, dist, {}, 1.0, 5, 77, "mdp");
    const auto b = generate_energy_tasks(Setting::mdp, dist, {}, 1.0, 8, 77, "mdp");
    ASSERT_EQ(a.size(), 5u);
    EXPECT_EQ(a[3].id, "mdp-0003");
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(std::get<TabularMDP>(a[i].model), std::get<TabularMDP>(b[i].model));
        const double p = a[i].metadata["params"]["success_prob"].get<double>();
        EXPECT_GE(p, 0.5);
        EXPECT_LT(p, 1.0);
    }
}

namespace {

// breadth-first distance from (0,0) using only DarkroomTask::move
int bfs_distance(const DarkroomTask& task, Cell goal)
{
    std::deque<std::pair<Cell, int>> queue{{{0, 0}, 0}};
    std::set<Cell> seen{{0, 0}};
    while (!queue.empty()) {
        auto [c, d] = queue.front();
        queue.pop_front();
        if (c == goal) {
            return d;
        }
        for (int a = 0; a < DarkroomTask::num_actions; ++a) {
            const Cell n = task.move(c, a);
            if (seen.insert(n).second) {
                queue.push_back({n, d + 1});
            }
        }
    }
    return -1;
}

} // namespace

TEST(Darkroom, MovesAndRewards)
{
    const auto task = gen_darkroom({0, 0});
    EXPECT_EQ(task.reward({0, 0}, stay), 1.0);
    EXPECT_EQ(task.reward({0, 0}, east), 0.0);
    EXPECT_EQ(task.move({0, 0}, north), (Cell{0, 0}));
    EXPECT_EQ(task.move({0, 0}, south), (Cell{0, 1}));
    EXPECT_EQ(task.move({9, 3}, east), (Cell{9, 3}));
    EXPECT_THROW(gen_darkroom({10, 0}), ModelError);
}

TEST(Darkroom, OracleReturnIsShortestPathThenStay)
{
    double total = 0.0;
    for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) {
            const auto task = gen_darkroom({x, y});
            const auto mdp = task.to_mdp();
            const double v = solvers::solve_mdp(mdp).initial_value(mdp);
            const int d = bfs_distance(task, {x, y});
            EXPECT_EQ(d, x + y);
            EXPECT_EQ(v, 100.0 - d);
            total += v;
        }
    }
    EXPECT_EQ(total / 100.0, 91.0);
}

TEST(Darkroom, GoalSplit)
{
    Rng a(4);
    Rng b(4);
    const auto s1 = split_darkroom_goals(a);
    const auto s2 = split_darkroom_goals(b);
    EXPECT_EQ(s1.train, s2.train);
    EXPECT_EQ(s1.train.size() + s1.test.size(), 100u);
    std::set<Cell> all(s1.train.begin(), s1.train.end());
    for (const auto& c : s1.test) {
        EXPECT_TRUE(all.insert(c).second);
    }
    EXPECT_EQ(all.size(), 100u);
    int differing = 0;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        Rng r(seed);
        differing += split_darkroom_goals(r).test != s1.test ? 1 : 0;
    }
    EXPECT_EQ(differing, 20);
}

TEST(TaskIo, RoundTripIsExact)
{
    Rng rng(21);
    EnergyParams p;
    p.obs_prob = 0.7;
    p.success_prob = 0.6180339887498949;
    AmbiguityConfig cfg;
    cfg.num_models = 3;
    std::vector<Task> tasks{make_energy_task(Setting::mdp, p, cfg, 0.3, rng, "a", 1),
                            make_energy_task(Setting::pomdp, p, cfg, 0.3, rng, "b", 1),
                            make_energy_task(Setting::apomdp, p, cfg, 0.3, rng, "c", 1),
                            gen_darkroom({2, 7}).to_task("d")};
    const auto dir = std::filesystem::temp_directory_path() / "icdm_task_io";
    std::filesystem::create_directories(dir);
    for (const auto& t : tasks) {
        const auto path = dir / (t.id + ".json");
        write_task_file(path, t);
        const Task back = read_task_file(path);
        EXPECT_EQ(back.id, t.id);
        EXPECT_EQ(back.setting, t.setting);
        EXPECT_TRUE(back.model == t.model) << t.id;
        EXPECT_EQ(back.metadata, t.metadata);
        EXPECT_EQ(task_to_json(back).dump(), task_to_json(t).dump());
    }
    std::filesystem::remove_all(dir);
}

TEST(TaskIo, RejectsBrokenFiles)
{
    auto j = task_to_json(make_energy_task(Setting::mdp, {}, {}, 1.0, *std::make_unique<Rng>(0), "x", 0));
    j["models"][0]["transition"][0][0][0] = 0.9;
    EXPECT_THROW(task_from_json(j), Error);
    auto k = task_to_json(make_energy_task(Setting::mdp, {}, {}, 1.0, *std::make_unique<Rng>(0), "x", 0));
    k["schema_version"] = 99;
    EXPECT_THROW(task_from_json(k), Error);
}
