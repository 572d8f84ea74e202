#include "icdm/core/error.hpp"
#include "icdm/dataset/corpus.hpp"
#include "icdm/dataset/encoder.hpp"
#include "icdm/envs/energy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace icdm;
using namespace icdm::dataset;

namespace fs = std::filesystem;

namespace {

Trajectory random_trajectory(Rng& rng, int length)
{
    Trajectory t;
    for (int k = 0; k < length; ++k) {
        const double reward = std::round((rng.uniform() * 4.0 - 2.0) * 100.0) / 100.0;
        t.steps.push_back({static_cast<int>(rng.index(120)), static_cast<int>(rng.index(12)), reward});
    }
    return t;
}

std::vector<SolvedTask> solved_tasks(Setting setting, std::size_t count, int horizon, std::uint64_t seed)
{
    envs::EnergyTaskDistribution dist;
    dist.base.horizon = horizon;
    dist.base.obs_prob = setting == Setting::mdp ? 1.0 : 0.8;
    envs::AmbiguityConfig cfg;
    cfg.num_models = setting == Setting::apomdp ? 2 : 1;
    std::vector<SolvedTask> out;
    for (auto& t : envs::generate_energy_tasks(setting, dist, cfg, 0.5, count, seed)) {
        auto task = std::make_shared<const Task>(std::move(t));
        out.push_back({task, std::make_shared<const solvers::TaskSolution>(solvers::solve_task(*task))});
    }
    return out;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("icdm_dataset_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST(Encoder, ReferenceStep)
{
    Trajectory t;
    t.steps = {{3, 1, 1.0 / 3.0}};
    EXPECT_EQ(encode(t).text, "<O_1> 3, <A_1> 1, <R_1> 0.33");
    EXPECT_EQ(encode(t).schema_version, 1);
    EXPECT_EQ(encode(Trajectory{}).text, "");
}

TEST(Encoder, RewardFormatting)
{
    EXPECT_EQ(format_reward(-0.02), "-0.02");
    EXPECT_EQ(format_reward(-0.001), "0.00");
    EXPECT_EQ(format_reward(0.0), "0.00");
    EXPECT_EQ(format_reward(1.0), "1.00");
    EXPECT_EQ(format_reward(0.125), "0.12");
}

TEST(Encoder, DecodeChargeStep)
{
    const auto t = decode("<O_1> 0, <A_1> 2, <R_1> -0.02");
    ASSERT_EQ(t.steps.size(), 1u);
    EXPECT_EQ(t.steps[0], (Step{0, 2, -0.02}));
    EXPECT_TRUE(decode("").steps.empty());
}

TEST(Encoder, RoundTripRandomTrajectories)
{
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const auto t = random_trajectory(rng, 10);
        const auto text = encode(t).text;
        const auto back = decode(text);
        ASSERT_EQ(back.steps.size(), t.steps.size());
        for (std::size_t k = 0; k < t.steps.size(); ++k) {
            EXPECT_EQ(back.steps[k].obs, t.steps[k].obs);
            EXPECT_EQ(back.steps[k].action, t.steps[k].action);
            EXPECT_EQ(format_reward(back.steps[k].reward), format_reward(t.steps[k].reward));
        }
        EXPECT_EQ(encode(back).text, text);
    }
}

TEST(Encoder, RejectsNonCanonicalText)
{
    const std::vector<std::string> bad{
        "<X_1> 3, <A_1> 1, <R_1> 0.33",   // unknown tag
        "<O_2> 3, <A_2> 1, <R_2> 0.33",   // wrong step number
        "<O_1> 03, <A_1> 1, <R_1> 0.33",  // leading zero
        "<O_1> 3, <A_1> 1, <R_1> 0.330",  // three decimals
        "<O_1> 3, <A_1> 1, <R_1> +0.33",  // explicit plus
        "<O_1> 3, <A_1> 1, <R_1> -0.00",  // negative zero
        "<O_1> 3,<A_1> 1, <R_1> 0.33",    // spacing
        "<O_1> 3, <A_1> 1, <R_1> 0.33, ", // trailing separator
        "<O_1> 3, <A_1> 1",               // truncated step
        "<O_01> 3, <A_1> 1, <R_1> 0.33",  // padded step index
    };
    for (const auto& text : bad) {
        EXPECT_THROW(decode(text), ParseError) << text;
    }
    try {
        decode("<O_1> 3, <A_1> x, <R_1> 0.33");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 15u);
    }
}

TEST(Encoder, FuzzedTextIsRejectedOrCanonical)
{
    Rng rng(5);
    const std::string alphabet = "<>OAR_0123456789., -x";
    int accepted = 0;
    for (int i = 0; i < 20000; ++i) {
        auto text = encode(random_trajectory(rng, 1 + static_cast<int>(rng.index(3)))).text;
        const int edits = 1 + static_cast<int>(rng.index(3));
        for (int e = 0; e < edits; ++e) {
            const auto pos = rng.index(text.size() + 1);
            switch (rng.index(3)) {
            case 0:
                text.insert(text.begin() + static_cast<std::ptrdiff_t>(pos), alphabet[rng.index(alphabet.size())]);
                break;
            case 1:
                if (pos < text.size()) {
                    text.erase(pos, 1);
                }
                break;
            default:
                if (pos < text.size()) {
                    text[pos] = alphabet[rng.index(alphabet.size())];
                }
            }
        }
        try {
            const auto t = decode(text);
            ++accepted;
            EXPECT_EQ(encode(t).text, text);
        } catch (const ParseError&) {
        }
    }
    EXPECT_GT(accepted, 0);
}

TEST(Encoder, ContextFraming)
{
    Trajectory a;
    a.steps = {{1, 0, -0.02}};
    Trajectory b;
    b.steps = {{2, 1, 0.22}, {1, 1, 0.11}};
    const auto text = encode_context({a, b});
    EXPECT_EQ(text, "TRAJ 1: <O_1> 1, <A_1> 0, <R_1> -0.02\nTRAJ 2: <O_1> 2, <A_1> 1, <R_1> 0.22, <O_2> 1, <A_2> 1, "
                    "<R_2> 0.11");
    const auto back = decode_context(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].steps[1], b.steps[1]);
    EXPECT_EQ(encode_context({}), "");
    EXPECT_TRUE(decode_context("").empty());
    EXPECT_THROW(decode_context("TRAJ 2: <O_1> 1, <A_1> 0, <R_1> 0.00"), ParseError);
    EXPECT_THROW(decode_context(text + "\n"), ParseError);
}

TEST(Corpus, RecordShapeAndDeterminism)
{
    const auto tasks = solved_tasks(Setting::mdp, 4, 10, 3);
    CorpusOptions options;
    options.seed = 11;
    const auto a = make_sft_records(tasks, options);
    options.jobs = 3;
    const auto b = make_sft_records(tasks, options);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].trajectories.size(), 15u);
        EXPECT_EQ(a[i].trajectories, b[i].trajectories);
        EXPECT_EQ(a[i].task_id, tasks[i].task->id);
        EXPECT_EQ(a[i].rollout_seed, task_rollout_seed(11, i));
        std::vector<Trajectory> decoded;
        for (const auto& text : a[i].trajectories) {
            decoded.push_back(decode(text));
            EXPECT_EQ(decoded.back().steps.size(), 10u);
        }
        EXPECT_EQ(a[i].context, encode_context(decoded));
        const auto j = nlohmann::json::parse(to_json(a[i]).dump());
        EXPECT_EQ(sft_record_from_json(j).trajectories, a[i].trajectories);
    }
}

TEST(Corpus, FileIsByteStableAndReplays)
{
    const auto tasks = solved_tasks(Setting::pomdp, 3, 4, 8);
    const auto dir = scratch("sft");
    CorpusOptions options;
    options.seed = 4;
    options.trajectories_per_task = 5;
    const auto manifest = build_sft_corpus(tasks, options, dir / "a.jsonl");
    build_sft_corpus(tasks, options, dir / "b.jsonl");
    EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
    EXPECT_EQ(manifest["num_records"], 3);
    EXPECT_EQ(manifest["num_trajectories"], 15);
    EXPECT_TRUE(fs::exists(dir / "a.manifest.json"));

    auto records = make_sft_records(tasks, options);
    EXPECT_EQ(audit_sft_records(records, tasks), 0u);
    // replayed returns agree with the recorded statistics
    double mean = 0.0;
    for (const auto& r : records) {
        for (double x : r.returns) {
            mean += x / 15.0;
        }
    }
    EXPECT_NEAR(mean, manifest["mean_return"].get<double>(), 1e-12);
    records[1].trajectories[2] = records[1].trajectories[3] == records[1].trajectories[2]
                                     ? encode(Trajectory{}).text
                                     : records[1].trajectories[3];
    EXPECT_EQ(audit_sft_records(records, tasks), 1u);
    fs::remove_all(dir);
}

TEST(Corpus, EmptyCorpusHasValidManifest)
{
    const auto dir = scratch("empty");
    const auto manifest = build_sft_corpus({}, {}, dir / "sft.jsonl");
    EXPECT_EQ(slurp(dir / "sft.jsonl"), "");
    EXPECT_EQ(manifest["num_records"], 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "sft.manifest.json")), manifest);
    fs::remove_all(dir);
}

TEST(Dpt, OneRecordPerStepWithSolverLabels)
{
    const auto tasks = solved_tasks(Setting::mdp, 3, 10, 5);
    CorpusOptions options;
    options.trajectories_per_task = 4;
    options.seed = 2;
    const auto records = make_dpt_records(tasks, options);
    ASSERT_EQ(records.size(), 3u * 4u * 10u);
    for (const auto& r : records) {
        const auto& task = *std::find_if(tasks.begin(), tasks.end(), [&](const SolvedTask& s) {
            return s.task->id == r.task_id;
        });
        EXPECT_EQ(r.context.size(), static_cast<std::size_t>(r.t));
        EXPECT_EQ(r.label, task.solution->mdp().policy[r.t][r.query_obs]);
        EXPECT_EQ(rederive_dpt_label(task, r), r.label);
        const auto back = dpt_record_from_json(nlohmann::json::parse(to_json(r).dump()));
        EXPECT_EQ(back.context, r.context);
        EXPECT_EQ(back.label, r.label);
    }
    // records of one trajectory chain their transitions
    for (std::size_t i = 1; i < 10; ++i) {
        EXPECT_EQ(records[i].context.back().next_obs, records[i].query_obs);
    }
}

TEST(Dpt, BeliefLabelsRederive)
{
    for (auto setting : {Setting::pomdp, Setting::apomdp}) {
        const auto tasks = solved_tasks(setting, 2, 4, 6);
        CorpusOptions options;
        options.trajectories_per_task = 3;
        const auto records = make_dpt_records(tasks, options);
        ASSERT_EQ(records.size(), 2u * 3u * 4u);
        for (const auto& r : records) {
            const auto& task = r.task_id == tasks[0].task->id ? tasks[0] : tasks[1];
            EXPECT_EQ(rederive_dpt_label(task, r), r.label);
        }
    }
}

TEST(Context, SupportTrajectories)
{
    const auto tasks = solved_tasks(Setting::mdp, 1, 10, 1);
    const auto& task = *tasks[0].task;
    rollout::OraclePolicy oracle(tasks[0].solution);
    rollout::RandomPolicy random;
    Rng r1(3);
    const auto ctx = build_context(task, 2, oracle, r1);
    ASSERT_EQ(ctx.support.size(), 2u);
    EXPECT_EQ(ctx.encoded, encode_context(ctx.support));
    for (const auto& traj : ctx.support) {
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            EXPECT_EQ(traj.steps[t].action, tasks[0].solution->mdp().policy[t][traj.steps[t].obs]);
        }
    }
    Rng r2(3);
    const auto rnd = build_context(task, 2, random, r2);
    EXPECT_EQ(rnd.support[0].steps.size(), ctx.support[0].steps.size());
    EXPECT_EQ(rnd.support[0].steps[0].obs, ctx.support[0].steps[0].obs);
    bool differs = false;
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t t = 0; t < 10; ++t) {
            differs = differs || rnd.support[k].steps[t].action != ctx.support[k].steps[t].action;
        }
    }
    EXPECT_TRUE(differs);
    EXPECT_EQ(decode_context(rnd.encoded).size(), 2u);
    Rng r3(3);
    const auto none = build_context(task, 0, oracle, r3);
    EXPECT_TRUE(none.support.empty());
    EXPECT_EQ(none.encoded, "");
}
