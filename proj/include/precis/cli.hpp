#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "precis/model.hpp"
#include "precis/trainer.hpp"

namespace precis {

// One optimizer segment. Multi-segment problems warm-start each segment from
// the previous segment's weights and reset the Adam state between segments.
struct Phase {
    long iters = 0;
    AdamConfig adam;
};

// Runner configuration. Zero / empty fields fall back to the problem's desk
// defaults; explicit values win.
struct ExperimentConfig {
    std::string problem;
    PrecisionPolicy policy = PrecisionPolicy::full32();
    long iters = 0;        // total budget; multi-phase schedules scale proportionally
    int n_seeds = 1;
    std::uint64_t seed0 = 0;
    std::string out_dir;
    int jobs = 1;
    long eval_every = 0;
    bool record_lipschitz = false;  // OR'd with the problem default
    double lr = 0.0;                // overrides every phase
    double loss_scale = 0.0;        // mixed policy only; 0 = problem default
    int depth = 0, width = 0;       // deeponet: applied to both subnets (and p)
    std::string activation;
};

struct ProblemInfo {
    std::string name;
    std::string kind;  // "fnn" | "deeponet"
    long default_iters = 0;
    long default_eval_every = 0;
    bool default_lipschitz = false;
    std::string blurb;
};

const std::vector<ProblemInfo>& problem_registry();
const ProblemInfo& problem_info(const std::string& name);  // throws invalid_argument

// A fully materialized experiment for one seed: data sampled, model fixed,
// loss and test-metric closures bound. init32 is the shared binary32
// initialization every policy starts from.
struct BuiltExperiment {
    std::vector<ParamShape> shapes;
    ParameterStore init32;
    TrainTask task;
    std::vector<Phase> phases;
    TrainOptions opts;  // iters = total across phases; per-phase counts drive the run
    double mixed_loss_scale = 1024.0;
};

BuiltExperiment build_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

// cfg.policy with the loss scale resolved (problem default under mixed, 1 otherwise)
PrecisionPolicy resolve_policy(const ExperimentConfig& cfg, const BuiltExperiment& built);

struct RunResult {
    TrainRecord record;
    ParameterStore params;  // trained weights, master format
    double seconds = 0.0;
    double iters_per_second = 0.0;
};

// Train one seed end to end: build, run every phase, concatenate the records.
RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace precis
