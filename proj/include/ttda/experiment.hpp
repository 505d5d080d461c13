#pragma once

#include "ttda/classify.hpp"
#include "ttda/synthetic.hpp"
#include "ttda/ttda.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ttda {

enum class Method { lda, cmda, dgtda, ttda, two_way, three_way };

Method parse_method(const std::string& name);
std::string method_name(Method m);

/// Flat key=value experiment description; unknown keys are rejected. A config
/// file holds one pair per line ('#' starts a comment); command-line
/// overrides apply the same pairs on top.
struct ExperimentConfig {
    // dataset source: exactly one of data_dir / image_dir / synthetic
    std::string data_dir;
    std::string image_dir;
    bool use_synthetic = false;
    SyntheticSpec synthetic{};
    Shape reshape;  ///< optional reinterpretation of every sample

    Method method = Method::ttda;
    double tau = 0.0;  ///< in (0,1]: derive ranks by truncated decomposition of the training stack
    std::vector<std::vector<Index>> ranks;  ///< explicit ranks; one list, or one per branch
    std::vector<Index> boundaries;          ///< optional explicit branch split positions

    double lambda = 1.0;
    bool lambda_auto = false;
    Index lambda_holdout = 1;
    int lambda_trials = 5;

    int tt_max_iter = 200;
    double tt_change_tol = 0.1;
    int cmda_max_iter = 20;
    double cmda_change_tol = 0.1;
    int loop_iter = 3;
    Index scatter_dim_limit = 4096;

    double train_fraction = 0.5;
    Index train_per_class = 0;  ///< > 0 overrides train_fraction
    int repeats = 1;
    std::uint64_t seed = 0;
    int workers = 1;

    std::string output_csv;
    std::string model_dir;
    std::string trace_csv;          ///< objective trace of the last repeat's fit
    std::string stiefel_trace_csv;  ///< inner-solver (iter, objective, grad, step) records

    void set(const std::string& key, const std::string& value);
    void set_pair(const std::string& key_equals_value);
    static ExperimentConfig from_file(const std::filesystem::path& path);

    TTFitConfig tt_fit_config() const;
    CmdaConfig cmda_config() const;
};

LabeledTensorSet load_experiment_data(const ExperimentConfig& cfg);

/// A fitted model of any method: train features for 1-NN, the feature map for
/// new samples, storage counts, and the payload needed for serialization.
struct TrainedModel {
    Method method = Method::ttda;
    double lambda = 0.0;
    Shape sample_shape;
    FeatureSet train_features;
    FeatureExtractor extract;
    StorageCount storage;
    std::vector<double> objective_trace;

    std::vector<TTChain> chains;  ///< TT methods
    BranchSpec spec;              ///< TT methods
    std::vector<Matrix> mode_subspaces;  ///< cmda/dgtda
    Matrix lda_subspace;                 ///< lda
    std::vector<std::vector<Index>> ranks_used;
};

TrainedModel train_model(Method method, const LabeledTensorSet& train, double lambda,
                         const ExperimentConfig& cfg);

void save_model(const TrainedModel& model, const std::filesystem::path& dir);
TrainedModel load_model(const std::filesystem::path& dir);

/// Ranks derived from a tau-truncated decomposition of the stacked training
/// tensor; layout matches what train_model expects for the method.
std::vector<std::vector<Index>> ranks_from_tau(Method method, const LabeledTensorSet& train,
                                               double tau, const ExperimentConfig& cfg);

struct RunResult {
    Method method = Method::ttda;
    double tau = 0.0;
    std::string ranks_label;
    double lambda = 0.0;
    double storage_norm = 0.0;
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    double train_seconds = 0.0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
};

/// Full protocol for one configuration: seeded train/test splits per repeat,
/// optional lambda selection on the training set, training (timed), and 1-NN
/// evaluation. Deterministic given the config.
RunResult run(const ExperimentConfig& cfg);

/// One run per (method, tau) grid point; empty grids fall back to the
/// config's own values. Points execute on up to cfg.workers threads; rows
/// come back in grid order and a failed point is recorded, not fatal.
std::vector<RunResult> sweep(const ExperimentConfig& cfg, const std::vector<Method>& methods,
                             const std::vector<double>& tau_grid);

extern const char* kResultsCsvHeader;  ///< method,tau,ranks,lambda,storage_norm,...
void write_csv(const std::vector<RunResult>& rows, std::ostream& out);

}  // namespace ttda
