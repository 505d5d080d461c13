#include "ttda/experiment.hpp"

#include "ttda/dataset.hpp"
#include "ttda/tten_io.hpp"

#include <Eigen/SVD>

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ttda {

using nlohmann::json;
namespace fs = std::filesystem;

Method parse_method(const std::string& name) {
    if (name == "lda") return Method::lda;
    if (name == "cmda") return Method::cmda;
    if (name == "dgtda") return Method::dgtda;
    if (name == "ttda") return Method::ttda;
    if (name == "2wttda") return Method::two_way;
    if (name == "3wttda") return Method::three_way;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::lda: return "lda";
        case Method::cmda: return "cmda";
        case Method::dgtda: return "dgtda";
        case Method::ttda: return "ttda";
        case Method::two_way: return "2wttda";
        case Method::three_way: return "3wttda";
    }
    throw std::logic_error("unreachable");
}

namespace {

std::vector<Index> parse_index_list(const std::string& text) {
    std::vector<Index> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
    return out;
}

std::vector<std::vector<Index>> parse_rank_lists(const std::string& text) {
    std::vector<std::vector<Index>> out;
    std::stringstream ss(text);
    std::string group;
    while (std::getline(ss, group, ';')) out.push_back(parse_index_list(group));
    return out;
}

std::string ranks_label(const std::vector<std::vector<Index>>& ranks) {
    std::string label;
    for (std::size_t b = 0; b < ranks.size(); ++b) {
        if (b) label += '|';
        for (std::size_t i = 0; i < ranks[b].size(); ++i) {
            if (i) label += 'x';
            label += std::to_string(ranks[b][i]);
        }
    }
    return label.empty() ? "-" : label;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "data_dir") data_dir = value;
    else if (key == "image_dir") image_dir = value;
    else if (key == "synthetic") use_synthetic = (value == "1" || value == "true");
    else if (key == "synthetic_shape") synthetic.shape = parse_index_list(value);
    else if (key == "synthetic_classes") synthetic.classes = std::stoll(value);
    else if (key == "synthetic_samples") synthetic.samples_per_class = std::stoll(value);
    else if (key == "synthetic_ranks") synthetic.generator_ranks = parse_index_list(value);
    else if (key == "synthetic_separation") synthetic.separation = std::stod(value);
    else if (key == "synthetic_sigma") synthetic.noise_sigma = std::stod(value);
    else if (key == "synthetic_seed") synthetic.seed = std::stoull(value);
    else if (key == "reshape") reshape = parse_index_list(value);
    else if (key == "method") method = parse_method(value);
    else if (key == "tau") tau = std::stod(value);
    else if (key == "ranks") ranks = parse_rank_lists(value);
    else if (key == "boundaries") boundaries = parse_index_list(value);
    else if (key == "lambda") {
        if (value == "auto") lambda_auto = true;
        else { lambda = std::stod(value); lambda_auto = false; }
    }
    else if (key == "lambda_holdout") lambda_holdout = std::stoll(value);
    else if (key == "lambda_trials") lambda_trials = std::stoi(value);
    else if (key == "tt_max_iter") tt_max_iter = std::stoi(value);
    else if (key == "tt_change_tol") tt_change_tol = std::stod(value);
    else if (key == "cmda_max_iter") cmda_max_iter = std::stoi(value);
    else if (key == "cmda_change_tol") cmda_change_tol = std::stod(value);
    else if (key == "loop_iter") loop_iter = std::stoi(value);
    else if (key == "scatter_dim_limit") scatter_dim_limit = std::stoll(value);
    else if (key == "train_fraction") train_fraction = std::stod(value);
    else if (key == "train_per_class") train_per_class = std::stoll(value);
    else if (key == "repeats") repeats = std::stoi(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "workers") workers = std::stoi(value);
    else if (key == "output_csv") output_csv = value;
    else if (key == "model_dir") model_dir = value;
    else if (key == "trace_csv") trace_csv = value;
    else if (key == "stiefel_trace_csv") stiefel_trace_csv = value;
    else throw std::invalid_argument("unknown config key: " + key);
}

void ExperimentConfig::set_pair(const std::string& pair) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got: " + pair);
    auto trim = [](std::string s) {
        const auto begin = s.find_first_not_of(" \t");
        if (begin == std::string::npos) return std::string{};
        const auto end = s.find_last_not_of(" \t");
        return s.substr(begin, end - begin + 1);
    };
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    ExperimentConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        cfg.set_pair(line.substr(begin, end - begin + 1));
    }
    return cfg;
}

TTFitConfig ExperimentConfig::tt_fit_config() const {
    TTFitConfig fit;
    fit.max_iter = tt_max_iter;
    fit.factor_change_tol = tt_change_tol;
    fit.scatter_dim_limit = scatter_dim_limit;
    fit.stiefel_trace_path = stiefel_trace_csv;
    return fit;
}

CmdaConfig ExperimentConfig::cmda_config() const { return {cmda_max_iter, cmda_change_tol}; }

LabeledTensorSet load_experiment_data(const ExperimentConfig& cfg) {
    LabeledTensorSet data;
    if (cfg.use_synthetic) {
        data = generate_synthetic(cfg.synthetic);
    } else if (!cfg.data_dir.empty()) {
        data = load_tten_dataset(cfg.data_dir);
    } else if (!cfg.image_dir.empty()) {
        data = load_pgm_dataset(cfg.image_dir, cfg.reshape);
    } else {
        throw std::invalid_argument("no dataset source configured");
    }
    if (!cfg.reshape.empty() && !cfg.use_synthetic && cfg.image_dir.empty()) {
        LabeledTensorSet reshaped(cfg.reshape);
        for (Index c = 0; c < data.num_classes(); ++c) {
            for (Index k = 0; k < data.class_size(c); ++k) {
                reshaped.add_sample(c, reshape(data.sample(c, k), cfg.reshape));
            }
        }
        return reshaped;
    }
    return data;
}

namespace {

Index tau_rank(const Vector& sv, double tau) {
    Index rank = 0;
    const double cutoff = tau * sv(0);
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) >= cutoff) ++rank;
    }
    return std::max<Index>(rank, 1);
}

// All training samples stacked along a trailing mode.
DenseTensor stacked_tensor(const LabeledTensorSet& train) {
    Shape shape = train.sample_shape();
    shape.push_back(train.total_samples());
    DenseTensor out(shape);
    Index offset = 0;
    const Index step = train.sample_size();
    for (Index c = 0; c < train.num_classes(); ++c) {
        for (Index k = 0; k < train.class_size(c); ++k) {
            out.values().segment(offset, step) = train.sample(c, k).values();
            offset += step;
        }
    }
    return out;
}

std::vector<BranchRange> resolve_ranges(Method method, const ExperimentConfig& cfg, const Shape& shape) {
    const Index f = (method == Method::two_way) ? 2 : (method == Method::three_way ? 3 : 1);
    BranchSpec spec;
    if (!cfg.boundaries.empty() && f > 1) {
        spec.boundaries = cfg.boundaries;
    } else {
        spec = select_branch_points(shape, f);
    }
    return branch_ranges(spec, static_cast<Index>(shape.size()));
}

}  // namespace

std::vector<std::vector<Index>> ranks_from_tau(Method method, const LabeledTensorSet& train,
                                               double tau, const ExperimentConfig& cfg) {
    if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("tau must lie in (0,1]");
    const Shape shape = train.sample_shape();
    const Index n_modes = static_cast<Index>(shape.size());

    switch (method) {
        case Method::lda: {
            Eigen::Map<const Matrix> mat(stacked_tensor(train).data(), train.sample_size(),
                                         train.total_samples());
            Eigen::BDCSVD<Matrix> svd(mat);
            return {{tau_rank(svd.singularValues(), tau)}};
        }
        case Method::cmda:
        case Method::dgtda: {
            std::vector<Index> per_mode;
            const DenseTensor stack = stacked_tensor(train);
            for (Index n = 0; n < n_modes; ++n) {
                std::vector<Index> perm{n};
                for (Index m = 0; m < stack.order(); ++m) {
                    if (m != n) perm.push_back(m);
                }
                const DenseTensor moved = transpose(stack, perm);
                Eigen::BDCSVD<Matrix> svd(unfold_view(moved, 1));
                per_mode.push_back(tau_rank(svd.singularValues(), tau));
            }
            return {per_mode};
        }
        case Method::ttda: {
            const TTChain chain = tt_svd(stacked_tensor(train), tau);
            const auto bonds = chain.ranks();  // R_0..R_{N+1}; bonds 1..N are the sample ranks
            return {std::vector<Index>(bonds.begin() + 1, bonds.begin() + 1 + n_modes)};
        }
        case Method::two_way:
        case Method::three_way: {
            const auto ranges = resolve_ranges(method, cfg, shape);
            std::vector<std::vector<Index>> out;
            for (const auto& range : ranges) {
                // branch-unfolded stack: (branch modes..., everything else)
                const DenseTensor stack = stacked_tensor(train);
                std::vector<Index> perm;
                for (Index m = range.begin; m < range.end; ++m) perm.push_back(m);
                for (Index m = 0; m < stack.order(); ++m) {
                    if (m < range.begin || m >= range.end) perm.push_back(m);
                }
                DenseTensor moved = transpose(stack, perm);
                Shape folded(shape.begin() + range.begin, shape.begin() + range.end);
                folded.push_back(moved.size() / shape_product(folded));
                const TTChain chain = tt_svd(reshape(moved, folded), tau);
                const auto bonds = chain.ranks();
                out.emplace_back(bonds.begin() + 1, bonds.begin() + 1 + range.length());
            }
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

TrainedModel train_model(Method method, const LabeledTensorSet& train, double lambda,
                         const ExperimentConfig& cfg) {
    TrainedModel model;
    model.method = method;
    model.lambda = lambda;
    model.sample_shape = train.sample_shape();
    const Shape shape = train.sample_shape();
    const Index n_modes = static_cast<Index>(shape.size());

    std::vector<std::vector<Index>> ranks = cfg.ranks;
    if (cfg.tau > 0.0) ranks = ranks_from_tau(method, train, cfg.tau, cfg);

    switch (method) {
        case Method::lda: {
            Index r = train.num_classes() - 1;
            if (!ranks.empty() && !ranks[0].empty()) r = ranks[0][0];
            r = std::min(r, train.sample_size());
            if (train.sample_size() > cfg.scatter_dim_limit)
                throw std::invalid_argument("vectorized dimension exceeds the scatter materialization limit");
            const LdaResult lr = lda_solve(scatter_matrices(train, lambda), r);
            model.lda_subspace = lr.u;
            model.objective_trace = {lr.objective()};
            const Matrix u = lr.u;
            model.extract = [u](const DenseTensor& y) { return project(u, y); };
            model.storage.subspace_elements = u.size();
            model.ranks_used = {{r}};
            break;
        }
        case Method::cmda:
        case Method::dgtda: {
            std::vector<Index> mode_ranks(shape.begin(), shape.end());
            if (!ranks.empty()) mode_ranks = ranks[0];
            const MdaResult res = (method == Method::cmda)
                                      ? cmda(train, mode_ranks, lambda, cfg.cmda_config())
                                      : dgtda(train, mode_ranks);
            model.mode_subspaces = res.subspaces;
            model.objective_trace = res.objective_trace;
            const auto subspaces = res.subspaces;
            model.extract = [subspaces](const DenseTensor& y) {
                const DenseTensor core = tucker_core(y, subspaces);
                return Vector(core.values());
            };
            for (const auto& u : res.subspaces) model.storage.subspace_elements += u.size();
            model.ranks_used = {mode_ranks};
            break;
        }
        case Method::ttda: {
            if (ranks.empty()) throw std::invalid_argument("ttda needs ranks or tau");
            TTFitConfig fit = cfg.tt_fit_config();
            const TTDAResult res = ttda_fit(train, ranks[0], lambda, fit);
            model.chains = {res.chain};
            model.objective_trace = res.objective_trace;
            const Matrix u = res.subspace;
            model.extract = [u](const DenseTensor& y) { return project(u, y); };
            for (const auto& f : res.chain.factors()) model.storage.subspace_elements += f.core.size();
            model.ranks_used = {ranks[0]};
            break;
        }
        case Method::two_way:
        case Method::three_way: {
            if (ranks.empty()) throw std::invalid_argument("multibranch methods need ranks or tau");
            const auto ranges = resolve_ranges(method, cfg, shape);
            BranchSpec spec;
            for (std::size_t b = 0; b + 1 < ranges.size(); ++b) spec.boundaries.push_back(ranges[b].end);
            if (ranks.size() == 1 && ranges.size() > 1) {
                // a single flat list splits by branch lengths
                std::vector<std::vector<Index>> split;
                std::size_t pos = 0;
                for (const auto& range : ranges) {
                    if (pos + static_cast<std::size_t>(range.length()) > ranks[0].size())
                        throw std::invalid_argument("rank list too short for the branch layout");
                    split.emplace_back(ranks[0].begin() + pos, ranks[0].begin() + pos + range.length());
                    pos += static_cast<std::size_t>(range.length());
                }
                ranks = split;
            }
            MultiBranchConfig mb;
            mb.loop_iter = cfg.loop_iter;
            mb.tt = cfg.tt_fit_config();
            const BranchModel bm = multibranch_fit(train, spec, ranks, lambda, mb);
            model.chains = bm.chains;
            model.spec = bm.spec;
            for (const auto& trace : bm.objective_traces) {
                model.objective_trace.insert(model.objective_trace.end(), trace.begin(), trace.end());
            }
            const auto chains = bm.chains;
            const auto chain_ranges = branch_ranges(bm.spec, n_modes);
            model.extract = [chains, chain_ranges](const DenseTensor& y) {
                const DenseTensor core = project_branches(y, chains, chain_ranges);
                return Vector(core.values());
            };
            model.storage = storage_count(bm);
            model.storage.core_elements = 0;  // recounted below over train features
            model.ranks_used = ranks;
            break;
        }
    }

    for (Index c = 0; c < train.num_classes(); ++c) {
        for (Index k = 0; k < train.class_size(c); ++k) {
            model.train_features.add(model.extract(train.sample(c, k)), static_cast<int>(c));
        }
    }
    model.storage.core_elements = 0;
    for (const auto& f : model.train_features.features) model.storage.core_elements += f.size();
    return model;
}

void save_model(const TrainedModel& model, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["method"] = method_name(model.method);
    manifest["lambda"] = model.lambda;
    manifest["sample_shape"] = model.sample_shape;
    manifest["boundaries"] = model.spec.boundaries;
    manifest["ranks"] = model.ranks_used;
    manifest["objective_trace"] = model.objective_trace;
    manifest["train_labels"] = model.train_features.labels;
    manifest["chain_count"] = model.chains.size();
    manifest["mode_subspace_count"] = model.mode_subspaces.size();
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write model manifest");
    out << manifest.dump(2) << "\n";

    char name[32];
    for (std::size_t b = 0; b < model.chains.size(); ++b) {
        std::snprintf(name, sizeof(name), "branch_%02d", static_cast<int>(b));
        save_chain(model.chains[b], dir / name);
    }
    for (std::size_t n = 0; n < model.mode_subspaces.size(); ++n) {
        const Matrix& u = model.mode_subspaces[n];
        std::snprintf(name, sizeof(name), "u_mode_%02d.tten", static_cast<int>(n));
        write_tten(DenseTensor({u.rows(), u.cols()}, Eigen::Map<const Vector>(u.data(), u.size())),
                   dir / name);
    }
    if (model.method == Method::lda) {
        const Matrix& u = model.lda_subspace;
        write_tten(DenseTensor({u.rows(), u.cols()}, Eigen::Map<const Vector>(u.data(), u.size())),
                   dir / "u.tten");
    }

    // train features stacked (dim x count)
    const Index dim = model.train_features.features.empty() ? 0 : model.train_features.features[0].size();
    Matrix feat(dim, model.train_features.size());
    for (Index i = 0; i < model.train_features.size(); ++i) {
        feat.col(i) = model.train_features.features[static_cast<std::size_t>(i)];
    }
    write_tten(DenseTensor({feat.rows(), feat.cols()}, Eigen::Map<const Vector>(feat.data(), feat.size())),
               dir / "features.tten");
}

TrainedModel load_model(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("cannot read model manifest in " + dir.string());
    json manifest = json::parse(in);

    TrainedModel model;
    model.method = parse_method(manifest.at("method").get<std::string>());
    model.lambda = manifest.at("lambda").get<double>();
    model.sample_shape = manifest.at("sample_shape").get<Shape>();
    model.spec.boundaries = manifest.at("boundaries").get<std::vector<Index>>();
    model.ranks_used = manifest.at("ranks").get<std::vector<std::vector<Index>>>();
    model.objective_trace = manifest.at("objective_trace").get<std::vector<double>>();
    const auto labels = manifest.at("train_labels").get<std::vector<int>>();

    char name[32];
    const auto chain_count = manifest.at("chain_count").get<std::size_t>();
    for (std::size_t b = 0; b < chain_count; ++b) {
        std::snprintf(name, sizeof(name), "branch_%02d", static_cast<int>(b));
        model.chains.push_back(load_chain(dir / name));
    }
    const auto mode_count = manifest.at("mode_subspace_count").get<std::size_t>();
    for (std::size_t n = 0; n < mode_count; ++n) {
        std::snprintf(name, sizeof(name), "u_mode_%02d.tten", static_cast<int>(n));
        const DenseTensor t = read_tten(dir / name);
        model.mode_subspaces.push_back(Eigen::Map<const Matrix>(t.data(), t.dim(0), t.dim(1)));
    }

    switch (model.method) {
        case Method::lda: {
            const DenseTensor t = read_tten(dir / "u.tten");
            model.lda_subspace = Eigen::Map<const Matrix>(t.data(), t.dim(0), t.dim(1));
            const Matrix u = model.lda_subspace;
            model.extract = [u](const DenseTensor& y) { return project(u, y); };
            model.storage.subspace_elements = u.size();
            break;
        }
        case Method::cmda:
        case Method::dgtda: {
            const auto subspaces = model.mode_subspaces;
            model.extract = [subspaces](const DenseTensor& y) {
                return Vector(tucker_core(y, subspaces).values());
            };
            for (const auto& u : subspaces) model.storage.subspace_elements += u.size();
            break;
        }
        case Method::ttda: {
            const Matrix u = subspace_matrix(model.chains.at(0));
            model.extract = [u](const DenseTensor& y) { return project(u, y); };
            for (const auto& f : model.chains[0].factors()) model.storage.subspace_elements += f.core.size();
            break;
        }
        case Method::two_way:
        case Method::three_way: {
            const auto chains = model.chains;
            const auto ranges = branch_ranges(model.spec, static_cast<Index>(model.sample_shape.size()));
            model.extract = [chains, ranges](const DenseTensor& y) {
                return Vector(project_branches(y, chains, ranges).values());
            };
            for (const auto& chain : chains) {
                for (const auto& f : chain.factors()) model.storage.subspace_elements += f.core.size();
            }
            break;
        }
    }

    const DenseTensor feat = read_tten(dir / "features.tten");
    Eigen::Map<const Matrix> fm(feat.data(), feat.dim(0), feat.dim(1));
    for (Index i = 0; i < fm.cols(); ++i) {
        model.train_features.add(fm.col(i), labels.at(static_cast<std::size_t>(i)));
    }
    model.storage.core_elements = feat.size();
    return model;
}

namespace {

struct Split {
    LabeledTensorSet train;
    std::vector<DenseTensor> test;
    std::vector<int> test_labels;
};

Split split_data(const LabeledTensorSet& data, const ExperimentConfig& cfg, std::uint64_t seed) {
    Split split;
    split.train = LabeledTensorSet(data.sample_shape());
    std::mt19937_64 rng(seed);
    for (Index c = 0; c < data.num_classes(); ++c) {
        const Index k_c = data.class_size(c);
        if (k_c < 2) throw std::invalid_argument("every class needs at least two samples to split");
        Index n_train = cfg.train_per_class > 0
                            ? cfg.train_per_class
                            : static_cast<Index>(std::lround(cfg.train_fraction * static_cast<double>(k_c)));
        n_train = std::clamp<Index>(n_train, 1, k_c - 1);
        std::vector<Index> order(static_cast<std::size_t>(k_c));
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (Index i = 0; i < k_c; ++i) {
            if (i < n_train) {
                split.train.add_sample(c, data.sample(c, order[static_cast<std::size_t>(i)]));
            } else {
                split.test.push_back(data.sample(c, order[static_cast<std::size_t>(i)]));
                split.test_labels.push_back(static_cast<int>(c));
            }
        }
    }
    return split;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
    RunResult result;
    result.method = cfg.method;
    result.tau = cfg.tau;
    result.seed = cfg.seed;
    result.lambda = cfg.lambda;

    const LabeledTensorSet data = load_experiment_data(cfg);
    data.validate();

    // inner-solver traces append per sweep; start each run from an empty file
    if (!cfg.stiefel_trace_csv.empty()) std::ofstream(cfg.stiefel_trace_csv, std::ios::trunc).close();

    std::vector<double> accuracies;
    double total_train_seconds = 0.0;
    double storage_norm = 0.0;
    std::vector<std::vector<Index>> last_ranks;
    std::vector<double> last_trace;

    for (int rep = 0; rep < cfg.repeats; ++rep) {
        const Split split = split_data(data, cfg, mix_seed(cfg.seed, static_cast<std::uint64_t>(rep)));

        double lambda = cfg.lambda;
        if (cfg.lambda_auto) {
            const Trainer trainer = [&cfg](const LabeledTensorSet& train, double lam) {
                return train_model(cfg.method, train, lam, cfg).extract;
            };
            lambda = select_lambda(split.train, default_lambda_grid(), trainer, cfg.lambda_holdout,
                                   cfg.lambda_trials, mix_seed(cfg.seed, 0xabcdef + rep))
                         .lambda;
        }
        result.lambda = lambda;

        const auto t0 = std::chrono::steady_clock::now();
        const TrainedModel model = train_model(cfg.method, split.train, lambda, cfg);
        const auto t1 = std::chrono::steady_clock::now();
        total_train_seconds += std::chrono::duration<double>(t1 - t0).count();

        std::vector<Vector> test_features;
        for (const auto& y : split.test) test_features.push_back(model.extract(y));
        accuracies.push_back(accuracy(nn1_classify(model.train_features, test_features), split.test_labels));

        storage_norm = normalized_storage(model.storage, split.train.total_samples(), data.sample_size());
        last_ranks = model.ranks_used;
        last_trace = model.objective_trace;

        if (!cfg.model_dir.empty() && rep == cfg.repeats - 1) save_model(model, cfg.model_dir);
    }

    if (!cfg.trace_csv.empty()) {
        std::ofstream trace(cfg.trace_csv);
        trace << "update,objective\n";
        for (std::size_t i = 0; i < last_trace.size(); ++i) trace << i << ',' << last_trace[i] << '\n';
    }

    const double n = static_cast<double>(accuracies.size());
    const double mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
    double var = 0.0;
    for (double a : accuracies) var += (a - mean) * (a - mean);

    result.ranks_label = ranks_label(last_ranks);
    result.storage_norm = storage_norm;
    result.accuracy_mean = mean;
    result.accuracy_std = std::sqrt(var / n);
    result.train_seconds = total_train_seconds / n;
    return result;
}

std::vector<RunResult> sweep(const ExperimentConfig& cfg, const std::vector<Method>& methods,
                             const std::vector<double>& tau_grid) {
    const std::vector<Method> method_list = methods.empty() ? std::vector<Method>{cfg.method} : methods;
    const std::vector<double> grid = tau_grid.empty() ? std::vector<double>{cfg.tau} : tau_grid;

    std::vector<ExperimentConfig> points;
    for (const Method m : method_list) {
        for (const double tau : grid) {
            ExperimentConfig point = cfg;
            point.method = m;
            point.tau = tau;
            point.model_dir.clear();
            point.trace_csv.clear();
            points.push_back(std::move(point));
        }
    }

    std::vector<RunResult> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) {
            try {
                rows[i] = run(points[i]);
            } catch (const std::exception& e) {
                rows[i].method = points[i].method;
                rows[i].tau = points[i].tau;
                rows[i].seed = points[i].seed;
                rows[i].failed = true;
                rows[i].error = e.what();
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(points.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

const char* kResultsCsvHeader = "method,tau,ranks,lambda,storage_norm,accuracy_mean,accuracy_std,train_seconds,seed";

void write_csv(const std::vector<RunResult>& rows, std::ostream& out) {
    out << kResultsCsvHeader << '\n';
    for (const auto& row : rows) {
        out << method_name(row.method) << ',';
        if (row.tau > 0.0) out << row.tau;
        out << ',' << row.ranks_label << ',' << row.lambda << ',';
        if (row.failed) {
            out << "nan,nan,nan,nan," << row.seed << '\n';
            continue;
        }
        out << row.storage_norm << ',' << row.accuracy_mean << ',' << row.accuracy_std << ','
            << row.train_seconds << ',' << row.seed << '\n';
    }
}

}  // namespace ttda
