#include "ttda/dataset.hpp"
#include "ttda/experiment.hpp"
#include "ttda/tten_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace ttda;

ExperimentConfig build_config(const std::string& config_path, const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::from_file(config_path);
    for (const auto& pair : overrides) cfg.set_pair(pair);
    return cfg;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::vector<Method> parse_method_list(const std::string& text) {
    std::vector<Method> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_method(item));
    return out;
}

void emit_rows(const std::vector<RunResult>& rows, const std::string& csv_path) {
    write_csv(rows, std::cout);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot open " + csv_path);
        write_csv(rows, out);
    }
}

int cmd_decompose(const std::string& input, double tau, const std::string& ranks_text,
                  const std::string& save_dir) {
    const DenseTensor t = read_tten(input);
    TTChain chain = ranks_text.empty()
                        ? tt_svd(t, tau)
                        : tt_svd(t, [&] {
                              std::vector<Index> ranks;
                              std::stringstream ss(ranks_text);
                              std::string item;
                              while (std::getline(ss, item, ',')) ranks.push_back(std::stoll(item));
                              return ranks;
                          }());

    std::cout << "ranks:";
    for (Index r : chain.ranks()) std::cout << ' ' << r;
    std::cout << '\n';

    const Matrix u = subspace_matrix(chain);
    const DenseTensor back = reconstruct(u, t, t.shape());
    const double denom = t.values().norm();
    const double rel = denom > 0.0 ? (t.values() - back.values()).norm() / denom : 0.0;
    std::cout << "relative_error: " << rel << '\n';

    double max_ortho = 0.0;
    for (const auto& f : chain.factors()) max_ortho = std::max(max_ortho, f.orthogonality_error());
    std::cout << "max_orthogonality_error: " << max_ortho << '\n';

    if (!save_dir.empty()) save_chain(chain, save_dir);
    return 0;
}

int cmd_bench(Index n_modes, Index i, Index r, Index c, Index k) {
    std::cout << "structure,f,exact_elements,closed_form,normalized\n";
    const Index raw = [&] {
        Index p = c * k;
        for (Index m = 0; m < n_modes; ++m) p *= i;
        return p;
    }();
    for (Index f = 1; f <= n_modes; ++f) {
        Shape shape(static_cast<std::size_t>(n_modes), i);
        BranchSpec spec;
        const Index base = n_modes / f;
        Index extra = n_modes % f;
        Index pos = 0;
        for (Index b = 0; b + 1 < f; ++b) {
            pos += base + (extra > 0 ? 1 : 0);
            if (extra > 0) --extra;
            spec.boundaries.push_back(pos);
        }
        const auto ranges = branch_ranges(spec, n_modes);
        std::vector<std::vector<Index>> ranks;
        for (const auto& range : ranges) ranks.emplace_back(static_cast<std::size_t>(range.length()), r);
        const StorageCount count = storage_count(shape, spec, ranks, c * k);
        const char* label = f == 1 ? "tt" : (f == 2 ? "2wtt" : (f == 3 ? "3wtt" : (f == n_modes ? "td" : "multi")));
        std::cout << label << ',' << f << ',' << count.total() << ','
                  << storage_closed_form(n_modes, i, r, c, k, f) << ','
                  << static_cast<double>(count.total()) / static_cast<double>(raw) << '\n';
    }
    const BranchCountEstimate est = optimal_branch_count(static_cast<double>(r), static_cast<double>(i),
                                                         static_cast<double>(c), static_cast<double>(k),
                                                         n_modes);
    std::cout << "optimal_f_raw," << est.raw << "\noptimal_f," << est.value << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tensor-train discriminant analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;

    auto add_config_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--set", overrides, "config override key=value (repeatable)");
    };

    // decompose
    auto* decompose = app.add_subcommand("decompose", "TT-SVD a TTEN file, report ranks and error");
    std::string dec_input, dec_ranks, dec_save;
    double dec_tau = 1e-8;
    decompose->add_option("input", dec_input, "TTEN file")->required();
    decompose->add_option("--tau", dec_tau, "truncation threshold in (0,1]");
    decompose->add_option("--ranks", dec_ranks, "explicit ranks, comma separated");
    decompose->add_option("--save-chain", dec_save, "directory for the decomposed chain");

    // synth
    auto* synth = app.add_subcommand("synth", "emit a synthetic dataset to disk");
    std::string synth_out;
    synth->add_option("--out", synth_out, "output dataset directory")->required();
    add_config_options(synth);

    // train
    auto* train = app.add_subcommand("train", "train a model and save it");
    add_config_options(train);

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
    std::string eval_model, eval_data;
    eval->add_option("--model", eval_model, "model directory")->required();
    eval->add_option("--data", eval_data, "TTEN dataset directory")->required();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run a method x tau grid and emit the results CSV");
    std::string sweep_taus, sweep_methods;
    sweep_cmd->add_option("--tau-grid", sweep_taus, "comma separated tau values");
    sweep_cmd->add_option("--methods", sweep_methods, "comma separated method names");
    add_config_options(sweep_cmd);

    // bench
    auto* bench = app.add_subcommand("bench", "storage table and optimal branch count");
    Index b_n = 4, b_i = 8, b_r = 2, b_c = 10, b_k = 20;
    bench->add_option("--n", b_n, "number of modes");
    bench->add_option("--i", b_i, "mode size");
    bench->add_option("--r", b_r, "rank");
    bench->add_option("--c", b_c, "classes");
    bench->add_option("--k", b_k, "samples per class");

    CLI11_PARSE(app, argc, argv);

    try {
        if (decompose->parsed()) return cmd_decompose(dec_input, dec_tau, dec_ranks, dec_save);

        if (synth->parsed()) {
            ExperimentConfig cfg = build_config(config_path, overrides);
            SyntheticInfo info;
            const LabeledTensorSet data = generate_synthetic(cfg.synthetic, &info);
            save_tten_dataset(data, synth_out);
            std::cout << "classes: " << data.num_classes() << "\nsamples: " << data.total_samples()
                      << "\nmin_mean_distance: " << info.min_mean_distance << '\n';
            return 0;
        }

        if (train->parsed()) {
            ExperimentConfig cfg = build_config(config_path, overrides);
            if (cfg.model_dir.empty()) throw std::invalid_argument("train needs model_dir in the config");
            const RunResult row = run(cfg);
            emit_rows({row}, cfg.output_csv);
            return row.failed ? 1 : 0;
        }

        if (eval->parsed()) {
            const TrainedModel model = load_model(eval_model);
            const LabeledTensorSet data = load_tten_dataset(eval_data);
            const bool needs_reshape = data.sample_shape() != model.sample_shape;
            std::vector<Vector> features;
            std::vector<int> truth;
            for (Index c = 0; c < data.num_classes(); ++c) {
                for (Index k = 0; k < data.class_size(c); ++k) {
                    const DenseTensor& raw = data.sample(c, k);
                    features.push_back(model.extract(needs_reshape ? reshape(raw, model.sample_shape) : raw));
                    truth.push_back(static_cast<int>(c));
                }
            }
            const double acc = accuracy(nn1_classify(model.train_features, features), truth);
            std::cout << "accuracy: " << acc << '\n';
            return 0;
        }

        if (sweep_cmd->parsed()) {
            ExperimentConfig cfg = build_config(config_path, overrides);
            const auto rows = sweep(cfg,
                                    sweep_methods.empty() ? std::vector<Method>{} : parse_method_list(sweep_methods),
                                    sweep_taus.empty() ? std::vector<double>{} : parse_double_list(sweep_taus));
            emit_rows(rows, cfg.output_csv);
            for (const auto& row : rows) {
                if (row.failed) std::cerr << "point failed: " << row.error << '\n';
            }
            return 0;
        }

        if (bench->parsed()) return cmd_bench(b_n, b_i, b_r, b_c, b_k);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
