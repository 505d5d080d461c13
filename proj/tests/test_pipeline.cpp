#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ttda/dataset.hpp"
#include "ttda/experiment.hpp"
#include "ttda/tten_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ttda;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.shape = {3, 3, 2};
    spec.generator_ranks = {1, 2, 2, 1};
    spec.classes = 2;
    spec.samples_per_class = 6;
    spec.noise_sigma = 0.05;
    spec.seed = 3;
    return spec;
}

}  // namespace

TEST_CASE("synthetic generation is deterministic and separable") {
    SyntheticInfo info1, info2;
    const LabeledTensorSet a = generate_synthetic(small_spec(), &info1);
    const LabeledTensorSet b = generate_synthetic(small_spec(), &info2);
    CHECK(a.num_classes() == 2);
    CHECK(a.total_samples() == 12);
    for (Index c = 0; c < 2; ++c) {
        for (Index k = 0; k < 6; ++k) {
            CHECK(a.sample(c, k).values() == b.sample(c, k).values());
        }
    }
    CHECK(info1.min_mean_distance == info2.min_mean_distance);
    // unit-norm class means from independent chains stay far apart relative
    // to the 6-sigma noise margin
    CHECK(info1.min_mean_distance > 6.0 * small_spec().noise_sigma * std::sqrt(2.0));

    SUBCASE("a different seed moves the data") {
        SyntheticSpec other = small_spec();
        other.seed = 4;
        const LabeledTensorSet c = generate_synthetic(other);
        CHECK(a.sample(0, 0).values() != c.sample(0, 0).values());
    }

    SUBCASE("bad specs are rejected") {
        SyntheticSpec bad = small_spec();
        bad.generator_ranks = {1, 2, 1};
        CHECK_THROWS_AS(generate_synthetic(bad), std::invalid_argument);
        bad = small_spec();
        bad.noise_sigma = 0.0;
        CHECK_THROWS_AS(generate_synthetic(bad), std::invalid_argument);
    }
}

TEST_CASE("TTEN dataset save/load round trip") {
    const LabeledTensorSet data = generate_synthetic(small_spec());
    TempDir dir("ttda_dataset_test");
    save_tten_dataset(data, dir.path);
    const LabeledTensorSet back = load_tten_dataset(dir.path);
    REQUIRE(back.num_classes() == data.num_classes());
    REQUIRE(back.total_samples() == data.total_samples());
    for (Index c = 0; c < data.num_classes(); ++c) {
        for (Index k = 0; k < data.class_size(c); ++k) {
            CHECK(back.sample(c, k).values() == data.sample(c, k).values());
        }
    }

    SUBCASE("six files, two classes") {
        TempDir six("ttda_dataset_six");
        LabeledTensorSet tiny({2, 2});
        for (Index c = 0; c < 2; ++c) {
            for (Index k = 0; k < 3; ++k) tiny.add_sample(c, DenseTensor({2, 2}));
        }
        save_tten_dataset(tiny, six.path);
        const LabeledTensorSet loaded = load_tten_dataset(six.path);
        CHECK(loaded.num_classes() == 2);
        CHECK(loaded.class_size(0) == 3);
        CHECK(loaded.class_size(1) == 3);
    }

    SUBCASE("missing labels.csv") {
        TempDir empty("ttda_dataset_empty");
        CHECK_THROWS_AS(load_tten_dataset(empty.path), std::runtime_error);
    }
}

TEST_CASE("PGM loading scales 8-bit pixels to [0,1] and reshapes by reinterpretation") {
    TempDir dir("ttda_pgm_test");
    fs::create_directories(dir.path / "class_a");
    fs::create_directories(dir.path / "class_b");

    auto write_pgm = [](const fs::path& path, const std::vector<unsigned char>& pixels, int w, int h) {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n" << w << " " << h << "\n255\n";
        out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    };
    write_pgm(dir.path / "class_a" / "img0.pgm", {0, 255, 128, 64, 32, 16}, 3, 2);
    write_pgm(dir.path / "class_a" / "img1.pgm", std::vector<unsigned char>(6, 10), 3, 2);
    write_pgm(dir.path / "class_b" / "img0.pgm", std::vector<unsigned char>(6, 200), 3, 2);

    const DenseTensor img = load_pgm(dir.path / "class_a" / "img0.pgm");
    CHECK(img.shape() == Shape{2, 3});
    CHECK(img.at({0, 0}) == 0.0);
    CHECK(img.at({0, 1}) == 1.0);
    CHECK(img.at({1, 0}) == doctest::Approx(64.0 / 255.0));

    const LabeledTensorSet data = load_pgm_dataset(dir.path, {3, 2});
    CHECK(data.num_classes() == 2);
    CHECK(data.class_size(0) == 2);
    // reshape is a pure reinterpretation: flattening order is unchanged
    const DenseTensor reshaped = data.sample(0, 0);
    CHECK(reshaped.shape() == Shape{3, 2});
    CHECK((vector_view(reshaped) - vector_view(img)).cwiseAbs().maxCoeff() == 0.0);

    SUBCASE("ascii variant") {
        std::ofstream out(dir.path / "class_a" / "ascii.pgm");
        out << "P2\n# comment line\n2 2\n255\n0 255\n128 255\n";
        out.close();
        const DenseTensor a = load_pgm(dir.path / "class_a" / "ascii.pgm");
        CHECK(a.at({0, 1}) == 1.0);
        CHECK(a.at({1, 0}) == doctest::Approx(128.0 / 255.0));
    }

    SUBCASE("non-8-bit rejected") {
        std::ofstream out(dir.path / "class_a" / "deep.pgm");
        out << "P2\n1 1\n65535\n1234\n";
        out.close();
        CHECK_THROWS_AS(load_pgm(dir.path / "class_a" / "deep.pgm"), std::runtime_error);
    }
}

TEST_CASE("config files parse with overrides and reject unknown keys") {
    TempDir dir("ttda_config_test");
    {
        std::ofstream out(dir.path / "exp.cfg");
        out << "# experiment\n"
            << "method = ttda\n"
            << "synthetic=1\n"
            << "lambda=7.5\n"
            << "ranks=2,2,2,3\n"
            << "seed=11\n";
    }
    ExperimentConfig cfg = ExperimentConfig::from_file(dir.path / "exp.cfg");
    CHECK(cfg.method == Method::ttda);
    CHECK(cfg.use_synthetic);
    CHECK(cfg.lambda == 7.5);
    CHECK(cfg.ranks == std::vector<std::vector<Index>>{{2, 2, 2, 3}});
    CHECK(cfg.seed == 11);

    cfg.set_pair("lambda=auto");
    CHECK(cfg.lambda_auto);
    cfg.set_pair("ranks=2,3;2,2");
    CHECK(cfg.ranks.size() == 2);
    CHECK_THROWS_AS(cfg.set_pair("no_such_key=1"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.set_pair("malformed"), std::invalid_argument);
}

TEST_CASE("protocol defaults are surfaced in the config") {
    const ExperimentConfig cfg;
    CHECK(cfg.tt_max_iter == 200);
    CHECK(cfg.tt_change_tol == 0.1);
    CHECK(cfg.cmda_max_iter == 20);
    CHECK(cfg.cmda_change_tol == 0.1);
    CHECK(cfg.tt_fit_config().max_iter == 200);
    CHECK(cfg.tt_fit_config().factor_change_tol == 0.1);
    CHECK(cfg.cmda_config().max_iter == 20);
    CHECK(cfg.cmda_config().change_tol == 0.1);
    CHECK(cfg.scatter_dim_limit == 4096);
    CHECK(cfg.loop_iter == 3);
}

TEST_CASE("noiseless synthetic data classifies perfectly end to end") {
    ExperimentConfig cfg;
    cfg.use_synthetic = true;
    cfg.synthetic = small_spec();
    cfg.synthetic.noise_sigma = 1e-12;  // effectively identical copies per class
    cfg.synthetic.samples_per_class = 8;
    cfg.lambda = 10.0;
    cfg.ranks = {{2, 2, 2}};
    cfg.seed = 5;

    for (Method m : {Method::ttda, Method::lda, Method::cmda, Method::dgtda, Method::two_way}) {
        ExperimentConfig point = cfg;
        point.method = m;
        // branch split for (3,3,2) is {0} | {1,2}
        if (m == Method::two_way) point.ranks = {{2}, {2, 2}};
        if (m == Method::lda) point.ranks = {{1}};
        const RunResult row = run(point);
        CHECK_FALSE(row.failed);
        CHECK(row.accuracy_mean == 1.0);
    }
}

TEST_CASE("run is deterministic across invocations") {
    ExperimentConfig cfg;
    cfg.use_synthetic = true;
    cfg.synthetic = small_spec();
    cfg.method = Method::ttda;
    cfg.ranks = {{2, 2, 2}};
    cfg.lambda = 10.0;
    cfg.repeats = 3;
    cfg.seed = 42;

    const RunResult a = run(cfg);
    const RunResult b = run(cfg);
    CHECK(a.accuracy_mean == b.accuracy_mean);
    CHECK(a.accuracy_std == b.accuracy_std);
    CHECK(a.storage_norm == b.storage_norm);

    std::vector<RunResult> rows{a};
    std::stringstream csv1, csv2;
    write_csv(rows, csv1);
    rows[0] = b;
    write_csv(rows, csv2);
    std::string header, header2;
    std::getline(csv1, header);
    std::getline(csv2, header2);
    CHECK(header == "method,tau,ranks,lambda,storage_norm,accuracy_mean,accuracy_std,train_seconds,seed");
    CHECK(header == header2);
    // rows identical except the timing column
    auto fields = [](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        return out;
    };
    std::string r1, r2;
    std::getline(csv1, r1);
    std::getline(csv2, r2);
    const auto f1 = fields(r1), f2 = fields(r2);
    REQUIRE(f1.size() == 9);
    REQUIRE(f2.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        if (i != 7) CHECK(f1[i] == f2[i]);
    }
}

TEST_CASE("tau sweeps produce monotone storage and tagged rows") {
    ExperimentConfig cfg;
    cfg.use_synthetic = true;
    cfg.synthetic = small_spec();
    cfg.synthetic.samples_per_class = 8;
    cfg.method = Method::ttda;
    cfg.lambda = 10.0;
    cfg.seed = 2;
    cfg.workers = 2;

    const std::vector<double> grid{0.9, 0.7, 0.5, 0.3};
    const auto rows = sweep(cfg, {}, grid);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK_FALSE(rows[i].failed);
        CHECK(rows[i].tau == grid[i]);
        CHECK(rows[i].storage_norm <= 1.0);
        if (i > 0) CHECK(rows[i].storage_norm >= rows[i - 1].storage_norm - 1e-12);
    }

    SUBCASE("one-point grid equals run") {
        ExperimentConfig point = cfg;
        point.tau = 0.5;
        const auto one = sweep(point, {}, {});
        REQUIRE(one.size() == 1);
        const RunResult direct = run(point);
        CHECK(one[0].accuracy_mean == direct.accuracy_mean);
        CHECK(one[0].storage_norm == direct.storage_norm);
    }

    SUBCASE("methods tag their rows and a failed point is recorded, not fatal") {
        ExperimentConfig multi = cfg;
        const auto grid_rows = sweep(multi, {Method::ttda, Method::two_way, Method::three_way}, {0.5});
        REQUIRE(grid_rows.size() == 3);
        CHECK(grid_rows[0].method == Method::ttda);
        CHECK(grid_rows[1].method == Method::two_way);
        CHECK(grid_rows[2].method == Method::three_way);

        ExperimentConfig broken = cfg;
        broken.ranks = {{50, 50, 50}};  // infeasible for lda guardrail below
        broken.tau = 0.0;
        broken.method = Method::lda;
        broken.scatter_dim_limit = 2;  // force a failure
        const auto bad = sweep(broken, {Method::lda, Method::lda}, {});
        REQUIRE(bad.size() == 2);
        CHECK(bad[0].failed);
        CHECK_FALSE(bad[0].error.empty());
    }
}

TEST_CASE("model save/load round trip preserves predictions") {
    const LabeledTensorSet data = generate_synthetic(small_spec());
    ExperimentConfig cfg;
    cfg.ranks = {{2, 2, 2}};

    for (Method m : {Method::ttda, Method::lda, Method::cmda, Method::two_way}) {
        ExperimentConfig point = cfg;
        if (m == Method::two_way) point.ranks = {{2}, {2, 2}};
        if (m == Method::lda) point.ranks = {{1}};
        const TrainedModel model = train_model(m, data, 5.0, point);

        TempDir dir("ttda_model_roundtrip");
        save_model(model, dir.path);
        const TrainedModel back = load_model(dir.path);

        CHECK(back.method == m);
        CHECK(back.lambda == model.lambda);
        CHECK(back.storage.total() == model.storage.total());
        for (Index c = 0; c < data.num_classes(); ++c) {
            const Vector a = model.extract(data.sample(c, 0));
            const Vector b = back.extract(data.sample(c, 0));
            CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
        }
        REQUIRE(back.train_features.size() == model.train_features.size());
        CHECK(back.train_features.labels == model.train_features.labels);
    }
}

TEST_CASE("explicit boundaries override the balanced split") {
    ExperimentConfig cfg;
    cfg.use_synthetic = true;
    cfg.synthetic = small_spec();  // shape 3x3x2, balanced split would be {0}|{1,2}
    cfg.method = Method::two_way;
    cfg.boundaries = {2};  // force {0,1}|{2}
    cfg.ranks = {{2, 3}, {2}};
    cfg.lambda = 5.0;
    cfg.seed = 9;
    const RunResult row = run(cfg);
    CHECK_FALSE(row.failed);
    CHECK(row.ranks_label == "2x3|2");
    CHECK(row.accuracy_mean > 0.5);
}

TEST_CASE("auto lambda selection lands on a grid point and runs end to end") {
    ExperimentConfig cfg;
    cfg.use_synthetic = true;
    cfg.synthetic = small_spec();
    cfg.synthetic.samples_per_class = 10;
    cfg.method = Method::ttda;
    cfg.ranks = {{2, 2, 2}};
    cfg.set_pair("lambda=auto");
    cfg.lambda_holdout = 2;
    cfg.lambda_trials = 2;
    cfg.seed = 31;
    const RunResult row = run(cfg);
    CHECK_FALSE(row.failed);
    bool on_grid = false;
    for (double g : default_lambda_grid()) on_grid = on_grid || row.lambda == g;
    CHECK(on_grid);
    CHECK(row.accuracy_mean >= 0.8);  // separable synthetic data
}

TEST_CASE("reshape config reinterprets dataset samples") {
    TempDir dir("ttda_reshape_test");
    const LabeledTensorSet data = generate_synthetic(small_spec());  // 3x3x2
    save_tten_dataset(data, dir.path);

    ExperimentConfig cfg;
    cfg.data_dir = dir.path.string();
    cfg.reshape = {9, 2};
    const LabeledTensorSet loaded = load_experiment_data(cfg);
    CHECK(loaded.sample_shape() == Shape{9, 2});
    CHECK(loaded.sample(0, 0).values() == data.sample(0, 0).values());
}
