#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "triage/data/preprocess.hpp"
#include "triage/data/synthetic.hpp"
#include "triage/error.hpp"
#include "triage/eval/grid_search.hpp"

#include <mutex>
#include <set>

using namespace triage;
using namespace triage::eval;
using data::kNegative;
using data::kPositive;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::usage;
}

data::Dataset small_synthetic(std::size_t npos, std::size_t nneg, double separation, std::uint64_t seed,
                              double missing = 0.1)
{
    return data::gen_synthetic(
        data::separated_gaussians(test::numbered_schema(4), npos, nneg, separation, missing, seed));
}

// Leaf-only tree voting +1 whatever the input.
store::Classifier always_positive(std::size_t d)
{
    cart::TreeNode leaf;
    leaf.weight_positive = 1.0;
    leaf.samples = 1;
    return cart::TreeModel({leaf}, d, 0, {});
}

void same_predictions(const CvResult& a, const CvResult& b)
{
    REQUIRE(a.predictions.size() == b.predictions.size());
    for (std::size_t i = 0; i < a.predictions.size(); ++i) {
        CHECK(a.predictions[i].label == b.predictions[i].label);
        CHECK(a.predictions[i].score == b.predictions[i].score);
    }
    CHECK(a.counts == b.counts);
}

} // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("reference values")
    {
        const auto perfect = compute_metrics({5, 0, 5, 0});
        CHECK(perfect.balanced_accuracy == 1.0);
        CHECK(perfect.sensitivity == 1.0);
        CHECK(perfect.specificity == 1.0);
        CHECK(perfect.precision == 1.0);

        const auto m = compute_metrics({7, 1, 4, 1});
        CHECK(m.sensitivity == 0.875);
        CHECK(m.specificity == 0.8);
        CHECK(m.precision == 0.875);
        CHECK(m.balanced_accuracy == 0.8375);
    }

    TEST_CASE("printed percentages agree with the mean of the two recalls")
    {
        // 87.50 and 80.23 give 83.865, printed as 83.87
        const double balanced = (87.50 + 80.23) / 2.0;
        CHECK(std::abs(balanced - 83.87) <= 0.01 + 1e-9);
    }

    TEST_CASE("precision is undefined without positive predictions")
    {
        const auto m = compute_metrics({0, 3, 4, 0});
        CHECK_FALSE(m.precision.has_value());
        CHECK(m.sensitivity == 0.0);
        CHECK(m.balanced_accuracy == 0.5);
    }

    TEST_CASE("an absent class is a contract error")
    {
        CHECK(kind_of([] { compute_metrics({3, 1, 0, 0}); }) == ErrorKind::contract);
        CHECK(kind_of([] { compute_metrics({0, 0, 2, 2}); }) == ErrorKind::contract);
    }

    TEST_CASE("balanced accuracy is exactly the mean of the recalls")
    {
        std::mt19937_64 rng(1);
        std::uniform_int_distribution<std::size_t> c(0, 300);
        for (int i = 0; i < 1000; ++i) {
            const ConfusionCounts k{c(rng), c(rng) + 1, c(rng), c(rng) + 1};
            const auto m = compute_metrics(k);
            CHECK(m.balanced_accuracy == (m.sensitivity + m.specificity) / 2.0);
            CHECK(k.positives() == k.tp + k.fn);
        }
    }

    TEST_CASE("counts accumulate by truth and prediction")
    {
        ConfusionCounts c;
        c.add(kPositive, kPositive);
        c.add(kPositive, kNegative);
        c.add(kNegative, kNegative);
        c.add(kNegative, kPositive);
        c.add(kNegative, kPositive);
        CHECK(c == ConfusionCounts{1, 1, 1, 2});
    }
}

TEST_SUITE("class weights")
{
    TEST_CASE("inverse class frequency")
    {
        std::vector<int> labels(208, kPositive);
        labels.insert(labels.end(), 86, kNegative);
        const auto w = class_weights(labels);
        CHECK(w.positive == doctest::Approx(294.0 / 416.0));
        CHECK(w.negative == doctest::Approx(294.0 / 172.0));
        CHECK(w.positive == doctest::Approx(0.7067).epsilon(1e-4));
        CHECK(w.negative == doctest::Approx(1.7093).epsilon(1e-4));

        std::vector<int> even(50, kPositive);
        even.insert(even.end(), 50, kNegative);
        CHECK(class_weights(even) == data::ClassWeights{1.0, 1.0});

        const std::vector<int> one{kPositive, kPositive};
        CHECK(kind_of([&] { class_weights(one); }) == ErrorKind::contract);
    }

    TEST_CASE("both classes carry the same total weight")
    {
        for (std::size_t p = 1; p < 40; ++p) {
            for (std::size_t n = 1; n < 40; n += 3) {
                std::vector<int> labels(p, kPositive);
                labels.insert(labels.end(), n, kNegative);
                const auto w = class_weights(labels);
                CHECK(w.positive * p == doctest::Approx(w.negative * n).epsilon(1e-14));
            }
        }
    }
}

TEST_SUITE("loocv")
{
    TEST_CASE("one fold per row")
    {
        const auto ds = small_synthetic(5, 5, 3.0, 1);
        const auto r = loocv(ds, Family::tree, {.max_depth = 2}, {});
        CHECK(r.predictions.size() == 10);
        CHECK(r.counts.positives() + r.counts.negatives() == 10);
        CHECK(r.hyperparams->max_depth == 2);
    }

    TEST_CASE("a constant classifier scores one half")
    {
        const auto ds = small_synthetic(5, 5, 3.0, 2);
        const auto r = loocv(ds, [](const data::Dataset& train) { return always_positive(train.n_features()); });
        CHECK(r.metrics.balanced_accuracy == 0.5);
        CHECK(r.metrics.sensitivity == 1.0);
    }

    TEST_CASE("folds never see the held-out row")
    {
        const auto ds = small_synthetic(6, 6, 2.0, 3);
        std::mutex mu;
        std::vector<data::Dataset> seen;
        const auto r = loocv(ds, [&](const data::Dataset& train) {
            std::lock_guard lock(mu);
            seen.push_back(train);
            return always_positive(train.n_features());
        });
        REQUIRE(seen.size() == ds.n_samples());
        for (std::size_t i = 0; i < ds.n_samples(); ++i) {
            const auto raw = ds.without_row(i);
            const auto params = data::fit_preprocess(raw);
            const auto expected = data::apply_preprocess(params, raw);
            CHECK(std::count(seen.begin(), seen.end(), expected) == 1);
            // fold statistics differ from whole-data statistics
            CHECK_FALSE(params == data::fit_preprocess(ds));
        }
    }

    TEST_CASE("a class with a single row leaves a single-class fold")
    {
        const auto ds = small_synthetic(5, 1, 3.0, 4);
        CHECK(kind_of([&] { loocv(ds, Family::tree, {.max_depth = 2}, {}); }) == ErrorKind::fit);
    }

    TEST_CASE("separated classes are learned by every family")
    {
        const auto ds = small_synthetic(20, 15, 4.0, 5);
        CHECK(loocv(ds, Family::svm_rbf, {.c = 1.0, .gamma = 0.25}, {}).metrics.balanced_accuracy >= 0.95);
        CHECK(loocv(ds, Family::svm_linear, {.c = 1.0}, {}).metrics.balanced_accuracy >= 0.95);
        CHECK(loocv(ds, Family::forest, {.max_depth = 4, .n_tree = 20, .max_features = forest::MaxFeatures::sqrt}, {})
                  .metrics.balanced_accuracy >= 0.9);
    }
}

TEST_SUITE("grids")
{
    TEST_CASE("coarse and fine grid sizes")
    {
        CHECK(expand(coarse_grid(Family::svm_linear)).size() == 21);
        CHECK(expand(coarse_grid(Family::svm_rbf)).size() == 441);
        CHECK(expand(coarse_grid(Family::tree)).size() == 10);
        CHECK(expand(coarse_grid(Family::forest)).size() == 120);
        const auto fine = fine_grid(Family::svm_rbf, {.c = 4.0, .gamma = 0.5});
        CHECK(expand(fine).size() == 400);
        CHECK(fine.c_values.front() == 2.0);
        CHECK(fine.c_values.back() == 8.0);
        CHECK(fine.gamma_values.front() == 0.25);
        CHECK(fine.gamma_values.back() == 1.0);
        CHECK(expand(fine_grid(Family::svm_linear, {.c = 1.0})).size() == 20);
        CHECK(kind_of([] { fine_grid(Family::tree, {.max_depth = 3}); }) == ErrorKind::contract);
    }

    TEST_CASE("coarse values are the powers of two from 2^-10 to 2^10")
    {
        const auto g = coarse_grid(Family::svm_rbf);
        for (int e = -10; e <= 10; ++e) {
            CHECK(g.c_values[static_cast<std::size_t>(e + 10)] == std::ldexp(1.0, e));
        }
        CHECK(g.gamma_values == g.c_values);
    }

    TEST_CASE("expansion order")
    {
        const auto p = expand(coarse_grid(Family::svm_rbf));
        CHECK(p[0].c == p[1].c);
        CHECK(p[0].gamma < p[1].gamma);
        CHECK(p[21].c == 2.0 * p[0].c);
        const auto f = expand(coarse_grid(Family::forest));
        CHECK(f[0].n_tree == 10);
        CHECK(f[0].max_depth == 1);
        CHECK(f[1].max_depth == 2);
        CHECK(f[10].max_features == forest::MaxFeatures::sqrt);
        CHECK(f[30].n_tree == 20);
    }

    TEST_CASE("empty candidate lists are rejected")
    {
        GridSpec g;
        g.family = Family::svm_rbf;
        g.c_values = {1.0};
        CHECK(kind_of([&] { expand(g); }) == ErrorKind::contract);
    }

    TEST_CASE("reported configurations are representable")
    {
        CHECK(describe(Family::svm_rbf, {.c = 45.0, .gamma = 0.0047}) == "C=45, gamma=0.0047");
        CHECK(describe(Family::svm_linear, {.c = 1.0}) == "C=1");
        CHECK(describe(Family::forest, {.max_depth = 9, .n_tree = 50, .max_features = forest::MaxFeatures::log2}) ==
              "max_d=9, n_tree=50, max_features=log2");
        const auto j = point_to_json(Family::svm_rbf, {.c = 45.0, .gamma = 0.0047});
        CHECK(j.dump() == R"({"C":45.0,"gamma":0.0047})");
    }

    TEST_CASE("linspace includes both ends")
    {
        const auto v = linspace(0.5, 2.0, 20);
        CHECK(v.size() == 20);
        CHECK(v.front() == 0.5);
        CHECK(v.back() == 2.0);
        CHECK(v[1] - v[0] == doctest::Approx(1.5 / 19.0));
    }

    TEST_CASE("tie rule")
    {
        const MetricReport hi{0.9, 0.9, 0.9, {}};
        const MetricReport lo{0.8, 0.8, 0.8, {}};
        CHECK(better(Family::svm_rbf, hi, {.c = 8, .gamma = 8}, lo, {.c = 1, .gamma = 1}));
        CHECK(better(Family::svm_rbf, hi, {.c = 1, .gamma = 8}, hi, {.c = 2, .gamma = 1}));
        CHECK(better(Family::svm_rbf, hi, {.c = 1, .gamma = 1}, hi, {.c = 1, .gamma = 2}));
        CHECK_FALSE(better(Family::svm_rbf, hi, {.c = 1, .gamma = 1}, hi, {.c = 1, .gamma = 1}));
        CHECK(better(Family::forest, hi, {.max_depth = 9, .n_tree = 10}, hi, {.max_depth = 1, .n_tree = 20}));
        CHECK(better(Family::tree, hi, {.max_depth = 2}, hi, {.max_depth = 3}));
    }
}

TEST_SUITE("shared-work grid evaluation")
{
    TEST_CASE("matches independent leave-one-out runs point by point")
    {
        const auto ds = small_synthetic(9, 7, 1.0, 6);
        TrainOptions options;
        options.seed = 17;

        GridSpec rbf;
        rbf.family = Family::svm_rbf;
        rbf.c_values = {0.25, 4.0};
        rbf.gamma_values = {0.1, 2.0};
        GridSpec lin;
        lin.family = Family::svm_linear;
        lin.c_values = {0.01, 1.0, 100.0};
        GridSpec tree;
        tree.family = Family::tree;
        tree.max_depths = {1, 2, 3, 6};
        GridSpec forest;
        forest.family = Family::forest;
        forest.max_depths = {1, 3, 5};
        forest.n_trees = {3, 8};
        forest.max_features = {forest::MaxFeatures::all, forest::MaxFeatures::log2};

        for (const auto& spec : {rbf, lin, tree, forest}) {
            const auto points = expand(spec);
            const auto fast = evaluate_grid(ds, spec, options);
            REQUIRE(fast.size() == points.size());
            for (std::size_t p = 0; p < points.size(); ++p) {
                CAPTURE(describe(spec.family, points[p]));
                CHECK(*fast[p].hyperparams == points[p]);
                same_predictions(fast[p], loocv(ds, spec.family, points[p], options));
            }
        }
    }
}

TEST_SUITE("grid search")
{
    TEST_CASE("both rounds are traced and the best point follows the tie rule")
    {
        const auto ds = small_synthetic(8, 6, 1.5, 7);
        std::vector<TraceRecord> streamed;
        SearchOptions options;
        options.on_record = [&](const TraceRecord& r) { streamed.push_back(r); };
        const auto s = grid_search(ds, Family::svm_rbf, options);
        CHECK(s.coarse_evaluations == 441);
        CHECK(s.fine_evaluations == 400);
        CHECK(s.trace.size() == 841);
        CHECK(streamed.size() == 841);
        CHECK(s.trace[440].round == Round::coarse);
        CHECK(s.trace[441].round == Round::fine);
        CHECK(s.trace[441].index == 0);

        // best over the trace, scanning with the tie rule
        const TraceRecord* best = &s.trace.front();
        for (const auto& r : s.trace) {
            if (better(Family::svm_rbf, r.metrics, r.point, best->metrics, best->point)) {
                best = &r;
            }
        }
        CHECK(s.best == best->point);
        CHECK(s.best_result.metrics == best->metrics);

        // the fine round brackets the best coarse point
        const TraceRecord* coarse_best = &s.trace.front();
        for (std::size_t k = 0; k < 441; ++k) {
            if (better(Family::svm_rbf, s.trace[k].metrics, s.trace[k].point, coarse_best->metrics,
                       coarse_best->point)) {
                coarse_best = &s.trace[k];
            }
        }
        CHECK(s.trace[441].point.c == coarse_best->point.c / 2.0);
        CHECK(s.trace.back().point.gamma == coarse_best->point.gamma * 2.0);
    }

    TEST_CASE("tree and forest searches have a single round")
    {
        const auto ds = small_synthetic(6, 6, 2.0, 8);
        SearchOptions options;
        const auto t = grid_search(ds, Family::tree, options);
        CHECK(t.trace.size() == 10);
        CHECK(t.fine_evaluations == 0);
        const auto lin = grid_search(ds, Family::svm_linear, options);
        CHECK(lin.coarse_evaluations == 21);
        CHECK(lin.fine_evaluations == 20);
        options.fine_round = false;
        CHECK(grid_search(ds, Family::svm_linear, options).trace.size() == 21);
    }

    TEST_CASE("trace records replay")
    {
        const auto ds = small_synthetic(7, 6, 1.0, 9);
        SearchOptions options;
        options.train.seed = 4242;
        const auto s = grid_search(ds, Family::forest, options);
        REQUIRE(s.trace.size() == 120);
        for (std::size_t k : {0, 17, 59, 119}) {
            const auto& rec = s.trace[k];
            TrainOptions replay;
            replay.seed = rec.seed;
            const auto again = loocv(ds, rec.family, rec.point, replay);
            CHECK(again.counts == rec.counts);
            CHECK(again.metrics == rec.metrics);
        }
    }

    TEST_CASE("trace and fold files are JSON lines")
    {
        test::TempDir dir;
        const auto ds = small_synthetic(5, 5, 2.0, 10);
        const auto s = grid_search(ds, Family::tree, {});
        write_trace(dir / "trace.jsonl", s.trace);
        write_folds(dir / "folds.jsonl", ds, s.best_result);
        std::istringstream trace(test::read_text(dir / "trace.jsonl"));
        std::string line;
        std::size_t n = 0;
        while (std::getline(trace, line)) {
            const auto j = nlohmann::json::parse(line);
            CHECK(j["family"] == "tree");
            CHECK(j["round"] == "coarse");
            CHECK(j["index"] == n);
            CHECK(j["hyperparams"]["max_depth"] == n + 1);
            CHECK(j.contains("balanced_accuracy"));
            CHECK(j["seed"] == "0");
            ++n;
        }
        CHECK(n == 10);
        std::istringstream folds(test::read_text(dir / "folds.jsonl"));
        n = 0;
        while (std::getline(folds, line)) {
            const auto j = nlohmann::json::parse(line);
            CHECK(j["fold"] == n);
            CHECK(j["truth"] == ds.label(n));
            ++n;
        }
        CHECK(n == 10);
    }
}

TEST_SUITE("refit")
{
    TEST_CASE("the two-point toy refits to the analytic model")
    {
        const auto ds = test::make_dataset(1, {-1.0, 1.0}, {kNegative, kPositive});
        const auto b = refit(ds, Family::svm_linear, {.c = 1000.0}, {}, {});
        const auto& m = std::get<svm::SvmModel>(b.classifier);
        CHECK(std::abs((*m.weight_vector())[0] - 1.0) < 1e-6);
        CHECK(std::abs(m.bias()) < 1e-6);
        CHECK(m.dual_coefs() == std::vector<double>{-0.5, 0.5});
        CHECK(b.predict(std::vector<double>{2.0}).score == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(b.metadata.hyperparams["C"] == 1000.0);
    }

    TEST_CASE("refit predicts training rows and is deterministic")
    {
        const auto ds = small_synthetic(10, 8, 2.0, 11);
        TrainOptions options;
        options.seed = 3;
        const GridPoint p{.max_depth = 4, .n_tree = 10, .max_features = forest::MaxFeatures::log2};
        const auto a = refit(ds, Family::forest, p, options, {"t", "now", {}, 0});
        const auto b = refit(ds, Family::forest, p, options, {"t", "now", {}, 0});
        CHECK(store::encode_bundle(a) == store::encode_bundle(b));
        CHECK(a.metadata.seed == 3);
        for (std::size_t i = 0; i < ds.n_samples(); ++i) {
            const int label = a.predict(ds.row(i)).label;
            CHECK((label == kPositive || label == kNegative));
        }
        REQUIRE(a.class_means);
        CHECK(a.class_means->positive.size() == 4);
    }

    TEST_CASE("class means ignore missing cells")
    {
        const auto ds = test::make_dataset(2, {1.0, data::kMissing, 3.0, 4.0, 10.0, 20.0},
                                           {kPositive, kPositive, kNegative});
        const auto m = class_means(ds);
        CHECK(m.positive == std::vector<double>{2.0, 4.0});
        CHECK(m.negative == std::vector<double>{10.0, 20.0});
    }

    TEST_CASE("invalid hyperparameters are rejected")
    {
        const auto ds = small_synthetic(4, 4, 2.0, 12);
        CHECK(kind_of([&] { refit(ds, Family::svm_rbf, {.c = 1.0}, {}, {}); }) == ErrorKind::contract);
        CHECK(kind_of([&] { refit(ds, Family::forest, {.max_depth = 2}, {}, {}); }) == ErrorKind::contract);
    }
}
