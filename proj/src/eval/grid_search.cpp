#include "triage/eval/grid_search.hpp"

#include "triage/data/preprocess.hpp"
#include "triage/error.hpp"
#include "triage/util/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <tuple>

namespace triage::eval {

std::string_view to_string(Round r) noexcept
{
    return r == Round::coarse ? "coarse" : "fine";
}

namespace {

std::vector<double> powers_of_two(int lo, int hi)
{
    std::vector<double> out;
    for (int e = lo; e <= hi; ++e) {
        out.push_back(std::ldexp(1.0, e));
    }
    return out;
}

bool is_svm(Family f) noexcept
{
    return f == Family::svm_linear || f == Family::svm_rbf;
}

template <class T>
T largest(const std::vector<T>& v)
{
    return *std::max_element(v.begin(), v.end());
}

void require_nonempty(bool ok, const char* what)
{
    if (!ok) {
        throw Error(ErrorKind::contract, std::string("grid has no ") + what + " values");
    }
}

} // namespace

GridSpec coarse_grid(Family family)
{
    GridSpec g;
    g.family = family;
    g.round = Round::coarse;
    switch (family) {
    case Family::svm_rbf: g.gamma_values = powers_of_two(-10, 10); [[fallthrough]];
    case Family::svm_linear: g.c_values = powers_of_two(-10, 10); break;
    case Family::forest:
        g.n_trees = {10, 20, 50, 100};
        g.max_features = {forest::MaxFeatures::all, forest::MaxFeatures::sqrt, forest::MaxFeatures::log2};
        [[fallthrough]];
    case Family::tree:
        for (std::size_t d = 1; d <= 10; ++d) {
            g.max_depths.push_back(d);
        }
        break;
    }
    return g;
}

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
    if (count == 0) {
        return {};
    }
    if (count == 1) {
        return {lo};
    }
    std::vector<double> out(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lo + step * static_cast<double>(i);
    }
    out.back() = hi;
    return out;
}

GridSpec fine_grid(Family family, const GridPoint& best)
{
    if (!is_svm(family)) {
        throw Error(ErrorKind::contract, "the fine round applies to SVM families only");
    }
    validate_point(family, best);
    GridSpec g;
    g.family = family;
    g.round = Round::fine;
    g.c_values = linspace(best.c / 2.0, best.c * 2.0, 20);
    if (family == Family::svm_rbf) {
        g.gamma_values = linspace(best.gamma / 2.0, best.gamma * 2.0, 20);
    }
    return g;
}

std::vector<GridPoint> expand(const GridSpec& spec)
{
    std::vector<GridPoint> out;
    switch (spec.family) {
    case Family::svm_linear:
        require_nonempty(!spec.c_values.empty(), "C");
        for (double c : spec.c_values) {
            out.push_back({.c = c});
        }
        break;
    case Family::svm_rbf:
        require_nonempty(!spec.c_values.empty(), "C");
        require_nonempty(!spec.gamma_values.empty(), "gamma");
        for (double c : spec.c_values) {
            for (double g : spec.gamma_values) {
                out.push_back({.c = c, .gamma = g});
            }
        }
        break;
    case Family::tree:
        require_nonempty(!spec.max_depths.empty(), "max_depth");
        for (auto d : spec.max_depths) {
            out.push_back({.max_depth = d});
        }
        break;
    case Family::forest:
        require_nonempty(!spec.max_depths.empty(), "max_depth");
        require_nonempty(!spec.n_trees.empty(), "n_tree");
        require_nonempty(!spec.max_features.empty(), "max_features");
        for (auto n : spec.n_trees) {
            for (auto m : spec.max_features) {
                for (auto d : spec.max_depths) {
                    out.push_back({.max_depth = d, .n_tree = n, .max_features = m});
                }
            }
        }
        break;
    }
    for (const auto& p : out) {
        validate_point(spec.family, p);
    }
    return out;
}

nlohmann::json to_json(const TraceRecord& r)
{
    nlohmann::json j;
    j["round"] = to_string(r.round);
    j["index"] = r.index;
    j["family"] = to_string(r.family);
    j["hyperparams"] = point_to_json(r.family, r.point);
    j["seed"] = std::to_string(r.seed);
    j["counts"] = {{"tp", r.counts.tp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}, {"fp", r.counts.fp}};
    j["balanced_accuracy"] = r.metrics.balanced_accuracy;
    j["sensitivity"] = r.metrics.sensitivity;
    j["specificity"] = r.metrics.specificity;
    j["precision"] = r.metrics.precision ? nlohmann::json(*r.metrics.precision) : nlohmann::json(nullptr);
    return j;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write " + path.string());
    }
    return out;
}

} // namespace

void write_trace(const std::filesystem::path& path, const std::vector<TraceRecord>& trace)
{
    auto out = open_for_write(path);
    for (const auto& r : trace) {
        out << to_json(r).dump() << '\n';
    }
    if (!out) {
        throw Error(ErrorKind::io, "failed writing " + path.string());
    }
}

void write_folds(const std::filesystem::path& path, const data::Dataset& data, const CvResult& result)
{
    if (result.predictions.size() != data.n_samples()) {
        throw Error(ErrorKind::dimension, "fold predictions do not match the dataset");
    }
    auto out = open_for_write(path);
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        const auto& p = result.predictions[i];
        nlohmann::json j = {{"fold", i}, {"truth", data.label(i)}, {"label", p.label}, {"score", p.score}};
        out << j.dump() << '\n';
    }
    if (!out) {
        throw Error(ErrorKind::io, "failed writing " + path.string());
    }
}

namespace {

// Fold-local work shared by every point of the grid.
struct Fold {
    data::Dataset train;
    std::vector<double> test;
    data::ClassWeights weights;
};

Fold make_fold(const data::Dataset& data, std::size_t i, const TrainOptions& options)
{
    const auto raw = data.without_row(i);
    const auto params = data::fit_preprocess(raw);
    Fold f{data::apply_preprocess(params, raw), data::apply_preprocess(params, data.row(i)), {}};
    if (options.use_class_weights) {
        f.weights = class_weights(f.train.labels());
    }
    return f;
}

void evaluate_svm_fold(const Fold& fold, const GridSpec& spec, const std::vector<GridPoint>& points,
                       const TrainOptions& options, std::vector<store::Prediction*>& out)
{
    // Group points by kernel so each Gram matrix is built once per fold.
    std::map<double, std::vector<std::size_t>> by_gamma;
    for (std::size_t p = 0; p < points.size(); ++p) {
        by_gamma[spec.family == Family::svm_rbf ? points[p].gamma : 0.0].push_back(p);
    }
    const auto n = fold.train.n_samples();
    const auto d = fold.train.n_features();
    for (const auto& [gamma, members] : by_gamma) {
        const auto kernel = spec.family == Family::svm_rbf ? svm::KernelSpec::rbf(gamma) : svm::KernelSpec::linear();
        svm::KernelRows rows(std::make_shared<const std::vector<double>>(
                                 svm::gram_matrix(kernel, fold.train.values(), n, d)),
                             n);
        for (auto p : members) {
            const auto hp = svm_hyperparams(spec.family, points[p], options, fold.weights);
            const auto fit = svm::fit_svm_detailed(fold.train, hp, false, &rows);
            const auto decision = fit.model.predict(fold.test);
            *out[p] = {decision.label, decision.score};
        }
    }
}

void evaluate_tree_fold(const Fold& fold, const GridSpec& spec, const std::vector<GridPoint>& points,
                        const TrainOptions& options, std::vector<store::Prediction*>& out)
{
    // A depth-limited tree is the deepest tree truncated at that depth.
    GridPoint deepest{.max_depth = largest(spec.max_depths)};
    const auto tree = cart::fit_tree(fold.train, tree_hyperparams(deepest, options, fold.weights));
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto depth = points[p].max_depth;
        *out[p] = {tree.predict(fold.test, depth), tree.score(fold.test, depth)};
    }
}

void evaluate_forest_fold(const Fold& fold, const GridSpec& spec, const std::vector<GridPoint>& points,
                          const TrainOptions& options, std::vector<store::Prediction*>& out)
{
    // Members depend only on (seed, index), so a smaller forest is a prefix
    // of the largest one; depth limits truncate each member as for trees.
    for (auto m : spec.max_features) {
        GridPoint biggest{.max_depth = largest(spec.max_depths), .n_tree = largest(spec.n_trees), .max_features = m};
        const auto model = forest::fit_forest(fold.train, forest_hyperparams(biggest, options, fold.weights));
        for (std::size_t p = 0; p < points.size(); ++p) {
            if (points[p].max_features != m) {
                continue;
            }
            const auto votes = model.vote_sum(fold.test, points[p].n_tree, points[p].max_depth);
            *out[p] = {votes >= 0 ? data::kPositive : data::kNegative,
                       static_cast<double>(votes) / static_cast<double>(points[p].n_tree)};
        }
    }
}

} // namespace

std::vector<CvResult> evaluate_grid(const data::Dataset& data, const GridSpec& spec, const TrainOptions& options)
{
    const auto points = expand(spec);
    require_loocv_folds(data);
    const auto n = data.n_samples();
    std::vector<std::vector<store::Prediction>> predictions(points.size(), std::vector<store::Prediction>(n));

    util::parallel_for(n, [&](std::size_t i) {
        const auto fold = make_fold(data, i, options);
        std::vector<store::Prediction*> out(points.size());
        for (std::size_t p = 0; p < points.size(); ++p) {
            out[p] = &predictions[p][i];
        }
        switch (spec.family) {
        case Family::svm_linear:
        case Family::svm_rbf: evaluate_svm_fold(fold, spec, points, options, out); break;
        case Family::tree: evaluate_tree_fold(fold, spec, points, options, out); break;
        case Family::forest: evaluate_forest_fold(fold, spec, points, options, out); break;
        }
    });

    std::vector<CvResult> results;
    results.reserve(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        auto r = summarize(data, std::move(predictions[p]));
        r.hyperparams = points[p];
        results.push_back(std::move(r));
    }
    return results;
}

bool better(Family family, const MetricReport& a, const GridPoint& pa, const MetricReport& b, const GridPoint& pb)
{
    if (a.balanced_accuracy != b.balanced_accuracy) {
        return a.balanced_accuracy > b.balanced_accuracy;
    }
    if (is_svm(family)) {
        return std::tie(pa.c, pa.gamma) < std::tie(pb.c, pb.gamma);
    }
    return std::tuple(pa.n_tree, static_cast<int>(pa.max_features), pa.max_depth) <
           std::tuple(pb.n_tree, static_cast<int>(pb.max_features), pb.max_depth);
}

namespace {

// Appends the round to the trace and keeps the running best.
void absorb_round(Family family, Round round, std::vector<CvResult> results, const SearchOptions& options,
                  SearchResult& search, bool& have_best)
{
    for (std::size_t k = 0; k < results.size(); ++k) {
        auto& r = results[k];
        TraceRecord rec{round, k, family, *r.hyperparams, options.train.seed, r.counts, r.metrics};
        if (options.on_record) {
            options.on_record(rec);
        }
        search.trace.push_back(rec);
        if (!have_best || better(family, r.metrics, rec.point, search.best_result.metrics, search.best)) {
            search.best = rec.point;
            search.best_result = std::move(r);
            have_best = true;
        }
    }
}

} // namespace

SearchResult grid_search(const data::Dataset& data, Family family, const SearchOptions& options)
{
    SearchResult search;
    search.family = family;
    bool have_best = false;

    auto coarse = evaluate_grid(data, coarse_grid(family), options.train);
    search.coarse_evaluations = coarse.size();
    absorb_round(family, Round::coarse, std::move(coarse), options, search, have_best);

    if (options.fine_round && is_svm(family)) {
        auto fine = evaluate_grid(data, fine_grid(family, search.best), options.train);
        search.fine_evaluations = fine.size();
        absorb_round(family, Round::fine, std::move(fine), options, search, have_best);
    }
    return search;
}

store::ClassMeans class_means(const data::Dataset& data)
{
    const auto d = data.n_features();
    store::ClassMeans means{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    std::vector<std::size_t> n_pos(d, 0);
    std::vector<std::size_t> n_neg(d, 0);
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        const bool pos = data.label(i) == data::kPositive;
        auto& sums = pos ? means.positive : means.negative;
        auto& counts = pos ? n_pos : n_neg;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = data.at(i, j);
            if (!data::is_missing(v)) {
                sums[j] += v;
                ++counts[j];
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        // a class with no observation of a feature keeps 0
        if (n_pos[j] > 0) {
            means.positive[j] /= static_cast<double>(n_pos[j]);
        }
        if (n_neg[j] > 0) {
            means.negative[j] /= static_cast<double>(n_neg[j]);
        }
    }
    return means;
}

store::ModelBundle refit(const data::Dataset& data, Family family, const GridPoint& point, const TrainOptions& options,
                         store::BundleMetadata metadata)
{
    data::require_both_classes(data, "refit");
    const auto trainer = make_trainer(family, point, options);
    store::ModelBundle bundle;
    bundle.schema = data.schema();
    bundle.preprocess = data::fit_preprocess(data);
    bundle.classifier = trainer(data::apply_preprocess(bundle.preprocess, data));
    if (metadata.hyperparams.empty()) {
        metadata.hyperparams = point_to_json(family, point);
    }
    metadata.seed = options.seed;
    bundle.metadata = std::move(metadata);
    bundle.class_means = class_means(data);
    bundle.validate();
    return bundle;
}

} // namespace triage::eval
