#include "triage/data/csv.hpp"
#include "triage/data/filter.hpp"
#include "triage/data/synthetic.hpp"
#include "triage/error.hpp"
#include "triage/eval/grid_search.hpp"
#include "triage/store/bundle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <iostream>
#include <numeric>

namespace {

using namespace triage;

struct DataArgs {
    std::string data;
    std::string schema;
    std::string label_column = "label";
};

void add_data_options(CLI::App* cmd, DataArgs& args)
{
    cmd->add_option("--data", args.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--schema", args.schema, "Schema JSON sidecar")->required()->check(CLI::ExistingFile);
    cmd->add_option("--label-column", args.label_column, "Name of the label column")->capture_default_str();
}

data::Dataset load_data(const DataArgs& args)
{
    return data::load_csv(args.data, data::load_schema(args.schema), args.label_column);
}

std::string percent(double v)
{
    return fmt::format("{:.2f}", 100.0 * v);
}

void print_row(std::ostream& out, eval::Family family, const eval::GridPoint& point, const eval::MetricReport& m)
{
    out << fmt::format("{:<11} {:<40} {:>9} {:>12} {:>12} {:>10}\n", "family", "hyperparameters", "balanced",
                       "sensitivity", "specificity", "precision");
    out << fmt::format("{:<11} {:<40} {:>9} {:>12} {:>12} {:>10}\n", eval::to_string(family),
                       eval::describe(family, point), percent(m.balanced_accuracy), percent(m.sensitivity),
                       percent(m.specificity), m.precision ? percent(*m.precision) : std::string("n/a"));
}

std::string utc_now()
{
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
    std::size_t positive = 0;
    std::size_t negative = 0;
    double separation = 0.0;
    double missing_rate = 0.0;
    std::uint64_t seed = 0;
    bool age_gender = false;
    std::string out;
    std::string schema_out;
    std::string label_column = "label";
};

int run_synth(const SynthArgs& a)
{
    auto schema = data::blood_panel_schema(a.age_gender);
    const auto ds = data::gen_synthetic(
        data::separated_gaussians(schema, a.positive, a.negative, a.separation, a.missing_rate, a.seed));
    data::write_csv(a.out, ds, a.label_column);
    std::ofstream sidecar(a.schema_out);
    sidecar << data::schema_to_json(ds.schema()).dump(2) << '\n';
    if (!sidecar) {
        throw Error(ErrorKind::io, "cannot write " + a.schema_out);
    }
    std::cout << fmt::format("wrote {} rows x {} features ({} missing cells) to {}\n", ds.n_samples(),
                             ds.n_features(), ds.missing_count(), a.out);
    return 0;
}

// --- preprocess --------------------------------------------------------------

struct PreprocessArgs {
    DataArgs data;
    std::string group_column;
    std::string hscrp_column;
    std::string crp_feature = "CRP";
    std::string out;
    std::string schema_out;
};

int run_preprocess(const PreprocessArgs& a)
{
    auto ds = load_data(a.data);
    if (!a.hscrp_column.empty()) {
        const auto crp = ds.schema().index_of(a.crp_feature);
        if (!crp) {
            throw Error(ErrorKind::usage, "schema has no feature '" + a.crp_feature + "'");
        }
        const auto hscrp = data::read_numeric_column(a.data.data, a.hscrp_column);
        ds = data::apply_hscrp_rule(ds, *crp, std::span<const double>(hscrp));
    }
    const auto groups =
        data::read_text_column(a.data.data, a.group_column.empty() ? a.data.label_column : a.group_column);

    const auto by_feature = data::filter_features(ds, groups);
    for (auto id : by_feature.dropped) {
        std::cout << "dropped feature " << ds.schema().feature(id).name << '\n';
    }
    const auto by_subject = data::filter_subjects(by_feature.data);
    for (auto row : by_subject.dropped) {
        // data rows are numbered from 1, the header being line 1 of the file
        std::cout << "dropped subject row " << row + 1 << '\n';
    }
    const auto& kept = by_subject.data;
    data::write_csv(a.out, kept, a.data.label_column);
    std::ofstream sidecar(a.schema_out);
    sidecar << data::schema_to_json(kept.schema()).dump(2) << '\n';
    if (!sidecar) {
        throw Error(ErrorKind::io, "cannot write " + a.schema_out);
    }
    std::cout << fmt::format("kept {} of {} features, {} of {} subjects\n", kept.n_features(), ds.n_features(),
                             kept.n_samples(), ds.n_samples());
    return 0;
}

// --- shared training flags -----------------------------------------------------

struct TrainFlags {
    std::string family;
    std::uint64_t seed = 0;
    bool no_class_weights = false;
    double svm_tol = 1e-3;
    std::size_t svm_max_passes = 1'000'000;
    std::size_t min_pool = 2;
    double min_impurity = 0.0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f)
{
    cmd->add_option("--family", f.family, "svm-linear, svm-rbf, tree or forest")
        ->required()
        ->check(CLI::IsMember({"svm-linear", "svm-rbf", "tree", "forest"}));
    cmd->add_option("--seed", f.seed, "Random-forest seed")->capture_default_str();
    cmd->add_flag("--no-class-weights", f.no_class_weights, "Weight both classes equally");
    cmd->add_option("--svm-tol", f.svm_tol, "SMO stopping tolerance on the KKT gap")->capture_default_str();
    cmd->add_option("--svm-max-passes", f.svm_max_passes, "SMO pair-update budget")->capture_default_str();
    cmd->add_option("--min-pool", f.min_pool, "Trees: smallest pool that may be split")->capture_default_str();
    cmd->add_option("--min-impurity", f.min_impurity, "Trees: impurity at or below which a pool is a leaf")
        ->capture_default_str();
}

eval::TrainOptions train_options(const TrainFlags& f)
{
    eval::TrainOptions o;
    o.seed = f.seed;
    o.use_class_weights = !f.no_class_weights;
    o.svm_tol = f.svm_tol;
    o.svm_max_passes = f.svm_max_passes;
    o.min_pool = f.min_pool;
    o.min_impurity = f.min_impurity;
    return o;
}

// --- cv ---------------------------------------------------------------------------

struct CvArgs {
    DataArgs data;
    TrainFlags train;
    std::string trace;
    std::string folds_out;
    std::string bundle_out;
    std::string task = "triage";
    std::string timestamp;
    bool no_fine = false;
};

int run_cv(const CvArgs& a)
{
    const auto ds = load_data(a.data);
    const auto family = eval::family_from_string(a.train.family);
    eval::SearchOptions options;
    options.train = train_options(a.train);
    options.fine_round = !a.no_fine;

    const auto result = eval::grid_search(ds, family, options);
    eval::write_trace(a.trace, result.trace);
    if (!a.folds_out.empty()) {
        eval::write_folds(a.folds_out, ds, result.best_result);
    }
    std::cout << fmt::format("evaluations: coarse {}, fine {}\n", result.coarse_evaluations,
                             result.fine_evaluations);
    print_row(std::cout, family, result.best, result.best_result.metrics);

    if (!a.bundle_out.empty()) {
        store::BundleMetadata meta;
        meta.task = a.task;
        meta.trained_at = a.timestamp.empty() ? utc_now() : a.timestamp;
        store::save_bundle(a.bundle_out, eval::refit(ds, family, result.best, options.train, meta));
    }
    return 0;
}

// --- train ------------------------------------------------------------------------

struct TrainArgs {
    DataArgs data;
    TrainFlags train;
    std::optional<double> c;
    std::optional<double> gamma;
    std::optional<std::size_t> max_depth;
    std::optional<std::size_t> n_tree;
    std::optional<std::string> max_features;
    std::string out;
    std::string task = "triage";
    std::string timestamp;
};

// Every hyperparameter of the family must be given and no other may be.
eval::GridPoint point_from_flags(eval::Family family, const TrainArgs& a)
{
    const bool svm = family == eval::Family::svm_linear || family == eval::Family::svm_rbf;
    const auto need = [](bool wanted, bool given, const char* flag) {
        if (wanted && !given) {
            throw Error(ErrorKind::usage, std::string(flag) + " is required for this family");
        }
        if (!wanted && given) {
            throw Error(ErrorKind::usage, std::string(flag) + " does not apply to this family");
        }
    };
    need(svm, a.c.has_value(), "--C");
    need(family == eval::Family::svm_rbf, a.gamma.has_value(), "--gamma");
    need(!svm, a.max_depth.has_value(), "--max-depth");
    need(family == eval::Family::forest, a.n_tree.has_value(), "--n-tree");
    need(family == eval::Family::forest, a.max_features.has_value(), "--max-features");

    eval::GridPoint p;
    p.c = a.c.value_or(0.0);
    p.gamma = a.gamma.value_or(0.0);
    p.max_depth = a.max_depth.value_or(0);
    p.n_tree = a.n_tree.value_or(0);
    if (a.max_features) {
        p.max_features = forest::max_features_from_string(*a.max_features);
    }
    eval::validate_point(family, p);
    return p;
}

int run_train(const TrainArgs& a)
{
    const auto family = eval::family_from_string(a.train.family);
    const auto point = point_from_flags(family, a);
    const auto ds = load_data(a.data);
    store::BundleMetadata meta;
    meta.task = a.task;
    meta.trained_at = a.timestamp.empty() ? utc_now() : a.timestamp;
    const auto bundle = eval::refit(ds, family, point, train_options(a.train), meta);
    store::save_bundle(a.out, bundle);
    std::cout << fmt::format("trained {} ({}) on {} rows; bundle written to {}\n", eval::to_string(family),
                             eval::describe(family, point), ds.n_samples(), a.out);
    return 0;
}

// --- predict ----------------------------------------------------------------------

struct PredictArgs {
    std::string bundle;
    std::string input;
};

int run_predict(const PredictArgs& a)
{
    const auto bundle = store::load_bundle(a.bundle);
    const auto& schema = bundle.schema;
    std::vector<std::vector<double>> columns;
    for (const auto& f : schema.features()) {
        columns.push_back(data::read_numeric_column(a.input, f.name));
    }
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    std::cout << "row,label,class,score\n";
    std::vector<double> x(schema.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < schema.size(); ++j) {
            x[j] = columns[j][i];
        }
        const auto p = bundle.predict(x);
        const auto& name = p.label > 0 ? schema.class_names().positive : schema.class_names().negative;
        std::cout << fmt::format("{},{},{},{:.17g}\n", i + 1, p.label, name, p.score);
    }
    return 0;
}

// --- importance -------------------------------------------------------------------

struct ImportanceArgs {
    std::string bundle;
};

int run_importance(const ImportanceArgs& a)
{
    const auto bundle = store::load_bundle(a.bundle);
    const auto scores = store::feature_importance(bundle.classifier);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return scores[l] > scores[r]; });

    const auto& names = bundle.schema.class_names();
    std::cout << fmt::format("{:>4}  {:<24} {:>8}  {}\n", "rank", "feature", "score", "direction");
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto id = order[r];
        std::string direction = "n/a";
        if (bundle.class_means) {
            const double diff = bundle.class_means->positive[id] - bundle.class_means->negative[id];
            direction = diff > 0   ? "higher in " + names.positive
                        : diff < 0 ? "lower in " + names.positive
                                   : "equal";
        }
        std::cout << fmt::format("{:>4}  {:<24} {:>8.4f}  {}\n", r + 1, bundle.schema.feature(id).name,
                                 scores[id], direction);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Blood-test triage: classical classifiers, leave-one-out grid search and model bundles"};
    app.require_subcommand(1, 1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic two-class blood-panel dataset");
    synth_cmd->add_option("--positive", synth.positive, "Rows of the positive class")->required();
    synth_cmd->add_option("--negative", synth.negative, "Rows of the negative class")->required();
    synth_cmd->add_option("--separation", synth.separation, "Distance between class means per feature, in SDs")
        ->required();
    synth_cmd->add_option("--missing-rate", synth.missing_rate, "Per-cell probability of a missing value")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_flag("--age-gender", synth.age_gender, "Append age and gender columns");
    synth_cmd->add_option("--out", synth.out, "Output CSV")->required();
    synth_cmd->add_option("--schema-out", synth.schema_out, "Output schema JSON")->required();
    synth_cmd->add_option("--label-column", synth.label_column, "Name of the label column")->capture_default_str();

    PreprocessArgs pre;
    auto* pre_cmd = app.add_subcommand("preprocess", "Apply the hsCRP rule and the missing-value filters");
    add_data_options(pre_cmd, pre.data);
    pre_cmd->add_option("--group-column", pre.group_column, "Cohort column for the feature rule (default: label)");
    pre_cmd->add_option("--hscrp-column", pre.hscrp_column, "Raw hsCRP column overriding CRP where present");
    pre_cmd->add_option("--crp-feature", pre.crp_feature, "Schema name of the CRP feature")->capture_default_str();
    pre_cmd->add_option("--out", pre.out, "Filtered CSV")->required();
    pre_cmd->add_option("--schema-out", pre.schema_out, "Filtered schema JSON")->required();

    CvArgs cv;
    auto* cv_cmd = app.add_subcommand("cv", "Leave-one-out grid search for one classifier family");
    add_data_options(cv_cmd, cv.data);
    add_train_flags(cv_cmd, cv.train);
    cv_cmd->add_option("--trace", cv.trace, "Search trace output (JSON lines)")->required();
    cv_cmd->add_option("--folds-out", cv.folds_out, "Per-fold predictions of the best point (JSON lines)");
    cv_cmd->add_flag("--no-fine", cv.no_fine, "Skip the fine SVM round");
    cv_cmd->add_option("--bundle-out", cv.bundle_out, "Refit the best point and write its bundle");
    cv_cmd->add_option("--task", cv.task, "Task name stored in the bundle")->capture_default_str();
    cv_cmd->add_option("--timestamp", cv.timestamp, "Training timestamp stored in the bundle (default: now)");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Fit one configuration on all rows and write a bundle");
    add_data_options(train_cmd, train.data);
    add_train_flags(train_cmd, train.train);
    train_cmd->add_option("--C", train.c, "SVM cost");
    train_cmd->add_option("--gamma", train.gamma, "RBF kernel width");
    train_cmd->add_option("--max-depth", train.max_depth, "Tree depth limit");
    train_cmd->add_option("--n-tree", train.n_tree, "Forest size");
    train_cmd->add_option("--max-features", train.max_features, "Forest feature subset: all, sqrt or log2")
        ->check(CLI::IsMember({"all", "sqrt", "log2"}));
    train_cmd->add_option("--out", train.out, "Bundle output path")->required();
    train_cmd->add_option("--task", train.task, "Task name stored in the bundle")->capture_default_str();
    train_cmd->add_option("--timestamp", train.timestamp, "Training timestamp stored in the bundle (default: now)");

    PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "Label every row of a CSV with a bundle");
    predict_cmd->add_option("--bundle", predict.bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--input", predict.input, "CSV with one column per schema feature")
        ->required()
        ->check(CLI::ExistingFile);

    ImportanceArgs importance;
    auto* importance_cmd = app.add_subcommand("importance", "Rank features by model importance");
    importance_cmd->add_option("--bundle", importance.bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[" << to_string(ErrorKind::usage) << "]: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*synth_cmd) return run_synth(synth);
        if (*pre_cmd) return run_preprocess(pre);
        if (*cv_cmd) return run_cv(cv);
        if (*train_cmd) return run_train(train);
        if (*predict_cmd) return run_predict(predict);
        if (*importance_cmd) return run_importance(importance);
    } catch (const Error& e) {
        std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return e.kind() == ErrorKind::usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
