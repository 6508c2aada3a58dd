// Writes the shared parity fixture: bundles, raw inputs and the scores the
// library assigns them. The browser evaluator must reproduce every score.

#include "triage/data/synthetic.hpp"
#include "triage/error.hpp"
#include "triage/eval/grid_search.hpp"
#include "triage/store/bundle.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

namespace {

using namespace triage;

struct Case {
    std::string name;
    eval::Family family;
    eval::GridPoint point;
};

store::ModelBundle toy_bundle()
{
    data::FeatureSchema schema({{0, "x", ""}}, false, {"COVID-19", "non-COVID-19 viral"});
    data::Dataset ds(schema, {-1.0, 1.0}, {data::kNegative, data::kPositive});
    store::BundleMetadata meta{"toy", "2024-01-01T00:00:00Z", {}, 0};
    return eval::refit(ds, eval::Family::svm_linear, {.c = 1.0}, {}, meta);
}

nlohmann::json input_json(std::span<const double> x)
{
    auto j = nlohmann::json::array();
    for (double v : x) {
        j.push_back(data::is_missing(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    }
    return j;
}

nlohmann::json make_fixture()
{
    const auto schema = data::blood_panel_schema(true);
    const auto ds = data::gen_synthetic(data::separated_gaussians(schema, 40, 30, 2.0, 0.1, 20240101));
    const std::vector<Case> cases = {
        {"svm-linear", eval::Family::svm_linear, {.c = 1.0}},
        {"svm-rbf", eval::Family::svm_rbf, {.c = 45.0, .gamma = 0.0047}},
        {"tree", eval::Family::tree, {.max_depth = 4}},
        {"forest", eval::Family::forest, {.max_depth = 9, .n_tree = 50, .max_features = forest::MaxFeatures::sqrt}},
    };

    std::mt19937_64 rng(7);
    std::normal_distribution<double> value(0.0, 2.0);
    std::bernoulli_distribution missing(0.15);
    const auto d = schema.size();

    nlohmann::json out = nlohmann::json::array();
    const auto add = [&](const std::string& name, const std::string& bundle_bytes, const store::ModelBundle& bundle,
                         const std::vector<double>& x) {
        const auto p = bundle.predict(x);
        out.push_back({{"name", name},
                       {"bundle", bundle_bytes},
                       {"input", input_json(x)},
                       {"expected", {{"label", p.label}, {"score", p.score}}}});
    };

    for (const auto& c : cases) {
        eval::TrainOptions options;
        options.seed = 11;
        store::BundleMetadata meta{"synthetic", "2024-01-01T00:00:00Z", {}, 0};
        const auto bundle = eval::refit(ds, c.family, c.point, options, meta);
        const auto bytes = store::encode_bundle(bundle);
        // all blank, each class mean, then random vectors with some blanks
        add(c.name + "/blank", bytes, bundle, std::vector<double>(d, data::kMissing));
        add(c.name + "/positive-mean", bytes, bundle, bundle.class_means->positive);
        add(c.name + "/negative-mean", bytes, bundle, bundle.class_means->negative);
        for (int k = 0; k < 3; ++k) {
            std::vector<double> x(d);
            for (auto& v : x) {
                v = missing(rng) ? data::kMissing : value(rng);
            }
            add(c.name + "/random-" + std::to_string(k), bytes, bundle, x);
        }
    }
    const auto toy = toy_bundle();
    const auto toy_bytes = store::encode_bundle(toy);
    for (double x : {2.0, -0.5, 0.25, 0.0}) {
        add("toy/x=" + nlohmann::json(x).dump(), toy_bytes, toy, {x});
    }
    return {{"tolerance", 1e-6}, {"cases", out}};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Write the portal parity fixture"};
    std::string path;
    app.add_option("--out", path, "Fixture JSON path")->required();
    CLI11_PARSE(app, argc, argv);
    try {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << make_fixture().dump(1) << '\n';
        if (!out) {
            throw Error(ErrorKind::io, "cannot write " + path);
        }
    } catch (const Error& e) {
        std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
