#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bundle_gen.hpp"
#include "helpers.hpp"
#include "triage/error.hpp"
#include "triage/eval/grid_search.hpp"

#include <cstring>
#include <set>

using namespace triage;
using namespace triage::store;
using data::kNegative;
using data::kPositive;

namespace {

ErrorKind decode_error(const std::string& bytes)
{
    try {
        (void)decode_bundle(bytes);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("bundle was accepted");
    return ErrorKind::usage;
}

ModelBundle toy_bundle()
{
    const auto ds = test::make_dataset(1, {-1.0, 1.0}, {kNegative, kPositive});
    return eval::refit(ds, eval::Family::svm_linear, {.c = 1000.0}, {}, {"toy", "2024-01-01T00:00:00Z", {}, 0});
}

ModelBundle linear_bundle(std::size_t d)
{
    std::mt19937_64 rng(d);
    const auto ds = test::labelled_noise(rng, test::numbered_schema(d), 20);
    return eval::refit(ds, eval::Family::svm_linear, {.c = 1.0}, {}, {"lin", "t", {}, 0});
}

bool bit_equal(double a, double b)
{
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

} // namespace

TEST_CASE("random bundles survive encode, decode, encode byte for byte")
{
    std::mt19937_64 rng(1);
    std::set<std::string> kinds;
    for (int i = 0; i < 100; ++i) {
        const auto b = test::random_bundle(rng);
        kinds.insert(std::string(classifier_tag(b.classifier)));
        const auto bytes = encode_bundle(b);
        const auto back = decode_bundle(bytes);
        CHECK(encode_bundle(back) == bytes);
        CHECK(back.classifier == b.classifier);
        CHECK(back.preprocess == b.preprocess);
        CHECK(back.schema == b.schema);
        CHECK(back.metadata == b.metadata);
        for (int k = 0; k < 20; ++k) {
            const auto x = test::random_input(rng, b.schema.size());
            const auto p = b.predict(x);
            const auto q = back.predict(x);
            CHECK(p.label == q.label);
            CHECK(bit_equal(p.score, q.score));
        }
    }
    CHECK(kinds == std::set<std::string>{"svm", "tree", "forest"});
}

TEST_CASE("encoding is canonical JSON")
{
    const auto bytes = encode_bundle(toy_bundle());
    const auto j = nlohmann::json::parse(bytes);
    CHECK(j.dump() == bytes);
    CHECK(bytes.find('\n') == std::string::npos);
    CHECK(j["format_version"] == kFormatVersion);
    // keys come out sorted
    CHECK(bytes.find("\"classifier\"") < bytes.find("\"format_version\""));
    CHECK(bytes.find("\"format_version\"") < bytes.find("\"metadata\""));
}

TEST_CASE("the toy bundle carries the analytic coefficients")
{
    const auto bytes = encode_bundle(toy_bundle());
    CHECK(bytes.find(R"("dual_coefs":[-0.5,0.5])") != std::string::npos);
    CHECK(bytes.find(R"("bias":0.0)") != std::string::npos);
    CHECK(bytes.find(R"("type":"svm")") != std::string::npos);
}

TEST_CASE("an RBF bundle states gamma")
{
    std::mt19937_64 rng(2);
    const auto ds = test::labelled_noise(rng, data::blood_panel_schema(false), 30);
    const auto b = eval::refit(ds, eval::Family::svm_rbf, {.c = 45.0, .gamma = 0.0047}, {}, {});
    const auto bytes = encode_bundle(b);
    CHECK(bytes.find(R"("kernel":{"gamma":0.0047,"kind":"rbf"})") != std::string::npos);
    CHECK(bytes.find("weight_vector") == std::string::npos);
}

TEST_CASE("decode errors are distinct by cause")
{
    const auto good = encode_bundle(linear_bundle(14));
    CHECK(decode_error(good.substr(0, good.size() / 2)) == ErrorKind::bundle_parse);
    CHECK(decode_error("") == ErrorKind::bundle_parse);

    auto j = nlohmann::json::parse(good);
    j["format_version"] = 2;
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_version);

    j = nlohmann::json::parse(good);
    j.erase("format_version");
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_format);

    // 14-feature schema, 15-weight linear SVM
    j = nlohmann::json::parse(good);
    j["classifier"]["weight_vector"].push_back(0.25);
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_dimension);

    j = nlohmann::json::parse(good);
    j["classifier"]["n_features"] = 15;
    for (auto& sv : j["classifier"]["support_vectors"]) {
        sv.push_back(0.0);
    }
    j["classifier"]["weight_vector"].push_back(0.0);
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_dimension);

    j = nlohmann::json::parse(good);
    j["preprocess"]["impute_means"].push_back(1.0);
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_dimension);

    j = nlohmann::json::parse(good);
    j["classifier"]["type"] = "knn";
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_format);

    j = nlohmann::json::parse(good);
    j["preprocess"]["standardize_scales"][0] = -1.0;
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_format);

    j = nlohmann::json::parse(good);
    j["metadata"].erase("seed");
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_format);

    CHECK(decode_error("[1,2,3]") == ErrorKind::bundle_format);
}

TEST_CASE("a tree bundle is tied to its schema layout")
{
    std::mt19937_64 rng(3);
    const auto ds = test::labelled_noise(rng, test::numbered_schema(3), 20);
    const auto b = eval::refit(ds, eval::Family::tree, {.max_depth = 3}, {}, {});
    auto j = nlohmann::json::parse(encode_bundle(b));
    j["schema"]["features"][0]["name"] = "renamed";
    CHECK(decode_error(j.dump()) == ErrorKind::bundle_format);
}

TEST_CASE("a blank input is predicted at the imputed means")
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        const auto b = test::random_bundle(rng);
        const std::vector<double> blank(b.schema.size(), data::kMissing);
        const auto p = b.predict(blank);
        const auto q = b.predict(b.preprocess.impute_means);
        CHECK(p.label == q.label);
        CHECK(bit_equal(p.score, q.score));
    }
    CHECK_THROWS_AS((void)toy_bundle().predict(std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("files")
{
    test::TempDir dir;
    const auto b = toy_bundle();
    save_bundle(dir / "b.json", b);
    CHECK(encode_bundle(load_bundle(dir / "b.json")) == encode_bundle(b));
    try {
        (void)load_bundle(dir / "absent.json");
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
    }
}

TEST_CASE("importance by classifier kind")
{
    const auto lin = linear_bundle(4);
    const auto imp = feature_importance(lin.classifier);
    CHECK(std::abs(std::accumulate(imp.begin(), imp.end(), 0.0) - 1.0) < 1e-9);

    std::mt19937_64 rng(5);
    const auto ds = test::labelled_noise(rng, test::numbered_schema(3), 30);
    const auto tree = eval::refit(ds, eval::Family::tree, {.max_depth = 3}, {}, {});
    CHECK(feature_importance(tree.classifier) == std::get<cart::TreeModel>(tree.classifier).importance());

    const auto forest =
        eval::refit(ds, eval::Family::forest, {.max_depth = 3, .n_tree = 3, .max_features = forest::MaxFeatures::all},
                    {}, {});
    CHECK_THROWS_AS(feature_importance(forest.classifier), Error);
    const auto rbf = eval::refit(ds, eval::Family::svm_rbf, {.c = 1.0, .gamma = 0.5}, {}, {});
    try {
        (void)feature_importance(rbf.classifier);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unsupported);
    }
}
