#include "triage/store/bundle.hpp"

#include "triage/data/csv.hpp"
#include "triage/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace triage::store {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string hex64(std::uint64_t v)
{
    char buf[17];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, 16);
    return std::string(static_cast<std::size_t>(16 - (ptr - buf)), '0') + std::string(buf, ptr);
}

std::uint64_t parse_u64(const std::string& s, int base)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw Error(ErrorKind::bundle_format, "invalid integer string '" + s + "'");
    }
    return v;
}

json weights_to_json(const data::ClassWeights& w) { return {{"negative", w.negative}, {"positive", w.positive}}; }

data::ClassWeights weights_from_json(const json& j)
{
    return {j.at("positive").get<double>(), j.at("negative").get<double>()};
}

json tree_hp_to_json(const cart::TreeHyperparams& hp)
{
    return {{"class_weights", weights_to_json(hp.class_weights)},
            {"max_depth", hp.max_depth},
            {"min_impurity", hp.min_impurity},
            {"min_pool", hp.min_pool}};
}

cart::TreeHyperparams tree_hp_from_json(const json& j)
{
    cart::TreeHyperparams hp;
    hp.max_depth = j.at("max_depth").get<std::size_t>();
    hp.min_impurity = j.at("min_impurity").get<double>();
    hp.min_pool = j.at("min_pool").get<std::size_t>();
    hp.class_weights = weights_from_json(j.at("class_weights"));
    return hp;
}

json tree_to_json(const cart::TreeModel& t)
{
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
        json node = {{"impurity", n.impurity},
                     {"left", n.left},
                     {"pool_fraction", n.pool_fraction},
                     {"right", n.right},
                     {"samples", n.samples},
                     {"weight_negative", n.weight_negative},
                     {"weight_positive", n.weight_positive}};
        if (!n.is_leaf()) {
            node["feature"] = n.feature;
            node["threshold"] = n.threshold;
        }
        nodes.push_back(std::move(node));
    }
    return {{"type", "tree"},
            {"n_features", t.n_features()},
            {"schema_digest", hex64(t.schema_digest())},
            {"hyperparams", tree_hp_to_json(t.hyperparams())},
            {"nodes", std::move(nodes)}};
}

cart::TreeModel tree_from_json(const json& j)
{
    std::vector<cart::TreeNode> nodes;
    for (const auto& jn : j.at("nodes")) {
        cart::TreeNode n;
        n.left = jn.at("left").get<std::int32_t>();
        n.right = jn.at("right").get<std::int32_t>();
        if (n.left >= 0) {
            n.feature = jn.at("feature").get<std::size_t>();
            n.threshold = jn.at("threshold").get<double>();
        }
        n.pool_fraction = jn.at("pool_fraction").get<double>();
        n.samples = jn.at("samples").get<std::size_t>();
        n.weight_positive = jn.at("weight_positive").get<double>();
        n.weight_negative = jn.at("weight_negative").get<double>();
        n.impurity = jn.at("impurity").get<double>();
        nodes.push_back(n);
    }
    // depth is implied by the preorder structure
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (auto c : {nodes[i].left, nodes[i].right}) {
            if (c > static_cast<std::int32_t>(i) && static_cast<std::size_t>(c) < nodes.size()) {
                nodes[static_cast<std::size_t>(c)].depth = nodes[i].depth + 1;
            }
        }
    }
    return cart::TreeModel(std::move(nodes), j.at("n_features").get<std::size_t>(),
                           parse_u64(j.at("schema_digest").get<std::string>(), 16),
                           tree_hp_from_json(j.at("hyperparams")));
}

json svm_to_json(const svm::SvmModel& m)
{
    json kernel = {{"kind", svm::to_string(m.kernel().kind)}};
    if (m.kernel().kind == svm::KernelKind::rbf) {
        kernel["gamma"] = m.kernel().gamma;
    }
    json svs = json::array();
    for (std::size_t i = 0; i < m.n_support(); ++i) {
        const auto sv = m.support_vector(i);
        svs.push_back(std::vector<double>(sv.begin(), sv.end()));
    }
    json j = {{"type", "svm"},
              {"n_features", m.n_features()},
              {"kernel", std::move(kernel)},
              {"support_vectors", std::move(svs)},
              {"dual_coefs", m.dual_coefs()},
              {"bias", m.bias()},
              {"converged", m.converged()},
              {"kkt_violation", m.kkt_violation()},
              {"iterations", m.iterations()}};
    if (m.weight_vector()) {
        j["weight_vector"] = *m.weight_vector();
    }
    return j;
}

svm::SvmModel svm_from_json(const json& j)
{
    const auto d = j.at("n_features").get<std::size_t>();
    const auto& jk = j.at("kernel");
    const auto kind = jk.at("kind").get<std::string>();
    svm::KernelSpec kernel;
    if (kind == "linear") {
        kernel = svm::KernelSpec::linear();
    } else if (kind == "rbf") {
        kernel = svm::KernelSpec::rbf(jk.at("gamma").get<double>());
    } else {
        throw Error(ErrorKind::bundle_format, "unknown kernel kind '" + kind + "'");
    }
    std::vector<double> svs;
    for (const auto& sv : j.at("support_vectors")) {
        const auto row = sv.get<std::vector<double>>();
        if (row.size() != d) {
            throw Error(ErrorKind::bundle_dimension, "support vector has " + std::to_string(row.size()) +
                                                         " entries, model has " + std::to_string(d) + " features");
        }
        svs.insert(svs.end(), row.begin(), row.end());
    }
    std::optional<std::vector<double>> w;
    if (j.contains("weight_vector")) {
        w = j.at("weight_vector").get<std::vector<double>>();
    }
    return svm::SvmModel(kernel, d, std::move(svs), j.at("dual_coefs").get<std::vector<double>>(),
                         j.at("bias").get<double>(), std::move(w), j.at("converged").get<bool>(),
                         j.at("kkt_violation").get<double>(), j.at("iterations").get<std::size_t>());
}

json forest_to_json(const forest::ForestModel& f)
{
    const auto& hp = f.hyperparams();
    json trees = json::array();
    for (const auto& t : f.trees()) {
        trees.push_back(tree_to_json(t));
    }
    return {{"type", "forest"},
            {"hyperparams",
             {{"bootstrap", hp.bootstrap},
              {"max_features", forest::to_string(hp.max_features)},
              {"n_tree", hp.n_tree},
              {"seed", std::to_string(hp.seed)},
              {"tree", tree_hp_to_json(hp.tree)}}},
            {"trees", std::move(trees)}};
}

forest::ForestModel forest_from_json(const json& j)
{
    const auto& jh = j.at("hyperparams");
    forest::ForestHyperparams hp;
    hp.bootstrap = jh.at("bootstrap").get<bool>();
    hp.max_features = forest::max_features_from_string(jh.at("max_features").get<std::string>());
    hp.n_tree = jh.at("n_tree").get<std::size_t>();
    hp.seed = parse_u64(jh.at("seed").get<std::string>(), 10);
    hp.tree = tree_hp_from_json(jh.at("tree"));
    std::vector<cart::TreeModel> trees;
    for (const auto& jt : j.at("trees")) {
        trees.push_back(tree_from_json(jt));
    }
    if (trees.empty()) {
        throw Error(ErrorKind::bundle_format, "forest has no trees");
    }
    return forest::ForestModel(std::move(trees), hp);
}

json classifier_to_json(const Classifier& c)
{
    return std::visit(overloaded{[](const svm::SvmModel& m) { return svm_to_json(m); },
                                 [](const cart::TreeModel& t) { return tree_to_json(t); },
                                 [](const forest::ForestModel& f) { return forest_to_json(f); }},
                      c);
}

Classifier classifier_from_json(const json& j)
{
    const auto type = j.at("type").get<std::string>();
    if (type == "svm") {
        return svm_from_json(j);
    }
    if (type == "tree") {
        return tree_from_json(j);
    }
    if (type == "forest") {
        return forest_from_json(j);
    }
    throw Error(ErrorKind::bundle_format, "unknown classifier type '" + type + "'");
}

ErrorKind bundle_kind(ErrorKind k)
{
    switch (k) {
    case ErrorKind::dimension:
    case ErrorKind::bundle_dimension: return ErrorKind::bundle_dimension;
    case ErrorKind::bundle_parse: return ErrorKind::bundle_parse;
    case ErrorKind::bundle_version: return ErrorKind::bundle_version;
    default: return ErrorKind::bundle_format;
    }
}

} // namespace

Prediction predict(const Classifier& classifier, std::span<const double> x)
{
    return std::visit(overloaded{[&](const svm::SvmModel& m) {
                                     const auto d = m.predict(x);
                                     return Prediction{d.label, d.score};
                                 },
                                 [&](const cart::TreeModel& t) { return Prediction{t.predict(x), t.score(x)}; },
                                 [&](const forest::ForestModel& f) {
                                     const long votes = f.vote_sum(x);
                                     return Prediction{votes >= 0 ? data::kPositive : data::kNegative,
                                                       static_cast<double>(votes) /
                                                           static_cast<double>(f.trees().size())};
                                 }},
                      classifier);
}

std::size_t input_dimension(const Classifier& classifier)
{
    return std::visit([](const auto& m) { return m.n_features(); }, classifier);
}

std::string_view classifier_tag(const Classifier& classifier)
{
    return std::visit(overloaded{[](const svm::SvmModel&) { return std::string_view("svm"); },
                                 [](const cart::TreeModel&) { return std::string_view("tree"); },
                                 [](const forest::ForestModel&) { return std::string_view("forest"); }},
                      classifier);
}

std::vector<double> feature_importance(const Classifier& classifier)
{
    return std::visit(overloaded{[](const svm::SvmModel& m) { return svm::svm_importance(m); },
                                 [](const cart::TreeModel& t) { return cart::tree_importance(t); },
                                 [](const forest::ForestModel&) -> std::vector<double> {
                                     throw Error(ErrorKind::unsupported,
                                                 "feature importance is not defined for random forests");
                                 }},
                      classifier);
}

void ModelBundle::validate() const
{
    if (format_version != kFormatVersion) {
        throw Error(ErrorKind::bundle_version, "unsupported bundle format_version " + std::to_string(format_version) +
                                                   " (expected " + std::to_string(kFormatVersion) + ")");
    }
    const std::size_t d = schema.size();
    if (preprocess.impute_means.size() != d || preprocess.standardize_means.size() != d ||
        preprocess.standardize_scales.size() != d) {
        throw Error(ErrorKind::bundle_dimension, "preprocessing dimension " +
                                                     std::to_string(preprocess.impute_means.size()) +
                                                     " does not match schema dimension " + std::to_string(d));
    }
    for (double s : preprocess.standardize_scales) {
        if (!(s > 0.0)) {
            throw Error(ErrorKind::bundle_format, "standardization scales must be positive");
        }
    }
    if (input_dimension(classifier) != d) {
        throw Error(ErrorKind::bundle_dimension, "classifier expects " + std::to_string(input_dimension(classifier)) +
                                                     " features, schema has " + std::to_string(d));
    }
    const auto digest_ok = std::visit(
        overloaded{[](const svm::SvmModel&) { return true; },
                   [&](const cart::TreeModel& t) { return t.schema_digest() == schema.digest(); },
                   [&](const forest::ForestModel& f) { return f.schema_digest() == schema.digest(); }},
        classifier);
    if (!digest_ok) {
        throw Error(ErrorKind::bundle_format, "tree schema digest does not match the bundle schema");
    }
    if (class_means && (class_means->positive.size() != d || class_means->negative.size() != d)) {
        throw Error(ErrorKind::bundle_dimension, "class means do not match schema dimension");
    }
}

Prediction ModelBundle::predict(std::span<const double> raw) const
{
    if (raw.size() != schema.size()) {
        throw Error(ErrorKind::dimension, "input has " + std::to_string(raw.size()) + " values, bundle expects " +
                                              std::to_string(schema.size()));
    }
    const auto x = data::apply_preprocess(preprocess, raw);
    return store::predict(classifier, x);
}

std::string encode_bundle(const ModelBundle& bundle)
{
    bundle.validate();
    json j = {
        {"format_version", bundle.format_version},
        {"schema", data::schema_to_json(bundle.schema)},
        {"preprocess",
         {{"impute_means", bundle.preprocess.impute_means},
          {"standardize_means", bundle.preprocess.standardize_means},
          {"standardize_scales", bundle.preprocess.standardize_scales}}},
        {"classifier", classifier_to_json(bundle.classifier)},
        {"metadata",
         {{"task", bundle.metadata.task},
          {"trained_at", bundle.metadata.trained_at},
          {"hyperparams", bundle.metadata.hyperparams},
          {"seed", std::to_string(bundle.metadata.seed)}}},
    };
    if (bundle.class_means) {
        j["class_means"] = {{"positive", bundle.class_means->positive}, {"negative", bundle.class_means->negative}};
    }
    return j.dump();
}

ModelBundle decode_bundle(std::string_view bytes)
{
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::bundle_parse, std::string("malformed bundle JSON: ") + e.what());
    }
    try {
        if (!j.is_object() || !j.contains("format_version") || !j.at("format_version").is_number_integer()) {
            throw Error(ErrorKind::bundle_format, "bundle has no integer format_version");
        }
        ModelBundle b;
        b.format_version = j.at("format_version").get<int>();
        if (b.format_version != kFormatVersion) {
            throw Error(ErrorKind::bundle_version, "unsupported bundle format_version " +
                                                       std::to_string(b.format_version) + " (expected " +
                                                       std::to_string(kFormatVersion) + ")");
        }
        b.schema = data::schema_from_json(j.at("schema"));
        const auto& jp = j.at("preprocess");
        b.preprocess.impute_means = jp.at("impute_means").get<std::vector<double>>();
        b.preprocess.standardize_means = jp.at("standardize_means").get<std::vector<double>>();
        b.preprocess.standardize_scales = jp.at("standardize_scales").get<std::vector<double>>();
        b.classifier = classifier_from_json(j.at("classifier"));
        const auto& jm = j.at("metadata");
        b.metadata.task = jm.at("task").get<std::string>();
        b.metadata.trained_at = jm.at("trained_at").get<std::string>();
        b.metadata.hyperparams = jm.at("hyperparams");
        b.metadata.seed = parse_u64(jm.at("seed").get<std::string>(), 10);
        if (j.contains("class_means")) {
            b.class_means = ClassMeans{j.at("class_means").at("positive").get<std::vector<double>>(),
                                       j.at("class_means").at("negative").get<std::vector<double>>()};
        }
        b.validate();
        return b;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::bundle_format, std::string("invalid bundle: ") + e.what());
    } catch (const Error& e) {
        throw Error(bundle_kind(e.kind()), e.what());
    }
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    }
    out << encode_bundle(bundle) << '\n';
    if (!out) {
        throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
    }
}

ModelBundle load_bundle(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return decode_bundle(buffer.str());
}

} // namespace triage::store
