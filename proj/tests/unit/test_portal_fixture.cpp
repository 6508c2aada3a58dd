#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "triage/store/bundle.hpp"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>

using namespace triage;
using nlohmann::json;

namespace {

std::string env(const char* name)
{
    const char* v = std::getenv(name);
    REQUIRE(v != nullptr);
    return v;
}

json fixture()
{
    return json::parse(test::read_text(env("PORTAL_FIXTURE_FILE")));
}

std::vector<double> input_of(const json& c)
{
    std::vector<double> x;
    for (const auto& v : c["input"]) {
        x.push_back(v.is_null() ? data::kMissing : v.get<double>());
    }
    return x;
}

std::string capture(const std::string& cmd, int& status)
{
    FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) {
        out.append(buf.data(), n);
    }
    const int raw = ::pclose(pipe);
    status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return out;
}

} // namespace

TEST_CASE("the fixture covers every classifier kind and blank inputs")
{
    const auto f = fixture();
    CHECK(f["tolerance"].get<double>() == 1e-6);
    std::set<std::string> kinds;
    std::size_t blank = 0;
    for (const auto& c : f["cases"]) {
        const auto b = store::decode_bundle(c["bundle"].get<std::string>());
        kinds.insert(std::string(store::classifier_tag(b.classifier)));
        const auto x = input_of(c);
        blank += std::all_of(x.begin(), x.end(), data::is_missing) ? 1 : 0;
    }
    CHECK(kinds == std::set<std::string>{"svm", "tree", "forest"});
    CHECK(blank >= 4);
    CHECK(f["cases"].size() >= 20);
}

TEST_CASE("bundles in the fixture re-encode byte for byte")
{
    for (const auto& c : fixture()["cases"]) {
        const auto bytes = c["bundle"].get<std::string>();
        CHECK(store::encode_bundle(store::decode_bundle(bytes)) == bytes);
    }
}

TEST_CASE("the library reproduces every expected score")
{
    const auto f = fixture();
    const double tol = f["tolerance"].get<double>();
    for (const auto& c : f["cases"]) {
        INFO(c["name"].get<std::string>());
        const auto b = store::decode_bundle(c["bundle"].get<std::string>());
        const auto p = b.predict(input_of(c));
        CHECK(p.label == c["expected"]["label"].get<int>());
        CHECK(std::abs(p.score - c["expected"]["score"].get<double>()) <= tol);
    }
}

TEST_CASE("the CLI reproduces every expected score")
{
    const auto f = fixture();
    const double tol = f["tolerance"].get<double>();
    test::TempDir dir;
    for (const auto& c : f["cases"]) {
        INFO(c["name"].get<std::string>());
        const auto bytes = c["bundle"].get<std::string>();
        const auto b = store::decode_bundle(bytes);
        test::write_text(dir / "b.json", bytes);
        std::string csv;
        for (std::size_t j = 0; j < b.schema.size(); ++j) {
            csv += (j ? "," : "") + b.schema.features()[j].name;
        }
        csv += "\n";
        const auto x = input_of(c);
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j) {
                csv += ",";
            }
            if (!data::is_missing(x[j])) {
                csv += json(x[j]).dump();
            }
        }
        csv += "\n";
        test::write_text(dir / "in.csv", csv);
        int status = 0;
        const auto out = capture(env("TRIAGE_CLI") + " predict --bundle '" + (dir / "b.json").string() +
                                     "' --input '" + (dir / "in.csv").string() + "'",
                                 status);
        REQUIRE(status == 0);
        std::istringstream in(out);
        std::string header;
        std::string row;
        std::getline(in, header);
        std::getline(in, row);
        std::istringstream fields(row);
        std::string idx;
        std::string label;
        std::string name;
        std::string score;
        std::getline(fields, idx, ',');
        std::getline(fields, label, ',');
        std::getline(fields, name, ',');
        std::getline(fields, score, ',');
        CHECK(std::stoi(label) == c["expected"]["label"].get<int>());
        CHECK(std::abs(std::stod(score) - c["expected"]["score"].get<double>()) <= tol);
    }
}

TEST_CASE("regenerating the fixture reproduces the committed file")
{
    test::TempDir dir;
    int status = 0;
    const auto out = capture(env("PORTAL_FIXTURE_TOOL") + " --out '" + (dir / "p.json").string() + "'", status);
    REQUIRE(status == 0);
    CHECK(test::read_text(dir / "p.json") == test::read_text(env("PORTAL_FIXTURE_FILE")));
}
