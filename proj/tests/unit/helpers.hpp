#pragma once

#include "triage/data/dataset.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace triage::test {

inline data::FeatureSchema numbered_schema(std::size_t d)
{
    std::vector<data::Feature> f;
    for (std::size_t j = 0; j < d; ++j) {
        f.push_back({j, "f" + std::to_string(j), ""});
    }
    return data::FeatureSchema(std::move(f), false, {"pos", "neg"});
}

inline data::Dataset make_dataset(std::size_t d, std::vector<double> values, std::vector<int> labels)
{
    return data::Dataset(numbered_schema(d), std::move(values), std::move(labels));
}

// Uniform integers in [0, levels) so ties and repeated values are common.
inline data::Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d, int levels = 6)
{
    std::uniform_int_distribution<int> value(0, levels - 1);
    std::vector<double> x(n * d);
    for (auto& v : x) {
        v = value(rng);
    }
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = i % 2 == 0 ? data::kPositive : data::kNegative;
    }
    std::shuffle(y.begin(), y.end(), rng);
    return make_dataset(d, std::move(x), std::move(y));
}

// Directory removed with everything in it when the object goes away.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("triage-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace triage::test
