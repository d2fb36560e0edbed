#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "isacwave/dsp.hpp"
#include "isacwave/rng.hpp"

namespace testing {

inline isacwave::CVec random_qpsk(std::size_t n, isacwave::Rng& rng) {
    std::bernoulli_distribution bit(0.5);
    const double a = 1.0 / std::sqrt(2.0);
    isacwave::CVec out(n);
    for (auto& s : out) {
        s = {bit(rng) ? a : -a, bit(rng) ? a : -a};
    }
    return out;
}

inline isacwave::CVec random_gaussian(std::size_t n, isacwave::Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    isacwave::CVec out(n);
    for (auto& s : out) {
        s = {g(rng), g(rng)};
    }
    return out;
}

inline double max_abs_diff(const isacwave::CVec& a, const isacwave::CVec& b) {
    double m = a.size() == b.size() ? 0.0 : 1e300;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("isacwave_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testing
