#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pss/goursat.hpp"
#include "pss/zero_test.hpp"

namespace pss::cli {

inline constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kFailed = 1, kBadInput = 2 };

struct RunConfig {
    std::string command;
    std::string catalog_key;
    std::string file;
    std::string data_file;
    std::map<std::string, double> overrides;
    std::map<std::string, std::string> functions;
    std::optional<int> delta;
    std::uint64_t seed = kDefaultSeed;
    int trials = 100;
    double tol = 1e-9;
    std::string out_dir = ".";
    std::vector<std::size_t> levels{33, 65, 129, 257};
    std::size_t nodes = 0;  // 0: command default

    ZeroTestOptions zero() const;
    ValidateOptions validate() const;
    // Every tolerance in effect, echoed into each report.
    nlohmann::json tolerances() const;
    nlohmann::json to_json() const;
};

// Runs one command; reports go to `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pss::cli
