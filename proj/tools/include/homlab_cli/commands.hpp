#pragma once

#include "homlab_cli/problem.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <ostream>

namespace homlab::cli {

using json = nlohmann::ordered_json;

// An integer index that failed its grid-stability check; exit code 3.
struct IndexNotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Context {
    RunConfig rc;
    json config = json::object();  // snapshot of the parsed key/values and flags
    std::filesystem::path out;
    std::map<std::string, double> timings;  // seconds, written apart from the reports
    std::ostream* log = nullptr;
};

// Each command writes <out>/<name>.json (plus CSV plot data where relevant)
// and returns the report.
json cmd_spectrum(Context& ctx);
json cmd_index(Context& ctx);
json cmd_flow(Context& ctx);
json cmd_reduce(Context& ctx);
json cmd_solve(Context& ctx);
json cmd_linear(Context& ctx);
json cmd_verify(Context& ctx);
// Runs the configured stage list and writes the combined run record.
json cmd_report(Context& ctx);

// (mu, nu) with its tolerance certificate and a check on the grid with 2n nodes.
json certified_index(const Problem& p, const RunConfig& rc, const Mat& B);

void write_json(const std::filesystem::path& path, const json& j);
void write_timings(const Context& ctx);

}  // namespace homlab::cli
