#include "homlab_cli/app.hpp"
#include "homlab_cli/commands.hpp"
#include "homlab_cli/suite.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace homlab;
using namespace homlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path config_dir() {
    const char* d = std::getenv("HOMLAB_CONFIG_DIR");
    return d ? fs::path(d) : fs::path("configs");
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("homlab_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.conf";
    std::ofstream(p) << text;
    return p;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "homlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) {
    std::ifstream f(p);
    return json::parse(f);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int csv_rows(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    int rows = -1;  // header
    while (std::getline(f, line))
        if (!line.empty()) ++rows;
    return rows;
}

}  // namespace

TEST_CASE("config parser: sections, dotted keys, comments") {
    const Config c = Config::parse("# top\n[grid]\nT = 5   # half width\nn=40\n\nproblem.potential = quadratic\n");
    CHECK(c.num("grid.T", 0) == 5.0);
    CHECK(c.integer("grid.n", 0) == 40);
    CHECK(c.str("grid.problem.potential", "") == "quadratic");
    CHECK(c.num("grid.missing", 1.5) == 1.5);
    const Config l = Config::parse("search.amplitudes = 1, 2.5 ,3\nsearch.deflation = no\n");
    CHECK(l.nums("search.amplitudes", {}) == std::vector<double>{1.0, 2.5, 3.0});
    CHECK_FALSE(l.flag("search.deflation", true));
}

TEST_CASE("config parser: diagnostics name the line or key") {
    CHECK_THROWS_WITH_AS(Config::parse("grid.T 5\n", "x.conf"), doctest::Contains("x.conf:1"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse("a = 1\na = 2\n"), doctest::Contains("'a' given twice"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse("[grid\n"), doctest::Contains("unterminated"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse("grid.n = forty\n").integer("grid.n", 0), doctest::Contains("grid.n"), ConfigError);
    CHECK_THROWS_WITH_AS(run_config(Config::parse("grid.nn = 4\n")), doctest::Contains("grid.nn"), ConfigError);
    CHECK_THROWS_WITH_AS(run_config(Config::parse("tol.orbit = -1\n")), doctest::Contains("tol.orbit"), ConfigError);
    CHECK_THROWS_WITH_AS(run_config(Config::parse("grid.n = 2\n")), doctest::Contains("grid.n"), ConfigError);
}

TEST_CASE("stage lists must form a dependency chain") {
    CHECK_NOTHROW(validate_stages({"spectrum", "index"}));
    CHECK_NOTHROW(validate_stages({"spectrum", "reduce", "solve"}));
    CHECK_THROWS_AS(validate_stages({"solve"}), ConfigError);
    CHECK_THROWS_AS(validate_stages({"index"}), ConfigError);
    CHECK_THROWS_AS(validate_stages({"spectrum", "bogus"}), ConfigError);
}

TEST_CASE("spectrum: desk config, malformed config, empty window") {
    const fs::path out = scratch("spectrum");
    const Run r = run_cli({"spectrum", "--config", (config_dir() / "desk.conf").string(), "--out", out.string()});
    REQUIRE(r.code == 0);
    CHECK(csv_rows(out / "spectrum.csv") >= 8);
    CHECK(read_json(out / "spectrum.json")["count"].get<int>() >= 8);
    CHECK(fs::exists(out / "timings.json"));

    const fs::path bad = write_config(out, "[grid]\nT = 20\nn = many\n");
    const Run m = run_cli({"spectrum", "--config", bad.string(), "--out", out.string()});
    CHECK(m.code == 1);
    CHECK(m.err.find("grid.n") != std::string::npos);

    const fs::path empty = write_config(out, "grid.T = 5\ngrid.n = 100\nspectrum.lo = 0.001\nspectrum.hi = 0.002\n");
    const fs::path out2 = out / "empty";
    CHECK(run_cli({"spectrum", "--config", empty.string(), "--out", out2.string()}).code == 0);
    CHECK(csv_rows(out2 / "spectrum.csv") == 0);
}

TEST_CASE("index: certified pair, B = 0 and a spectral point") {
    const fs::path out = scratch("index");
    const Run r = run_cli({"index", "--config", (config_dir() / "desk.conf").string(), "--out", out.string()});
    REQUIRE(r.code == 0);
    const json j = read_json(out / "index.json")["index"];
    CHECK(j["nu"] == 0);
    CHECK(j["mu"].get<int>() >= 0);
    CHECK(j["grid_stable"] == true);
    CHECK(j["tol_stable"] == true);
    CHECK(j["refined"]["index"]["mu"] == j["mu"]);

    const fs::path zero = write_config(out, "grid.T = 10\ngrid.n = 400\nindex.B = 0\n");
    REQUIRE(run_cli({"index", "--config", zero.string(), "--out", out.string()}).code == 0);
    const json z = read_json(out / "index.json");
    CHECK(z["index"]["mu"] == 0);
    CHECK(z["index"]["nu"] == z["n_zero_A"]);

    // An eigenvalue of A as B: nu >= 1 and a shift suggestion.
    const Vec ev = eigenvalues(assemble(split_growth(1), make_grid(10.0, 400)));
    Index k = 0;
    while (ev[k] <= 0.0) ++k;
    std::ostringstream text;
    text.precision(17);
    text << "grid.T = 10\ngrid.n = 400\nindex.B = " << ev[k] << "\n";
    const fs::path spec = write_config(out, text.str());
    REQUIRE(run_cli({"index", "--config", spec.string(), "--out", out.string()}).code == 0);
    const json s = read_json(out / "index.json")["index"];
    CHECK(s["nu"].get<int>() >= 1);
    CHECK(s["degenerate"] == true);
    CHECK(s["suggestion"]["shifted"]["nu"] == 0);
    CHECK(s["suggestion"]["shifted"]["mu"] == s["mu"]);
}

TEST_CASE("index: undefined named matrix is a config error") {
    const fs::path out = scratch("index_named");
    const fs::path c = write_config(out, "grid.T = 5\ngrid.n = 50\nindex.B = B_inf\n");
    const Run r = run_cli({"index", "--config", c.string(), "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("index.B") != std::string::npos);
}

TEST_CASE("flow agrees with the index and rejects large operators") {
    const fs::path out = scratch("flow");
    REQUIRE(run_cli({"flow", "--config", (config_dir() / "flow_small.conf").string(), "--out", out.string()}).code == 0);
    const json j = read_json(out / "flow.json");
    CHECK(j["agree"] == true);
    CHECK(j["sf"].get<int>() == -j["index"]["mu"].get<int>());
    CHECK(run_cli({"flow", "--config", (config_dir() / "desk.conf").string(), "--out", out.string()}).code == 1);
}

TEST_CASE("reduce reports beta, d0 and the sampled bound") {
    const fs::path out = scratch("reduce");
    const fs::path c = write_config(out, "problem.potential = saturating\ngrid.T = 10\ngrid.n = 600\n");
    REQUIRE(run_cli({"reduce", "--config", c.string(), "--out", out.string()}).code == 0);
    const json j = read_json(out / "reduce.json");
    CHECK(j["d0"].get<int>() > 0);
    CHECK(j["bound_holds"] == true);
    CHECK(j["samples"].size() == 5);
}

TEST_CASE("solve: quadratic R has an empty guarantee and passes") {
    const fs::path out = scratch("solve_quadratic");
    REQUIRE(run_cli({"solve", "--config", (config_dir() / "quadratic.conf").string(), "--out", out.string()}).code == 0);
    const json j = read_json(out / "solve.json");
    CHECK(j["guarantee"]["count"] == 0);
    CHECK(j["search"]["nontrivial_found"] == 0);
    CHECK(j["verdict"]["pass"] == true);
    for (const auto& o : j["orbits"]) {
        CHECK(o["index_identity"] == true);
        CHECK(o["index"].contains("grid_certificate"));
    }
}

TEST_CASE("solve: seed-starved control records a failing verdict with exit 0") {
    const fs::path out = scratch("solve_starved");
    const Run r = run_cli({"solve", "--config", (config_dir() / "starved.conf").string(), "--out", out.string()});
    CHECK(r.code == 0);
    const json j = read_json(out / "solve.json");
    CHECK(j["guarantee"]["count"].get<int>() >= 1);
    CHECK(j["verdict"]["pass"] == false);
    CHECK(j["verdict"]["diagnostic"].get<std::string>().find("guarantee unmet") != std::string::npos);
}

TEST_CASE("solve: identical config and seed give byte-identical reports") {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    const std::string text = "problem.potential = saturating\ngrid.T = 8\ngrid.n = 500\nsearch.directions = 2\n"
                             "search.amplitudes = 0.5, 1.5\nsearch.random = 2\n";
    const fs::path c = write_config(a, text);
    REQUIRE(run_cli({"solve", "--config", c.string(), "--out", a.string(), "--seed", "3"}).code == 0);
    REQUIRE(run_cli({"solve", "--config", c.string(), "--out", b.string(), "--seed", "3"}).code == 0);
    CHECK(slurp(a / "solve.json") == slurp(b / "solve.json"));
    CHECK(slurp(a / "orbits" / "orbit_0.csv") == slurp(b / "orbits" / "orbit_0.csv"));
    const json j = read_json(a / "solve.json");
    CHECK(j["verdict"]["pass"] == true);
    CHECK(j["search"]["nontrivial_found"].get<int>() >= 1);
}

TEST_CASE("numeric failure maps to exit code 2") {
    const fs::path out = scratch("numeric");
    // No spectral gap above 2 (C_R + 1) on a coarse grid.
    const fs::path c = write_config(out, "problem.potential = quadratic\npotential.b = 1e6\ngrid.T = 5\ngrid.n = 50\n");
    const Run r = run_cli({"reduce", "--config", c.string(), "--out", out.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("numeric failure") != std::string::npos);
}

TEST_CASE("linear: hyperbolic diagonal B and the nullity cross-check") {
    const fs::path out = scratch("linear");
    const fs::path c = write_config(out, "grid.T = 10\ngrid.n = 1000\nlinear.B = 1,-1\n");
    REQUIRE(run_cli({"linear", "--config", c.string(), "--out", out.string()}).code == 0);
    const json j = read_json(out / "linear.json");
    CHECK(j["fundamental_solution"]["defect"].get<double>() <= 1e-10);
    CHECK(j["stable_subspace"]["dim"] == 1);
    CHECK(j["nullity"]["agree"] == true);
}

TEST_CASE("verify: default suite, planted eta typo, restricted suite") {
    const fs::path out = scratch("verify");
    REQUIRE(run_cli({"verify", "--out", out.string()}).code == 0);
    const json all = read_json(out / "verify.json");
    CHECK(all["pass"] == true);
    std::set<std::string> suites;
    for (const auto& p : all["properties"]) suites.insert(p["suite"].get<std::string>());
    CHECK(suites.size() == suite_names().size());

    const fs::path typo = write_config(out, "verify.eta_mutation = typo\n");
    REQUIRE(run_cli({"verify", "--config", typo.string(), "--out", out.string(), "--stages", "eta"}).code == 0);
    const json t = read_json(out / "verify.json");
    CHECK(t["pass"] == false);
    CHECK(t["properties"][0]["name"] == "c2_junctions");
    CHECK(t["properties"][0]["pass"] == false);

    REQUIRE(run_cli({"verify", "--out", out.string(), "--stages", "index"}).code == 0);
    for (const auto& p : read_json(out / "verify.json")["properties"]) CHECK(p["suite"] == "index");
    CHECK(run_cli({"verify", "--out", out.string(), "--stages", "nonsense"}).code == 1);
}

TEST_CASE("mistyped cutoff breaks only the junction values") {
    CHECK(eta_junction_error(standard_eta()) < 1e-6);
    CHECK(eta_junction_error(mistyped_eta()) > 1e-2);
}

TEST_CASE("report runs the stage chain and keeps the config snapshot") {
    const fs::path out = scratch("report");
    const fs::path c = write_config(out, "problem.potential = saturating\ngrid.T = 10\ngrid.n = 600\nstages = spectrum, reduce\n");
    REQUIRE(run_cli({"report", "--config", c.string(), "--out", out.string()}).code == 0);
    const json j = read_json(out / "run_record.json");
    REQUIRE(j["stages"].size() == 2);
    CHECK(j["stages"][0]["stage"] == "spectrum");
    CHECK(j["stages"][1]["stage"] == "reduce");
    CHECK(j["config"]["problem.potential"] == "saturating");
    const json t = read_json(out / "timings.json");
    CHECK(t.contains("spectrum"));
    CHECK(t.contains("reduce"));
    CHECK(run_cli({"report", "--config", c.string(), "--out", out.string(), "--stages", "solve"}).code == 1);
}

TEST_CASE("usage errors") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"bogus"}).code == 1);
    CHECK(run_cli({"spectrum", "--config", "/nonexistent/x.conf"}).code == 1);
}
