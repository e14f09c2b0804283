#include "pdmdirac/runner.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace pdmdirac;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("pdmdirac_test_runner_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_cfg(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.cfg";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Ran {
    int status;
    std::string out;
    std::string err;
};

Ran run(const std::string& command, const fs::path& cfg, const fs::path& out_dir, bool strict = false) {
    RunRequest r;
    r.command = command;
    r.config_path = cfg.string();
    r.out_dir = out_dir.string();
    r.strict = strict;
    std::ostringstream o, e;
    const int s = run_command(r, o, e);
    return {s, o.str(), e.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

const char* kMassless =
    "model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 0\nstates = 3\ncompare.tol = 1e-5\n"
    "outputs = spectrum, wavefunctions, potential\n";

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig c = parse_config(
        "# comment\nmodel.name = Rational  # trailing\nmodel.alpha=2\nmodel.v0 = 0.5\nmodel.m0 = 1\n"
        "grid.n = 128\nstates = 2\noutputs = spectrum, potential\nbic.energies = 1, 2.5\n");
    CHECK(c.model == BuiltinModel::Rational);
    CHECK(c.params.at("alpha") == 2.0);
    CHECK(c.grid_n == 128);
    CHECK(c.states == 2);
    CHECK(c.wants("potential"));
    CHECK_FALSE(c.wants("wavefunctions"));
    CHECK(c.bic_energies == std::vector<double>{1.0, 2.5});

    require_code([] { parse_config("model.name = Rational\nmodel.alpha = 1\nmodel.m0 = 0\n"); },
                 ErrorCode::InvalidParameter);
    CHECK(message_of([] { parse_config("model.name = Rational\nmodel.alpha = 1\nmodel.m0 = 0\n"); }).find("v0") !=
          std::string::npos);
    require_code([] { parse_config("model.name = Rational\nbogus = 1\n"); }, ErrorCode::Config);
    require_code([] { parse_config("model.name = Nope\n"); }, ErrorCode::Config);
    require_code([] { parse_config("model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 0\ngrid.n = 10\n"); },
                 ErrorCode::InvalidParameter);
    require_code([] { parse_config("model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 0\ntol.eig = 0\n"); },
                 ErrorCode::InvalidParameter);
    require_code([] { parse_config("model.name = CoshSquare\nmodel.alpha = x\n"); }, ErrorCode::Config);
    require_code([] { parse_config("just text\n"); }, ErrorCode::Config);
    CHECK(config_keys_help().find("model.name") != std::string::npos);
}

TEST_CASE("config hash ignores output.dir and formatting") {
    const std::string base = "model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 0\n";
    const auto a = config_hash(parse_config(base));
    const auto b = config_hash(parse_config(base + "output.dir = elsewhere\n"));
    const auto c = config_hash(parse_config("#x\n" + base));
    const auto d = config_hash(parse_config(base + "states = 2\n"));
    CHECK(a.size() == 16);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a != d);
}

TEST_CASE("mode resolution") {
    auto cfg = parse_config("model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 1\n");
    CHECK(resolve_mode(cfg, builtin_model(cfg.model, cfg.params)) == PotentialMode::ConstantU);
    cfg = parse_config("model.name = PoschlTeller\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 1\n");
    CHECK(resolve_mode(cfg, builtin_model(cfg.model, cfg.params)) == PotentialMode::Approximate);
    cfg.mode = "constant-u";
    require_code([&] { resolve_mode(cfg, builtin_model(cfg.model, cfg.params)); }, ErrorCode::InvalidParameter);
}

TEST_CASE("exit status mapping") {
    CHECK(exit_status_for(ErrorCode::Config) == 2);
    CHECK(exit_status_for(ErrorCode::InvalidParameter) == 2);
    CHECK(exit_status_for(ErrorCode::NonConvergence) == 3);
    CHECK(exit_status_for(ErrorCode::ZetaCrossing) == 3);
    CHECK(exit_status_for(ErrorCode::SubGap) == 3);
}

TEST_CASE("solve writes headed artifacts and is deterministic") {
    const fs::path d = scratch("solve");
    const fs::path cfg = write_cfg(d, kMassless);
    const Ran a = run("solve", cfg, d / "a", true);
    const Ran b = run("solve", cfg, d / "b", true);
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    for (const char* f : {"spectrum.csv", "wavefunction_0.csv", "wavefunction_2.csv", "potential.csv"}) {
        INFO(f);
        const std::string x = slurp(d / "a" / f);
        REQUIRE_FALSE(x.empty());
        CHECK(x == slurp(d / "b" / f));
        CHECK(x.find("# config_hash") != std::string::npos);
        CHECK(x.find("mode") != std::string::npos);
        CHECK(x.find("grid") != std::string::npos);
    }
    const auto rows = csv_rows(slurp(d / "a" / "spectrum.csv"));
    REQUIRE(rows.size() == 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(std::stoi(rows[static_cast<std::size_t>(k)][0]) == k);
        CHECK(rel_err(std::stod(rows[static_cast<std::size_t>(k)][2]), (k + 1) * std::numbers::pi / 2) <= 1e-6);
        CHECK(std::stoi(rows[static_cast<std::size_t>(k)][4]) == k);
    }
    CHECK(a.out.find("E_analytic") != std::string::npos);
}

TEST_CASE("failure exit codes") {
    const fs::path d = scratch("fail");
    CHECK(run("solve", write_cfg(d, "model.name = Rational\nmodel.alpha = 1\nmodel.m0 = 0\n"), d / "o").status == 2);
    const Ran ls = run("solve", write_cfg(d, "model.name = LinearSingular\nmodel.A = 1\nmodel.v0 = 1\nstates = 1\n"), d / "o");
    CHECK(ls.status == 3);
    CHECK_FALSE(ls.err.empty());
    const Ran pub = run("solve",
                        write_cfg(d, "model.name = PoschlTeller\nmodel.alpha = 1\nmodel.v0 = 2\nmodel.m0 = 1\n"
                                     "states = 3\ncompare.tol = 1e-4\nanalytic.s_variant = as-published\n"),
                        d / "o", true);
    CHECK(pub.status == 4);
    const Ran missing = run("solve", d / "absent.cfg", d / "o");
    CHECK(missing.status == 2);
    const Ran sub = run("bic",
                        write_cfg(d, "model.name = Rational\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 1\nbic.energies = 0.5\n"),
                        d / "o");
    CHECK(sub.status == 3);
}

TEST_CASE("scan rows, identity and resume") {
    const fs::path d = scratch("scan");
    const fs::path cfg = write_cfg(d,
                                   "model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 0\nstates = 1\n"
                                   "scan.param = m0\nscan.min = 0\nscan.max = 2\nscan.steps = 9\n");
    REQUIRE(run("scan", cfg, d / "o").status == 0);
    const std::string full = slurp(d / "o" / "scan.csv");
    const auto rows = csv_rows(full);
    REQUIRE(rows.size() == 9);
    for (const auto& r : rows) {
        const double m0 = std::stod(r[1]), E = std::stod(r[3]);
        CHECK(r[5] == "ok");
        CHECK(std::abs(E * E - std::pow(std::numbers::pi / 2, 2) - m0 * m0) <= 1e-6);
    }

    // Interrupt simulation: keep the header, three points and a torn line.
    std::istringstream is(full);
    std::string line, cut;
    int data = 0;
    bool seen_columns = false;
    while (std::getline(is, line)) {
        if (line[0] != '#' && seen_columns && ++data > 3) break;
        if (line[0] != '#') seen_columns = true;
        cut += line + "\n";
    }
    std::ofstream(d / "o" / "scan.csv", std::ios::binary) << cut << "3,0.75,0,2.0";
    const Ran resumed = run("scan", cfg, d / "o");
    CHECK(resumed.status == 0);
    CHECK(resumed.out.find("resuming scan after 3") != std::string::npos);
    CHECK(slurp(d / "o" / "scan.csv") == full);

    const fs::path bad = write_cfg(d, "model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 0\n"
                                      "scan.param = m0\nscan.min = 0\nscan.max = 2\nscan.steps = 1\n");
    CHECK(run("scan", bad, d / "o2").status == 2);
    const fs::path axis = write_cfg(d, "model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 0\n"
                                       "scan.param = beta\nscan.min = 0\nscan.max = 2\nscan.steps = 3\n");
    CHECK(run("scan", axis, d / "o3").status == 2);
}

TEST_CASE("alpha scan of the massless well is linear") {
    const fs::path d = scratch("alpha");
    const fs::path cfg = write_cfg(d,
                                   "model.name = CoshSquare\nmodel.alpha = 1\nmodel.v0 = 1.5\nmodel.m0 = 0\nstates = 1\n"
                                   "scan.param = alpha\nscan.min = 0.5\nscan.max = 2\nscan.steps = 4\n");
    REQUIRE(run("scan", cfg, d / "o").status == 0);
    const auto rows = csv_rows(slurp(d / "o" / "scan.csv"));
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK(rel_err(std::stod(r[3]) / std::stod(r[1]), std::numbers::pi * 1.5 / 2) <= 1e-6);
}

TEST_CASE("bic and report commands") {
    const fs::path d = scratch("bic");
    const fs::path cfg = write_cfg(d, "model.name = Rational\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 0.5\n"
                                      "bic.energies = 0.5, 1.3, 2.7\nstates = 2\n");
    const Ran b = run("bic", cfg, d / "o");
    REQUIRE(b.status == 0);
    for (int i = 0; i < 3; ++i) CHECK(fs::exists(d / "o" / ("bic_" + std::to_string(i) + ".csv")));
    const Ran r = run("report", cfg, d / "o");
    REQUIRE(r.status == 0);
    CHECK(fs::exists(d / "o" / "analytic.csv"));
    CHECK(fs::exists(d / "o" / "convergence.csv"));
    CHECK(fs::exists(d / "o" / "discrepancy.csv"));

    const fs::path pt = write_cfg(d, "model.name = PoschlTeller\nmodel.alpha = 1\nmodel.v0 = 1\nmodel.m0 = 1\nstates = 3\n");
    const Ran rp = run("report", pt, d / "p");
    REQUIRE(rp.status == 0);
    const std::string analytic = slurp(d / "p" / "analytic.csv");
    CHECK(analytic.find("verified") != std::string::npos);
    CHECK(analytic.find("as-published") != std::string::npos);
    for (const auto& row : csv_rows(slurp(d / "p" / "convergence.csv")))
        CHECK(std::stod(row[4]) == Catch::Approx(4.0).epsilon(0.1));
}
