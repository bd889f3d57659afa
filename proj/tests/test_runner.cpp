#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbmlab/runner/run.hpp"

using namespace sbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("sbmlab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

RunOptions quiet_to(const fs::path& dir) {
    RunOptions o;
    o.out = dir.string();
    o.workers = 1;
    o.quiet = true;
    return o;
}

void write(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    f << s;
}

}  // namespace

TEST(Manifest, TextAndJsonAgree) {
    const auto a = parse_manifest("seed = 7\n# note\n[vinf]\nop = pde.v_infinity\nd = 3, 2\nr = 1, 2\nreplicates = 5\n");
    const auto b = parse_manifest(R"({"seed": 7, "experiments": [{"name": "vinf", "op": "pde.v_infinity", "d": [3, 2], "r": [1, 2], "replicates": 5}]})");
    ASSERT_EQ(a.experiments.size(), 1u);
    ASSERT_EQ(b.experiments.size(), 1u);
    EXPECT_EQ(a.experiments[0].params, b.experiments[0].params);
    EXPECT_EQ(a.experiments[0].seed, b.experiments[0].seed);
    EXPECT_EQ(a.experiments[0].replicates, 5u);
    EXPECT_EQ(a.experiments[0].outdir, "vinf");
    EXPECT_EQ(a.experiments[0].seed, derive_seed(7, "vinf"));
}

TEST(Manifest, SeedsDependOnNameNotOrder) {
    const auto a = parse_manifest("seed = 3\n[x]\nop = pde.kpp\n[y]\nop = pde.kpp\n");
    const auto b = parse_manifest("seed = 3\n[y]\nop = pde.kpp\n[x]\nop = pde.kpp\n");
    EXPECT_EQ(a.experiments[0].seed, b.experiments[1].seed);
    EXPECT_NE(a.experiments[0].seed, a.experiments[1].seed);
    EXPECT_NE(derive_seed(3, "x"), derive_seed(4, "x"));
}

TEST(Manifest, RejectsBadInput) {
    EXPECT_THROW(parse_manifest("[a]\nop = pde.kpp\n[a]\nop = pde.kpp\n"), input_error);
    EXPECT_THROW(parse_manifest("[a]\nop = pde.kpp\nd = 1\nd = 2\n"), input_error);
    EXPECT_THROW(parse_manifest("colour = red\n"), input_error);
    EXPECT_THROW(parse_manifest("[a]\nop = pde.kpp\noutdir = ../up\n"), input_error);
    EXPECT_THROW(parse_manifest("[a b]\nop = pde.kpp\n"), input_error);
    EXPECT_THROW(parse_manifest("[a]\nd = 1\n"), input_error);
    EXPECT_THROW(parse_manifest("[a\n"), input_error);
    EXPECT_THROW(parse_manifest("seed = -1\n"), input_error);
    EXPECT_THROW(parse_manifest("{\"experiments\": 3}"), input_error);
    EXPECT_THROW(parse_manifest("{not json"), input_error);
}

TEST(Run, ValidatesEverythingBeforeWriting) {
    const auto dir = scratch("validate");
    const auto unknown_key = parse_manifest("[ok]\nop = pde.v_infinity\n[bad]\nop = pde.kpp\nbogus = 1\n");
    EXPECT_THROW(run_manifest(unknown_key, quiet_to(dir)), input_error);
    EXPECT_FALSE(fs::exists(dir));
    const auto unknown_op = parse_manifest("[ok]\nop = pde.v_infinity\n[bad]\nop = pde.nothing\n");
    EXPECT_THROW(run_manifest(unknown_op, quiet_to(dir)), input_error);
    const auto bad_value = parse_manifest("[bad]\nop = pde.v_infinity\nd = 4\nr = 1\n");
    EXPECT_THROW(run_manifest(bad_value, quiet_to(dir)), input_error);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(Run, EmptyManifestReportsClean) {
    const auto dir = scratch("empty");
    const auto s = run_manifest(parse_manifest("seed = 1\n"), quiet_to(dir));
    EXPECT_EQ(s.experiments, 0u);
    EXPECT_EQ(report_dir(dir.string()).exit_code, 0);
    fs::remove_all(dir);
}

TEST(Run, VInfinityTableAndReport) {
    const auto dir = scratch("vinf");
    run_manifest(parse_manifest("[vinf]\nop = pde.v_infinity\n"), quiet_to(dir));
    const auto t = read_csv((dir / "vinf" / "v_infinity.csv").string());
    ASSERT_EQ(t.rows().size(), 3u);
    EXPECT_EQ(t.rows()[0][2], "2");
    EXPECT_EQ(t.rows()[1][2], "1");
    EXPECT_EQ(t.rows()[2][2], "6");
    const auto r = report_dir(dir.string());
    EXPECT_EQ(r.exit_code, 0);
    const auto j = nlohmann::json::parse(slurp(dir / "run_report.json"));
    EXPECT_EQ(j["experiments"][0]["params"]["d"], "3, 2, 1");
    EXPECT_EQ(j["version"], version);
    fs::remove(dir / "vinf" / "v_infinity.csv");
    EXPECT_EQ(report_dir(dir.string()).exit_code, 2);
    fs::remove_all(dir);
}

TEST(Run, FullyCensoredRunFailsReport) {
    const auto dir = scratch("fail");
    // A cap far below one replicate's event count censors everything.
    run_manifest(parse_manifest("[n]\nop = sim.normalization\nN = 10\nreplicates = 10\ncap_per_n2 = 0.001\n"), quiet_to(dir));
    const auto r = report_dir(dir.string());
    EXPECT_EQ(r.exit_code, 1);
    fs::remove_all(dir);
}

TEST(Report, ExitCodes) {
    const auto dir = scratch("report");
    EXPECT_EQ(report_dir(dir.string()).exit_code, 2);
    fs::create_directories(dir);
    write(dir / "index.csv", "experiment,file\n");
    write(dir / "run_report.json", "{}\n");
    auto gates = [&](const std::string& kind, const std::string& verdict) {
        Gate g;
        g.experiment = "e";
        g.name = "g";
        g.hard = kind == "hard";
        g.pass = verdict == "pass";
        CsvTable t(gate_header());
        t.row(gate_cells(g));
        t.save((dir / "gates.csv").string());
    };
    gates("hard", "pass");
    EXPECT_EQ(report_dir(dir.string()).exit_code, 0);
    gates("diagnostic", "fail");
    const auto w = report_dir(dir.string());
    EXPECT_EQ(w.exit_code, 0);
    EXPECT_NE(w.text.find("WARN e / g"), std::string::npos);
    gates("hard", "fail");
    const auto f = report_dir(dir.string());
    EXPECT_EQ(f.exit_code, 1);
    EXPECT_NE(f.text.find("failing hard gates"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Gates, DecideRules) {
    EXPECT_TRUE(decide("abs", 1.05, 1, 0.1, 0));
    EXPECT_FALSE(decide("abs", 1.2, 1, 0.1, 0));
    EXPECT_TRUE(decide("rel", 105, 100, 0.1, 0));
    EXPECT_TRUE(decide("z", 0, 0, 3, 2.9));
    EXPECT_FALSE(decide("z", 0, 0, 3, 3.1));
    EXPECT_TRUE(decide("min", 0.95, 0.9, 0, 0));
    EXPECT_TRUE(decide("max", 0.5, 0.9, 0, 0));
    EXPECT_FALSE(decide("bool", 0, 1, 0, 0));
    EXPECT_FALSE(decide("other", 0, 0, 0, 0));
}

TEST(Run, DeterministicAcrossRunsAndWorkers) {
    const auto m = parse_manifest("seed = 11\n[hit]\nop = bessel.hitting\nreplicates = 300\n[nrm]\nop = sim.normalization\nN = 20\nreplicates = 200\n");
    const auto a = scratch("det_a"), b = scratch("det_b");
    run_manifest(m, quiet_to(a));
    auto o = quiet_to(b);
    o.workers = 3;
    run_manifest(m, o);
    for (const char* f : {"gates.csv", "index.csv", "hit/hitting.csv", "nrm/normalization.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    auto o2 = quiet_to(b);
    o2.seed_override = true;
    o2.seed = 12;
    run_manifest(m, o2);
    EXPECT_NE(slurp(a / "hit/hitting.csv"), slurp(b / "hit/hitting.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}
