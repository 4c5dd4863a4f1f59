#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Outcome r;
    r.code = atsp::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("atsp_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name), std::ios::binary) << text;
        return path(name);
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenIsDeterministic) {
    const std::vector<std::string> args{"gen", "--n", "12", "--digits", "2.5", "--seed", "9", "--index", "3"};
    auto a = args, b = args;
    a.insert(a.end(), {"--out", path("a.atsp")});
    b.insert(b.end(), {"--out", path("b.atsp")});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    EXPECT_EQ(slurp(path("a.atsp")), slurp(path("b.atsp")));
    EXPECT_EQ(slurp(path("a.atsp")).rfind("ATSP 12 316 9 2.5\n", 0), 0u);

    const Outcome s1 = run({"solve", "--in", path("a.atsp")});
    const Outcome s2 = run({"solve", "--in", path("a.atsp")});
    EXPECT_EQ(s1.code, 0);
    EXPECT_EQ(s1.out, s2.out);
}

TEST_F(Cli, SolvesTheTriangle) {
    const std::string f = write("t.atsp", "ATSP 3 10 0 1\n-1 1 2\n3 -1 4\n5 6 -1\n");
    const Outcome r = run({"solve", "--in", f});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "cost 10\ntour 0 1 2\nap_calls 1\nnodes 0\n");

    const Outcome ap = run({"ap", "--in", f});
    EXPECT_EQ(ap.out, "ap_cost 10\ncycles 1\ncycle 0 1 2\n");

    const Outcome bb = run({"backbone", "--in", f, "--enumerate"});
    EXPECT_EQ(bb.out, "optimal_cost 10\nbackbone_arcs 3\nfraction 1\narc 0 1\narc 1 2\narc 2 0\noptima_count 1\n");
}

TEST_F(Cli, BackboneOfTwoPairs) {
    const std::string f = write("p.atsp", "ATSP 4 6 0 0.778\n-1 0 5 5\n0 -1 5 5\n5 5 -1 0\n5 5 0 -1\n");
    const Outcome ap = run({"ap", "--in", f});
    EXPECT_EQ(ap.out, "ap_cost 0\ncycles 2\ncycle 0 1\ncycle 2 3\n");
    const Outcome bb = run({"backbone", "--in", f, "--enumerate"});
    EXPECT_EQ(bb.code, 0);
    EXPECT_EQ(bb.out, "optimal_cost 10\nbackbone_arcs 0\nfraction 0\noptima_count 4\n");
    const Outcome capped = run({"backbone", "--in", f, "--enumerate", "--cap", "2"});
    EXPECT_NE(capped.out.find("optima_count 2 saturated"), std::string::npos);
    EXPECT_NE(run({"backbone", "--in", f}).out.find("optima_count unknown"), std::string::npos);
}

TEST_F(Cli, JsonOutputRoundTrips) {
    ASSERT_EQ(run({"gen", "--n", "30", "--digits", "3", "--seed", "1", "--out", path("j.atsp")}).code, 0);
    const Outcome r = run({"solve", "--in", path("j.atsp"), "--json"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::ordered_json::parse(r.out);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys, (std::vector<std::string>{"n", "R", "b", "cost", "tour", "ap_cost", "ap_calls", "nodes_expanded",
                                              "wall_ms"}));
    EXPECT_EQ(j.dump() + "\n", r.out);
    EXPECT_EQ(j["n"], 30);
    EXPECT_EQ(j["R"], 1000);
    EXPECT_EQ(j["tour"].size(), 30u);
    EXPECT_LE(j["ap_cost"].get<long long>(), j["cost"].get<long long>());

    const Outcome text = run({"solve", "--in", path("j.atsp")});
    EXPECT_EQ(text.out.substr(0, text.out.find('\n')), "cost " + std::to_string(j["cost"].get<long long>()));
}

TEST_F(Cli, UsageErrorsExitWithOne) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"solve"}).code, 1);
    EXPECT_EQ(run({"gen", "--n", "1", "--digits", "2", "--seed", "0", "--out", path("x")}).code, 1);
    EXPECT_EQ(run({"gen", "--n", "5", "--digits", "-1", "--seed", "0", "--out", path("x")}).code, 1);
    EXPECT_EQ(run({"gen", "--n", "five", "--digits", "1", "--seed", "0", "--out", path("x")}).code, 1);
    const std::vector<std::string> sweep{"sweep", "--sizes", "5", "--instances", "2", "--seed", "0", "--out",
                                         path("s.csv")};
    auto bad_grid = sweep;
    bad_grid.insert(bad_grid.end(), {"--digits", "1:2", "--measures", "rho"});
    EXPECT_EQ(run(bad_grid).code, 1);
    auto bad_measure = sweep;
    bad_measure.insert(bad_measure.end(), {"--digits", "1:2:0.5", "--measures", "rho,bogus"});
    const Outcome r = run(bad_measure);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("bogus"), std::string::npos);
    auto bad_sizes = sweep;
    bad_sizes[2] = "5,x";
    bad_sizes.insert(bad_sizes.end(), {"--digits", "1:2:0.5", "--measures", "rho"});
    EXPECT_EQ(run(bad_sizes).code, 1);
    EXPECT_EQ(run({"crossover", "--in", path("none.csv"), "--measure", "bogus"}).code, 1);
}

TEST_F(Cli, RuntimeErrorsExitWithTwo) {
    const Outcome missing = run({"solve", "--in", path("missing.atsp")});
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("cannot open"), std::string::npos);
    const std::string bad = write("bad.atsp", "ATSP 3 10 0 1\n-1 1 2\n3 -1 4\n");
    const Outcome malformed = run({"solve", "--in", bad});
    EXPECT_EQ(malformed.code, 2);
    EXPECT_NE(malformed.err.find("malformed instance file"), std::string::npos);
    EXPECT_EQ(run({"ap", "--in", bad}).code, 2);
    EXPECT_EQ(run({"rescale", "--in", path("none.csv"), "--beta-c", "1", "--out", path("o.csv")}).code, 2);
}

TEST_F(Cli, SweepRescaleCrossover) {
    const Outcome s = run({"sweep", "--sizes", "6,10", "--digits", "0.5:2:0.5", "--instances", "5", "--seed", "4",
                       "--measures", "p_ap_eq_atsp,rho", "--out", path("s.csv"), "--workers", "2"});
    ASSERT_EQ(s.code, 0) << s.err;
    const std::string csv = slurp(path("s.csv"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "n,b,beta,count,p_ap_eq_atsp_mean,p_ap_eq_atsp_se,p_ap_eq_atsp_ci95,rho_mean,rho_se,rho_ci95");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);

    ASSERT_EQ(run({"sweep", "--sizes", "6,10", "--digits", "0.5:2:0.5", "--instances", "5", "--seed", "4",
                   "--measures", "p_ap_eq_atsp,rho", "--out", path("s1.csv"), "--workers", "1"})
                  .code,
              0);
    EXPECT_EQ(slurp(path("s1.csv")), csv);

    ASSERT_EQ(run({"rescale", "--in", path("s.csv"), "--beta-c", "1", "--out", path("r.csv")}).code, 0);
    const std::string rescaled = slurp(path("r.csv"));
    EXPECT_NE(rescaled.find(",x\n"), std::string::npos);

    const std::string fixture = write("c.csv",
                                      "n,b,beta,count,p_ap_eq_atsp_mean\n"
                                      "100,2,1,10,0.1\n100,2.4,1.2,10,0.5\n100,2.8,1.4,10,0.9\n"
                                      "200,2.3,1,10,0.0\n200,2.76,1.2,10,0.5\n200,3.22,1.4,10,1.0\n");
    const Outcome c = run({"crossover", "--in", fixture, "--measure", "p_ap_eq_atsp"});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_EQ(c.out, "beta_c 1.2\nspread 0\npair 100 200 1.2\n");
}
