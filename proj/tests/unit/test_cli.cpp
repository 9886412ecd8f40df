#include "cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using bgidx::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("bgidx_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const char* kConfig = R"({
  "schema_version": 1,
  "model": {
    "volatility": {"type": "constant", "sigma": 0.2},
    "components": [
      {"beta": 1.25, "tail_intensity": 40.0},
      {"beta": 0.6, "tail_intensity": 5.0}
    ]
  },
  "sampling": {"delta_seconds": 1.0, "n": 40000},
  "preliminary": {"j": 2, "threshold": {"rule": "practical", "alpha": 7.0, "eta": 0.04}},
  "contrast": {"multistarts": 2},
  "replicates": 1,
  "seed": 31
})";

}  // namespace

TEST(Cli, RatesTable) {
    const auto r = call({"rates", "--beta1", "1.0", "--beta2", "0.75"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("0.125"), std::string::npos);
    EXPECT_NE(r.out.find("1/8"), std::string::npos);
    EXPECT_NE(r.out.find("2/3"), std::string::npos);
    const auto j = call({"rates", "--beta1", "3/2", "--beta2", "1", "--format", "json"});
    ASSERT_EQ(j.code, 0) << j.err;
    EXPECT_NO_THROW((void)nlohmann::json::parse(j.out));
}

TEST(Cli, FisherSmallLadder) {
    const auto r = call({"fisher", "--deltas", "1e-2,1e-3", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_FALSE(j.empty());
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(call({"montecarlo", "--config", "/nonexistent/x.json"}).code, bgidx::cli::kExitConfig);
    EXPECT_EQ(call({"frobnicate"}).code, bgidx::cli::kExitConfig);
    EXPECT_EQ(call({"--help"}).code, bgidx::cli::kExitOk);
    EXPECT_EQ(call({"rates", "--beta1", "1.0", "--beta2", "1.5"}).code, bgidx::cli::kExitConfig);
}

TEST(Cli, MalformedConfigReportsLine) {
    TempDir dir;
    const auto path = dir.file("bad.json");
    write(path, "{\n  \"schema_version\": 1,\n  \"model\": {,\n}\n");
    const auto r = call({"montecarlo", "--config", path});
    EXPECT_EQ(r.code, bgidx::cli::kExitConfig);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(Cli, SimulateThenEstimateMatchesMonteCarloRowZero) {
    TempDir dir;
    const auto cfg = dir.file("c.json");
    write(cfg, kConfig);
    const auto bin = dir.file("x.bin");
    ASSERT_EQ(call({"simulate", "--config", cfg, "--out", bin}).code, 0);
    const auto est = call({"estimate", "--config", cfg, "--in", bin, "--format", "json"});
    ASSERT_EQ(est.code, 0) << est.err;
    const auto mc = call({"montecarlo", "--config", cfg, "--format", "json"});
    ASSERT_EQ(mc.code, 0) << mc.err;
    const auto a = nlohmann::json::parse(est.out);
    const auto b = nlohmann::json::parse(mc.out)["replicates"][0];
    EXPECT_EQ(a["n"].get<std::size_t>(), 40000u);
    EXPECT_EQ(a["preliminary"], b["preliminary"]);
    EXPECT_EQ(a["final"], b["final"]);
}

TEST(Cli, SeedOverrideChangesThePath) {
    TempDir dir;
    const auto cfg = dir.file("c.json");
    write(cfg, kConfig);
    ASSERT_EQ(call({"simulate", "--config", cfg, "--out", dir.file("a.bin")}).code, 0);
    ASSERT_EQ(call({"simulate", "--config", cfg, "--seed", "32", "--out", dir.file("b.bin")}).code, 0);
    ASSERT_EQ(call({"simulate", "--config", cfg, "--out", dir.file("c.bin")}).code, 0);
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    EXPECT_NE(slurp(dir.file("a.bin")), slurp(dir.file("b.bin")));
    EXPECT_EQ(slurp(dir.file("a.bin")), slurp(dir.file("c.bin")));
}
