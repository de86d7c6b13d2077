#include "test_util.hpp"
#include "twr/cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace twr;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run twr_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "twr");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    CliTest() : dir_("cli") {}
    std::string file(const std::string& name) const { return dir_.file(name); }

    // Writes count tap-once traces and returns their paths.
    std::vector<std::string> taps(int count, int first_seed) const {
        std::vector<std::string> paths;
        for (int i = 0; i < count; ++i) {
            const auto path = file("tap" + std::to_string(first_seed + i) + ".csv");
            EXPECT_EQ(twr_cli({"gen", "tap-once", "--seed", std::to_string(first_seed + i), "--out", path}).code, 0);
            paths.push_back(path);
        }
        return paths;
    }

private:
    test::TempDir dir_;
};

} // namespace

TEST_F(CliTest, HelpAndUsageErrors) {
    EXPECT_EQ(twr_cli({"--help"}).code, cli::kSuccess);
    EXPECT_EQ(twr_cli({}).code, cli::kError);
    EXPECT_EQ(twr_cli({"frobnicate"}).code, cli::kError);
    EXPECT_EQ(twr_cli({"match", file("x.csv")}).code, cli::kError);
}

TEST_F(CliTest, TrainThenMatch) {
    auto args = std::vector<std::string>{"train"};
    for (const auto& p : taps(10, 1))
        args.push_back(p);
    for (const auto& s : {std::string("--template-id"), std::string("once"), std::string("--db"), file("db.json")})
        args.push_back(s);
    const auto train = twr_cli(args);
    ASSERT_EQ(train.code, 0) << train.err;
    EXPECT_NE(train.out.find("threshold="), std::string::npos);

    const auto hit = twr_cli({"match", taps(1, 50)[0], "--template-id", "once", "--db", file("db.json")});
    EXPECT_EQ(hit.code, cli::kSuccess) << hit.out;
    EXPECT_NE(hit.out.find("matched=true"), std::string::npos);

    ASSERT_EQ(twr_cli({"gen", "still", "--out", file("still.csv")}).code, 0);
    const auto miss = twr_cli({"match", file("still.csv"), "--template-id", "once", "--db", file("db.json")});
    EXPECT_EQ(miss.code, cli::kNegative);
    EXPECT_NE(miss.out.find("matched=false"), std::string::npos);

    EXPECT_EQ(twr_cli({"match", file("still.csv"), "--template-id", "nope", "--db", file("db.json")}).code,
              cli::kError);
}

TEST_F(CliTest, TrainNeedsTwoTraces) {
    const auto r = twr_cli({"train", taps(1, 1)[0], "--template-id", "t", "--db", file("db.json")});
    EXPECT_EQ(r.code, cli::kError);
    EXPECT_NE(r.err.find("at least 2"), std::string::npos);
}

TEST_F(CliTest, BadTraceReportsLine) {
    std::ofstream(file("bad.csv")) << "0,5\n10,1,2\n";
    const auto r = twr_cli({"prox-run", file("bad.csv")});
    EXPECT_EQ(r.code, cli::kError);
    EXPECT_NE(r.err.find("bad.csv:2: wrong column count"), std::string::npos) << r.err;
}

TEST_F(CliTest, ProxRunPrintsWindows) {
    std::ofstream(file("p.csv")) << "0,5\n200,0\n400,5\n600,0\n800,5\n1000,0\n1200,5\n5000,5\n";
    const auto r = twr_cli({"prox-run", file("p.csv")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "unlock,1200,2200\n");
    const auto strict = twr_cli({"prox-run", file("p.csv"), "--wave-time-limit-ms", "1000"});
    EXPECT_EQ(strict.out, "");
}

TEST_F(CliTest, DatabaseAdministration) {
    const auto db = file("db.json");
    ASSERT_EQ(twr_cli({"gen", "demo-db", "--out", db}).code, 0);
    const auto list = twr_cli({"db", "list", "--db", db});
    EXPECT_NE(list.out.find("service=nfc"), std::string::npos);
    EXPECT_NE(list.out.find("id=tap-once"), std::string::npos);

    EXPECT_EQ(twr_cli({"db", "add-policy", "--db", db, "--service", "cam", "--kind", "tap", "--template-id", "zz"}).code,
              cli::kError);
    EXPECT_EQ(twr_cli({"db", "add-policy", "--db", db, "--service", "cam", "--kind", "prox"}).code, 0);
    EXPECT_EQ(twr_cli({"db", "rm-template", "--db", db, "--template-id", "tap-once"}).code, cli::kError);
    EXPECT_EQ(twr_cli({"db", "rm-policy", "--db", db, "--service", "nfc"}).code, 0);
    EXPECT_EQ(twr_cli({"db", "rm-template", "--db", db, "--template-id", "tap-once"}).code, 0);

    const auto again = twr_cli({"db", "rm-policy", "--db", db, "--service", "nfc"});
    EXPECT_EQ(again.code, 0);
    EXPECT_NE(again.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, ReplayScenarios) {
    const auto db = file("db.json");
    ASSERT_EQ(twr_cli({"gen", "demo-db", "--out", db}).code, 0);
    for (const auto* kind : {"pickpocket", "legit-nfc", "legit-sms"}) {
        const auto scn = file(std::string(kind) + ".scn");
        ASSERT_EQ(twr_cli({"gen", kind, "--out", scn}).code, 0);
        const auto a = twr_cli({"replay", scn, "--db", db});
        EXPECT_EQ(a.code, 0) << a.out;
        EXPECT_NE(a.out.find("mismatches=0"), std::string::npos);
        EXPECT_EQ(a.out, twr_cli({"replay", scn, "--db", db}).out);
    }
    // Expecting a forward where none can happen is reported as a mismatch.
    std::ofstream(file("wrong.scn")) << "request: 100,app,nfc,FORWARD\n";
    const auto wrong = twr_cli({"replay", file("wrong.scn"), "--db", db});
    EXPECT_EQ(wrong.code, cli::kNegative);
    EXPECT_NE(wrong.out.find("mismatches=1"), std::string::npos);
}

TEST_F(CliTest, EvalPrintsMachineLines) {
    const auto r = twr_cli({"eval", "prox", "--traces", "20"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Tap-Wave-Rub,Walking,0,20,0"), std::string::npos) << r.out;
    EXPECT_EQ(twr_cli({"eval", "both"}).code, cli::kError);
}

TEST_F(CliTest, GenIsReproducible) {
    ASSERT_EQ(twr_cli({"gen", "walking", "--seed", "5", "--out", file("a.csv")}).code, 0);
    ASSERT_EQ(twr_cli({"gen", "walking", "--seed", "5", "--out", file("b.csv")}).code, 0);
    const auto read = [](const std::string& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    EXPECT_EQ(read(file("a.csv")), read(file("b.csv")));
    EXPECT_NE(read(file("a.csv")).find("rng=mt19937_64"), std::string::npos);
    EXPECT_EQ(twr_cli({"gen", "unicorn", "--out", file("c.csv")}).code, cli::kError);
}
