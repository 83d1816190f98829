#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "idcnn/metrics.hpp"
#include "idcnn/netpbm.hpp"

namespace fs = std::filesystem;
using namespace idcnn;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(IDCNN_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("idcnn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        ColorImage img(48, 48);
        for (std::size_t y = 0; y < 48; ++y)
            for (std::size_t x = 0; x < 48; ++x)
                for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<std::uint8_t>(3 * x + 2 * y + 40 * c);
        clean = dir / "clean.ppm";
        save_ppm(img, clean);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return (dir / name).string(); }

    fs::path dir, clean;
};

} // namespace

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("corrupt --in " + clean.string()), 1);
    EXPECT_EQ(run("corrupt --in missing.ppm --out x.ppm --map x.pgm"), 2);
    EXPECT_EQ(run("corrupt --in " + clean.string() + " --out " + p("n.ppm") + " --map " + p("m.pgm") + " --rho 2"), 1);
    EXPECT_EQ(run("denoise --in " + clean.string() + " --model " + p("nope.ckpt") + " --out " + p("r.ppm")), 2);
    EXPECT_EQ(run("verify --inject-fault conv-weight-grad-doubled"), 3);
}

TEST_F(Cli, CorruptRhoZeroAndDeterminism) {
    ASSERT_EQ(run("corrupt --in " + clean.string() + " --out " + p("z.ppm") + " --map " + p("z.pgm") + " --rho 0"), 0);
    EXPECT_EQ(slurp(p("z.ppm")), slurp(clean));
    ASSERT_EQ(run("corrupt --in " + clean.string() + " --out " + p("a.ppm") + " --map " + p("a.pgm") + " --seed 9"), 0);
    ASSERT_EQ(run("corrupt --in " + clean.string() + " --out " + p("b.ppm") + " --map " + p("b.pgm") + " --seed 9"), 0);
    EXPECT_EQ(slurp(p("a.ppm")), slurp(p("b.ppm")));
    EXPECT_EQ(slurp(p("a.pgm")), slurp(p("b.pgm")));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
    {
        std::ofstream cfg(p("run.cfg"));
        cfg << "# noise settings\nrho=1\nseed=4\n";
    }
    ASSERT_EQ(run("corrupt --in " + clean.string() + " --out " + p("n.ppm") + " --map " + p("m.pgm") + " --config " + p("run.cfg")), 0);
    EXPECT_EQ(count_flagged(load_map_pgm(p("m.pgm"))), 48u * 48u);
    ASSERT_EQ(run("corrupt --in " + clean.string() + " --out " + p("n.ppm") + " --map " + p("m.pgm") + " --config " + p("run.cfg") + " --rho 0"), 0);
    EXPECT_EQ(count_flagged(load_map_pgm(p("m.pgm"))), 0u);
    EXPECT_NE(slurp(p("n.ppm.cfg")).find("rho=0"), std::string::npos);
}

TEST_F(Cli, OracleDenoiseAndEvaluate) {
    ASSERT_EQ(run("corrupt --in " + clean.string() + " --out " + p("n.ppm") + " --map " + p("m.pgm") + " --seed 3"), 0);
    ASSERT_EQ(run("denoise --in " + p("n.ppm") + " --oracle-map " + p("m.pgm") + " --out " + p("r.ppm") + " --map-out " + p("e.pgm")), 0);
    EXPECT_EQ(slurp(p("e.pgm")), slurp(p("m.pgm")));
    ASSERT_EQ(run("evaluate --clean " + clean.string() + " --restored " + p("r.ppm") + " --truth " + p("m.pgm") +
                  " --estimate " + p("e.pgm") + " --csv " + p("eval.csv")),
              0);
    const auto csv = slurp(p("eval.csv"));
    EXPECT_EQ(csv.rfind("# ", 0), 0u);
    const auto row = csv.substr(csv.find("\nr,") + 1);
    const auto a = load_ppm(clean), b = load_ppm(p("r.ppm"));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", psnr(a, b));
    EXPECT_NE(row.find(std::string(",") + buf + ","), std::string::npos) << row;
    EXPECT_EQ(row.rfind("r,1,0,0,", 0), 0u) << row;
}

TEST_F(Cli, PerfectRestorationReportsInfinity) {
    ASSERT_EQ(run("corrupt --in " + clean.string() + " --out " + p("n.ppm") + " --map " + p("m.pgm") + " --rho 0"), 0);
    ASSERT_EQ(run("evaluate --clean " + clean.string() + " --restored " + clean.string() + " --truth " + p("m.pgm") +
                  " --estimate " + p("m.pgm") + " --csv " + p("eval.csv")),
              0);
    const auto csv = slurp(p("eval.csv"));
    EXPECT_NE(csv.find("clean,1,0,0,inf,0,1,0,0,0,0"), std::string::npos) << csv;
}

TEST_F(Cli, BatchEvaluateAddsMeanRow) {
    for (const char* d : {"c", "r", "t", "e"}) fs::create_directories(dir / d);
    for (const char* name : {"one", "two"}) {
        fs::copy_file(clean, dir / "c" / (std::string(name) + ".ppm"));
        ASSERT_EQ(run("corrupt --in " + clean.string() + " --out " + p(std::string("r/") + name + ".ppm") + " --map " +
                      p(std::string("t/") + name + ".pgm") + " --seed " + (name[0] == 'o' ? "1" : "2")),
                  0);
        fs::copy_file(dir / "t" / (std::string(name) + ".pgm"), dir / "e" / (std::string(name) + ".pgm"));
    }
    ASSERT_EQ(run("evaluate --clean-dir " + p("c") + " --restored-dir " + p("r") + " --truth-dir " + p("t") +
                  " --estimate-dir " + p("e") + " --csv " + p("batch.csv")),
              0);
    const auto csv = slurp(p("batch.csv"));
    EXPECT_NE(csv.find("\none,"), std::string::npos);
    EXPECT_NE(csv.find("\ntwo,"), std::string::npos);
    EXPECT_NE(csv.find("\nmean,1,0,0,"), std::string::npos) << csv;
}

TEST_F(Cli, TrainResumeDenoise) {
    fs::create_directories(dir / "data");
    fs::copy_file(clean, dir / "data" / "img.ppm");
    const std::string common = " --data " + p("data") + " --depth 3 --filters 2 --batch-size 4 --patch-size 21 --seed 2";
    ASSERT_EQ(run("train" + common + " --epochs 2 --out " + p("full.ckpt")), 0);
    ASSERT_EQ(run("train" + common + " --epochs 1 --out " + p("part.ckpt")), 0);
    ASSERT_EQ(run("train" + common + " --epochs 2 --resume " + p("part.ckpt") + " --out " + p("resumed.ckpt")), 0);
    EXPECT_EQ(slurp(p("full.ckpt")), slurp(p("resumed.ckpt")));
    EXPECT_EQ(slurp(p("full.ckpt.loss.csv")), slurp(p("resumed.ckpt.loss.csv")));
    ASSERT_EQ(run("denoise --in " + clean.string() + " --model " + p("full.ckpt") + " --out " + p("d.ppm") +
                  " --map-out " + p("d.pgm") + " --prob-out " + p("d16.pgm")),
              0);
    EXPECT_EQ(load_probability_pgm(p("d16.pgm")).width(), 48u);
    {
        std::ofstream bad(p("bad.ckpt"), std::ios::binary);
        bad << "IDCNNCKP garbage";
    }
    EXPECT_EQ(run("denoise --in " + clean.string() + " --model " + p("bad.ckpt") + " --out " + p("x.ppm")), 2);
}

TEST_F(Cli, SweepWritesOneRowPerValue) {
    fs::create_directories(dir / "data");
    fs::create_directories(dir / "test");
    fs::copy_file(clean, dir / "data" / "img.ppm");
    fs::copy_file(clean, dir / "test" / "img.ppm");
    ASSERT_EQ(run("sweep --axis rho --values 0.2 0.4 --data " + p("data") + " --test " + p("test") + " --work " +
                  p("sw") + " --train-arg=--epochs=1 --train-arg=--depth=3 --train-arg=--filters=2" +
                  " --train-arg=--patch-size=21"),
              0);
    const auto csv = slurp(p("sw/sweep.csv"));
    EXPECT_NE(csv.find("\naxis,value,wacc,"), std::string::npos) << csv;
    EXPECT_NE(csv.find("\nrho,0.2,"), std::string::npos) << csv;
    EXPECT_NE(csv.find("\nrho,0.4,"), std::string::npos) << csv;
    EXPECT_TRUE(fs::exists(dir / "sw" / "rho_0.4" / "model.ckpt"));
    EXPECT_EQ(run("sweep --axis depth --values 3 --data " + p("data") + " --test " + p("test") + " --work " + p("sw2")), 1);
}
