#include "support.hpp"

#include "uotkit/cli.hpp"
#include "uotkit/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace uotkit;
using namespace testsupport;
using json = nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

json report(const Run& r) {
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return json::parse(r.out);
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

} // namespace

TEST_SUITE("cli") {
    TEST_CASE("usage errors exit 1 with help text") {
        const Run none = run({});
        CHECK(none.code == cli::exit_usage);
        const Run unknown = run({"frobnicate"});
        CHECK(unknown.code == cli::exit_usage);
        CHECK(unknown.err.find("uot-solve") != std::string::npos);
        CHECK(run({"tcyc"}).code == cli::exit_usage);
        CHECK(run({"uot-solve", "--cost", "x", "--p", "y", "--q", "z", "--tau", "abc"}).code == cli::exit_usage);
        const Run help = run({"--help"});
        CHECK(help.code == 0);
        CHECK(help.out.find("metrics") != std::string::npos);
    }

    TEST_CASE("uot-solve writes the plan and reports convergence") {
        TempDir dir("cli");
        Matrix c(2, 2);
        c << 0, 1, 1, 0;
        io::write_umat(c, dir / "c.umat");
        write_text(dir / "p.csv", "0.7\n0.3\n");
        write_text(dir / "q.csv", "0.4,0.6\n");
        const Run r = run({"uot-solve", "--cost", (dir / "c.umat").string(), "--p", (dir / "p.csv").string(), "--q",
                           (dir / "q.csv").string(), "--epsilon", "0.01", "--tau", "0.001", "--out",
                           (dir / "plan.umat").string()});
        const json j = report(r);
        CHECK(j["command"] == "uot-solve");
        CHECK(j["outputs"]["converged"] == true);
        CHECK(j["outputs"].contains("objective"));
        CHECK(j["parameters"]["tau"] == 0.001);
        CHECK(j["inputs"].size() == 3);
        CHECK(j["inputs"][0]["sha256"].get<std::string>().size() == 64);
        CHECK(!j.contains("wall_time"));
        const Matrix plan = io::read_umat(dir / "plan.umat");
        CHECK(plan.rows() == 2);
        CHECK(plan.sum() == doctest::Approx(j["outputs"]["plan_mass"].get<double>()).epsilon(1e-15));
    }

    TEST_CASE("tcyc reports the residual") {
        TempDir dir("cli");
        io::write_umat(0.5 * Matrix::Identity(2, 2), dir / "a.umat");
        io::write_umat(0.5 * Matrix::Identity(2, 2), dir / "b.umat");
        io::write_umat(Matrix::Zero(2, 2), dir / "d.umat");
        const json j = report(run({"tcyc", "--plan-hi", (dir / "a.umat").string(), "--plan-ii",
                                   (dir / "b.umat").string(), "--plan-direct", (dir / "d.umat").string()}));
        CHECK(j["outputs"]["residual"] == 0.125);
    }

    TEST_CASE("scalars carry 17 significant digits") {
        const Run r = run({"metrics", "ravg", "--rc", "0.1", "--rp", "0.2"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("0.15000000000000002") != std::string::npos);
        const Run t = run({"loss", "total", "--tcyc", "1"});
        CHECK(t.out.find("\"total\": 10000.0") != std::string::npos);
    }

    TEST_CASE("defaults report the configured constants") {
        const json j = report(run({"defaults"}));
        CHECK(j["outputs"]["lambda_tcyc"] == 10000.0);
        CHECK(j["outputs"]["lambda_cc"] == 10.0);
        CHECK(j["outputs"]["nce_temperature"] == 0.07);
        CHECK(j["outputs"]["uot_tau"] == 0.001);
        CHECK(j["outputs"]["fod_alpha"] == 2.0);
    }

    TEST_CASE("data and numerical failures map to exit codes 2 and 3") {
        TempDir dir("cli");
        CHECK(run({"tcyc", "--plan-hi", "/missing.umat", "--plan-ii", "/missing.umat", "--plan-direct",
                   "/missing.umat"})
                  .code == cli::exit_data);
        write_text(dir / "bad.umat", "XMAT and some bytes to make it long enough");
        CHECK(run({"tcyc", "--plan-hi", (dir / "bad.umat").string(), "--plan-ii", (dir / "bad.umat").string(),
                   "--plan-direct", (dir / "bad.umat").string()})
                  .code == cli::exit_data);
        write_text(dir / "flat.csv", "1,1,1\n");
        write_text(dir / "ramp.csv", "1,2,3\n");
        const Run flat = run({"metrics", "pearson-p", "--virtual", (dir / "flat.csv").string(), "--reference",
                              (dir / "ramp.csv").string()});
        CHECK(flat.code == cli::exit_numerical);
        CHECK(flat.err.find("undefined-correlation") != std::string::npos);
        CHECK(flat.out.empty());
    }

    TEST_CASE("UOTKIT_THREADS must be an integer") {
        ::setenv("UOTKIT_THREADS", "lots", 1);
        CHECK(run({"defaults"}).code == cli::exit_usage);
        ::setenv("UOTKIT_THREADS", "2", 1);
        CHECK(run({"defaults"}).code == 0);
        ::unsetenv("UOTKIT_THREADS");
    }

    TEST_CASE("fixtures, deconv, fod and odc work together") {
        TempDir dir("cli");
        const auto real = dir / "real";
        const auto fake = dir / "fake";
        for (int seed = 0; seed < 3; ++seed) {
            const std::string s = std::to_string(seed);
            REQUIRE(run({"fixtures", "make", "--seed", s, "--size", "32", "--out-dir", (dir / ("f" + s)).string()}).code == 0);
            std::filesystem::create_directories(real);
            std::filesystem::create_directories(fake);
            std::filesystem::copy_file(dir / ("f" + s) / "ihc_like.png", real / ("img" + s + ".png"));
            std::filesystem::copy_file(dir / ("f" + s) / "he_like.png", fake / ("img" + s + ".png"));
        }
        const json d = report(run({"deconv", "--image", (real / "img0.png").string(), "--out-dir", (dir / "d").string()}));
        CHECK(d["outputs"]["files"].size() == 3);
        const json f = report(run({"fod", "--od", (dir / "d" / "stain1.umat").string(), "--alpha", "3"}));
        CHECK(f["outputs"]["fod_sum"].get<double>() >= 0.0);
        const json o = report(run({"odc", "--real", real.string(), "--fake", fake.string(), "--out-dir", (dir / "o").string()}));
        CHECK(o["outputs"]["real_correlation"].size() == 3);
        CHECK(std::filesystem::exists(dir / "o" / "fake_corr.csv"));
        const json same = report(run({"odc", "--real", real.string(), "--fake", real.string()}));
        CHECK(same["outputs"]["loss"] == 0.0);
        const json pc = report(run({"metrics", "pearson-c", "--virtual", real.string(), "--reference", real.string()}));
        CHECK(pc["outputs"]["pearson_c"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
        const json id = report(run({"metrics", "iod", "--virtual", real.string(), "--reference", real.string()}));
        CHECK(id["outputs"]["iod"] == 0.0);
    }
}
