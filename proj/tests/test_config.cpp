#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "choquard/config.hpp"
#include "choquard/report.hpp"

using namespace choquard;

TEST_CASE("toml subset parser", "[config]") {
    SECTION("scalars, sections, comments") {
        const auto t = toml::parse(
            "# leading comment\n"
            "top = 3\n"
            "[problem]\n"
            "dim = 3          # trailing comment\n"
            "alpha = 1.5\n"
            "flag = true\n"
            "name = \"model\"\n"
            "neg = -2.5e-3\n");
        REQUIRE(t.at("top").as_int() == 3);
        REQUIRE(t.at("problem.dim").as_int() == 3);
        REQUIRE(t.at("problem.alpha").as_double() == 1.5);
        REQUIRE(t.at("problem.flag").as_bool());
        REQUIRE(t.at("problem.name").as_string() == "model");
        REQUIRE(t.at("problem.neg").as_double() == -2.5e-3);
    }
    SECTION("arrays") {
        const auto t = toml::parse("xs = [1, 2.5, 3]\nys = []\nss = [\"a\", \"b\"]\n");
        const auto xs = t.at("xs").as_double_array();
        REQUIRE(xs == std::vector<double>{1.0, 2.5, 3.0});
        REQUIRE(t.at("ys").arr.empty());
        REQUIRE(t.at("ss").arr.at(1).as_string() == "b");
    }
    SECTION("string escapes") {
        const auto t = toml::parse("s = \"a\\\"b\\\\c\\n\"\n");
        REQUIRE(t.at("s").as_string() == "a\"b\\c\n");
    }
    SECTION("integers keep their type") {
        const auto t = toml::parse("i = 7\nf = 7.0\n");
        REQUIRE(t.at("i").kind == toml::Value::Kind::Int);
        REQUIRE(t.at("f").kind == toml::Value::Kind::Float);
        REQUIRE(t.at("i").as_double() == 7.0);  // promotion allowed
        REQUIRE_THROWS(t.at("f").as_int());     // demotion is not
    }
    SECTION("malformed input is rejected with a line number") {
        for (const char* bad : {
                 "x 3\n",                 // missing '='
                 "x = \n",                // missing value
                 "x = \"abc\n",           // unterminated string
                 "x = [1, 2\n",           // unterminated array
                 "x = 1 y\n",             // trailing junk
                 "[a\n",                  // unterminated header
                 "x = 1\nx = 2\n",        // duplicate key
                 "x = 1..2\n",            // bad number
                 "x = truey\n",           // not a bool, not a number
             }) {
            INFO(bad);
            REQUIRE_THROWS_AS(toml::parse(bad), std::runtime_error);
        }
        try {
            toml::parse("ok = 1\nbad =\n");
            FAIL("expected a throw");
        } catch (const std::runtime_error& e) {
            REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
}

TEST_CASE("config mapping and validation", "[config]") {
    SECTION("defaults from an empty table") {
        const ExperimentConfig cfg = make_config({});
        REQUIRE(cfg.params.dim == 3);
        REQUIRE(cfg.params.alpha == 1.0);
        REQUIRE(cfg.grid.n == 2000);
        REQUIRE(cfg.potential.family == "model");
        REQUIRE(cfg.scan.lambdas.size() == 11);  // powers of two, 2^-2 .. 2^8
        REQUIRE(cfg.scan.lambdas.front() == 0.25);
        REQUIRE(cfg.scan.lambdas.back() == 256.0);
        REQUIRE(cfg.sweep.threshold_margin == 0.05);
    }
    SECTION("full mapping") {
        const ExperimentConfig cfg = make_config(toml::parse(
            "[problem]\ndim = 4\nalpha = 2.0\n"
            "[grid]\nr_max = 25.0\nn = 500\ngrading = 1.5\n"
            "[potential]\nfamily = \"constant\"\nc = 1.0\n"
            "[solver]\nmax_iters = 99\ngrad_tol = 1e-5\ninit = \"gaussian\"\nsigma0 = 2.0\n"
            "precondition = false\n"
            "[sweep]\nmu_values = [0.3, 0.9]\nthreshold_margin = 0.1\n"
            "[scan]\nlambdas = [1.0, 2.0]\n"
            "[cache]\ndir = \"/tmp/kc\"\n"));
        REQUIRE(cfg.params.dim == 4);
        REQUIRE(cfg.grid.n == 500);
        REQUIRE(cfg.grid.grading == 1.5);
        REQUIRE(cfg.potential.family == "constant");
        REQUIRE(cfg.solver.max_iters == 99);
        REQUIRE(cfg.solver.init == SolveOptions::Init::Gaussian);
        REQUIRE(cfg.solver.sigma0 == 2.0);
        REQUIRE_FALSE(cfg.solver.precondition);
        REQUIRE(cfg.sweep.mu_values == std::vector<double>{0.3, 0.9});
        REQUIRE(cfg.scan.lambdas == std::vector<double>{1.0, 2.0});
        REQUIRE(cfg.cache_dir == "/tmp/kc");
        const RadialGrid g = make_grid(cfg);
        REQUIRE(g.dim == 4);
        REQUIRE(g.size() == 500);
    }
    SECTION("unknown keys are rejected") {
        REQUIRE_THROWS_AS(make_config(toml::parse("[grid]\nnn = 100\n")), std::runtime_error);
        REQUIRE_THROWS_AS(make_config(toml::parse("typo = 1\n")), std::runtime_error);
    }
    SECTION("invalid values are rejected") {
        REQUIRE_THROWS(make_config(toml::parse("[grid]\nn = 3\n")));
        REQUIRE_THROWS(make_config(toml::parse("[grid]\ngrading = 0.5\n")));
        REQUIRE_THROWS(make_config(toml::parse("[potential]\nfamily = \"weird\"\n")));
        REQUIRE_THROWS(make_config(toml::parse("[potential]\nfamily = \"tabulated\"\n")));
        REQUIRE_THROWS(make_config(toml::parse("[solver]\ninit = \"plane\"\n")));
        REQUIRE_THROWS(make_config(toml::parse("[scan]\nlambdas = [1.0, -2.0]\n")));
        REQUIRE_THROWS(make_config(toml::parse("[problem]\ndim = 0\n")));
        REQUIRE_THROWS(make_config(toml::parse("[problem]\nalpha = 5.0\n")));
    }
    SECTION("potential factory from spec") {
        ExperimentConfig cfg = make_config(toml::parse("[potential]\nfamily = \"null\"\nlambda = 2.0\n"));
        const Potential V = make_potential(cfg);
        REQUIRE(V.family == Potential::Family::Null);
        REQUIRE(V.lambda == 2.0);
    }
}

TEST_CASE("config file round trip", "[config]") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "choquard_config_test";
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "run.toml");
        out << "[problem]\ndim = 3\nalpha = 0.5\n[grid]\nn = 300\n";
    }
    const ExperimentConfig cfg = load_config((dir / "run.toml").string());
    REQUIRE(cfg.params.alpha == 0.5);
    REQUIRE(cfg.grid.n == 300);
    REQUIRE(cfg.config_dir == dir.string());
    REQUIRE_THROWS(load_config((dir / "missing.toml").string()));
    fs::remove_all(dir);
}

TEST_CASE("report plumbing", "[config]") {
    SECTION("shortest round-trip number formatting") {
        for (double x : {0.1, 1.0 / 3.0, 2.1078147305108118, 1e-300, -42.0, 0.0}) {
            const std::string s = format_double(x);
            REQUIRE(std::stod(s) == x);
        }
    }
    SECTION("config echo nests dotted keys") {
        const auto t = toml::parse("top = 1\n[grid]\nn = 64\nr_max = 5.0\n");
        const nlohmann::json echo = config_echo(t);
        REQUIRE(echo["top"] == 1);
        REQUIRE(echo["grid"]["n"] == 64);
        REQUIRE(echo["grid"]["r_max"] == 5.0);
    }
    SECTION("csv table shape rules") {
        CsvTable t({"a", "b"});
        t.add_row({"1", "2"});
        REQUIRE_THROWS(t.add_row({"only-one"}));
        REQUIRE(t.body() == "a,b\n1,2\n");
        REQUIRE_THROWS(CsvTable({}));
    }
    SECTION("report skeleton carries schema tag and echo") {
        ExperimentConfig cfg = make_config(toml::parse("[problem]\ndim = 3\n"));
        const nlohmann::json rep = make_report(cfg, "solve");
        REQUIRE(rep["schema"] == k_report_schema);
        REQUIRE(rep["command"] == "solve");
        REQUIRE(rep["config"]["problem"]["dim"] == 3);
    }
}
