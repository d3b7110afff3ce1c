#include <doctest.h>

#include <stdexcept>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "snapff/config.hpp"
#include "snapff/experiment.hpp"

using namespace snapff;
namespace fs = std::filesystem;

namespace {

struct temp_dir {
    fs::path path;
    explicit temp_dir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~temp_dir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string sub(const std::string& n) const { return (path / n).string(); }
};

struct cli_result {
    int code;
    std::string out;
    std::string err;
};

cli_result run(std::vector<std::string> args) {
    args.insert(args.begin(), "snapff");
    std::ostringstream out, err;
    auto* oldout = std::cout.rdbuf(out.rdbuf());
    auto* olderr = std::cerr.rdbuf(err.rdbuf());
    int code = -1;
    try {
        code = run_cli(args);
    } catch (...) {
        std::cout.rdbuf(oldout);
        std::cerr.rdbuf(olderr);
        throw;
    }
    std::cout.rdbuf(oldout);
    std::cerr.rdbuf(olderr);
    return {code, out.str(), err.str()};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(static_cast<bool>(out));
    out << text;
}

}  // namespace

TEST_CASE("config parser handles sections, comments and bare keys") {
    auto c = config_map::parse_string(
        "top = 1\n"
        "# full-line comment\n"
        "[beam]\n"
        "mass = 2.5   # trailing comment\n"
        "  length=0.75\n"
        "\n"
        "[ train ]\n"
        "positions = 0.1, 0.2\n");
    CHECK(c.has("top"));
    CHECK(c.get_double("top", 0.0) == 1.0);
    CHECK(c.get_double("beam.mass", 0.0) == 2.5);
    CHECK(c.get_double("beam.length", 0.0) == 0.75);
    CHECK(c.has("train.positions"));
    CHECK_FALSE(c.has("beam.zeta"));
    // later assignments win
    auto c2 = config_map::parse_string("a = 1\na = 2\n");
    CHECK(c2.get_double("a", 0.0) == 2.0);
}

TEST_CASE("config parser reports the origin and line of syntax errors") {
    CHECK_THROWS_WITH_AS(config_map::parse_string("ok = 1\n[beam\n", "exp.ini"),
                         doctest::Contains("exp.ini:2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(config_map::parse_string("a = 1\nb = 2\nnot a pair\n", "exp.ini"),
                         doctest::Contains("exp.ini:3"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(config_map::parse_string("= 3\n", "exp.ini"),
                         doctest::Contains("empty key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(config_map::parse_file("/nonexistent/snapff.ini"),
                         doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("typed getters validate their values") {
    auto c = config_map::parse_string(
        "d = 3.25\n"
        "i = 7\n"
        "bad = fast\n"
        "half = 2.5\n"
        "neg = -3\n"
        "list = 0.1 , 0.2,0.3\n"
        "blank =\n");
    CHECK(c.get_double("d", 0.0) == 3.25);
    CHECK(c.get_double("missing", -1.5) == -1.5);
    CHECK(c.get_int("i", 0) == 7);
    CHECK(c.get_unsigned("i", 0) == 7u);
    CHECK(c.get_string("missing", "def") == "def");
    CHECK_THROWS_WITH_AS(c.get_double("bad", 0.0), doctest::Contains("non-numeric"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(c.get_int("half", 0), doctest::Contains("integer"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(c.get_unsigned("neg", 0), doctest::Contains(">= 0"),
                         std::invalid_argument);
    auto lst = c.get_double_list("list", {});
    REQUIRE(lst.size() == 3);
    CHECK(lst[0] == 0.1);
    CHECK(lst[1] == 0.2);
    CHECK(lst[2] == 0.3);
    auto def = c.get_double_list("missing", {1.0, 2.0});
    CHECK(def.size() == 2);
    CHECK_THROWS_WITH_AS(c.get_double_list("blank", {}), doctest::Contains("empty list"),
                         std::invalid_argument);
}

TEST_CASE("experiment_config overrides only the keys present") {
    auto c = config_map::parse_string(
        "[beam]\n"
        "f1_hz = 120\n"
        "[ilc]\n"
        "trials = 9\n"
        "[train]\n"
        "positions = 0.1, 0.2\n"
        "[output]\n"
        "dir = somewhere\n");
    auto e = experiment_config::from(c);
    CHECK(e.beam.f1_hz == 120.0);
    CHECK(e.trials == 9);
    REQUIRE(e.train_positions.size() == 2);
    CHECK(e.train_positions[1] == 0.2);
    CHECK(e.out_dir == "somewhere");
    // untouched keys keep the benchmark defaults
    CHECK(e.beam.mass == 1.0);
    CHECK(e.beam.ts == 1.0 / 4000.0);
    CHECK(e.bandwidth_hz == 4.0);
    CHECK(e.motion.distance == 0.1);
    CHECK(e.w_f_rel == 1e-8);
    CHECK(e.nominal_position == 0.25);
    CHECK(e.eval_positions.size() == 5);
    CHECK(e.gp_starts == 16);
    CHECK(e.gp_seed == 12345u);
}

TEST_CASE("horizon appends the settling tail") {
    experiment_config e;
    CHECK(e.horizon(1501) == 2101);  // 0.15 s tail at 4 kHz
    e.tail_s = 0.0;
    CHECK(e.horizon(1501) == 1501);
}

TEST_CASE("position tags are zero-padded millimetres") {
    CHECK(position_tag_mm(0.010) == "010");
    CHECK(position_tag_mm(0.030) == "030");
    CHECK(position_tag_mm(0.248) == "248");
    CHECK(position_tag_mm(0.25) == "250");
    CHECK(position_tag_mm(0.49) == "490");
}

TEST_CASE("g17 formatting round-trips doubles exactly") {
    for (double v : {1.0 / 3.0, 0.1, -7.25, 1e-300, 6.02214076e23, 0.0, 2.5e-16})
        CHECK(std::strtod(format_g17(v).c_str(), nullptr) == v);
}

TEST_CASE("plan writes the trajectory table") {
    temp_dir dir("snapff_cli_plan");
    auto res = run({"plan", "--out", dir.sub("out")});
    CHECK(res.code == 0);
    CHECK(res.out.find("planned move") != std::string::npos);
    auto text = read_file(dir.sub("out") + "/trajectory.csv");
    CHECK(first_line(text) == "k,t,pos,vel,acc,jerk,snap");
    CHECK(count_lines(text) == 1502);  // header + 1501 samples
}

TEST_CASE("cli reports bad arguments and missing inputs") {
    temp_dir dir("snapff_cli_errors");
    CHECK(run({"train", "--bogus"}).code != 0);
    CHECK(run({}).code != 0);  // a subcommand is required

    auto res = run({"train", "--config", dir.sub("missing.ini")});
    CHECK(res.code == 1);
    CHECK(res.err.find("cannot open") != std::string::npos);

    res = run({"fit", "--out", dir.sub("empty")});
    CHECK(res.code == 1);
    CHECK(res.err.find("run the train command first") != std::string::npos);

    res = run({"evaluate", "--out", dir.sub("empty")});
    CHECK(res.code == 1);
    CHECK(res.err.find("gp_model.txt") != std::string::npos);

    res = run({"bode", "--out", dir.sub("out"), "--positions", "0.1,bogus"});
    CHECK(res.code == 1);
    CHECK(res.err.find("bad position value") != std::string::npos);
}

TEST_CASE("bode writes one file per requested position") {
    temp_dir dir("snapff_cli_bode");
    auto res = run({"bode", "--out", dir.sub("out"), "--positions", "250,30", "--mm"});
    CHECK(res.code == 0);
    for (const char* name : {"bode_250mm.csv", "bode_030mm.csv"}) {
        auto text = read_file(dir.sub("out") + "/" + name);
        CHECK(first_line(text) == "freq_hz,mag,phase_rad");
        CHECK(count_lines(text) == 201);  // header + 200 frequency points
    }
}

TEST_CASE("train/fit/evaluate pipeline produces the full artifact set") {
    temp_dir dir("snapff_cli_pipeline");
    std::string out = dir.sub("out");
    std::string ini = dir.sub("exp.ini");
    write_file(ini,
               "[ilc]\n"
               "trials = 2\n"
               "[train]\n"
               "positions = 0.13, 0.25, 0.37\n"
               "[evaluate]\n"
               "positions = 0.2, 0.3\n"
               "trace_position = 0.2\n"
               "[gp]\n"
               "starts = 2\n"
               "evals_per_start = 60\n"
               "[output]\n"
               "dir = " + out + "\n");

    // --trials overrides the config (separate output dir, checked via history rows)
    auto res = run({"train", "--config", ini, "--trials", "3", "--out", dir.sub("out3")});
    CHECK(res.code == 0);
    CHECK(count_lines(read_file(dir.sub("out3") + "/ilc_history_130mm.csv")) == 4);

    res = run({"train", "--config", ini});
    CHECK(res.code == 0);
    CHECK(res.out.find("rho=0.13") != std::string::npos);
    auto targets = read_file(out + "/training_targets.csv");
    CHECK(first_line(targets) == "rho,delta,mhat");
    CHECK(count_lines(targets) == 4);
    for (const char* name :
         {"ilc_history_130mm.csv", "ilc_history_250mm.csv", "ilc_history_370mm.csv"}) {
        auto text = read_file(out + "/" + name);
        CHECK(first_line(text) == "trial,norm_e,norm_f,theta_acc,theta_snap");
        CHECK(count_lines(text) == 3);
    }

    res = run({"fit", "--config", ini});
    CHECK(res.code == 0);
    CHECK(res.out.find("gp fit:") != std::string::npos);
    CHECK(first_line(read_file(out + "/gp_model.txt")) == "snapff-gp-model-v1");
    auto curve = read_file(out + "/gp_curve.csv");
    CHECK(first_line(curve) == "rho,mean,var");
    CHECK(count_lines(curve) == 302);

    res = run({"evaluate", "--config", ini});
    CHECK(res.code == 0);
    CHECK(res.out.find("fixed/gp") != std::string::npos);
    auto cmp = read_file(out + "/comparison.csv");
    CHECK(first_line(cmp).rfind("# nominal_mass = ", 0) == 0);
    CHECK(cmp.find("\n# nominal_snap = ") != std::string::npos);
    CHECK(cmp.find("rho,delta_gp,norm_gp,norm_pi,norm_acc,max_gp,max_pi,max_acc") !=
          std::string::npos);
    CHECK(count_lines(cmp) == 5);  // 2 comments + header + 2 rows
    auto trace = read_file(out + "/error_trace_200mm.csv");
    CHECK(first_line(trace) == "k,t,e_gp,e_pi,e_acc");
    CHECK(count_lines(trace) == 2102);  // header + lifted horizon

    // positions outside the training hull are flagged on stdout
    res = run({"evaluate", "--config", ini, "--positions", "50", "--mm"});
    CHECK(res.code == 0);
    CHECK(res.out.find("outside the training hull") != std::string::npos);
}

TEST_CASE("pipeline outputs are bit-identical across reruns") {
    temp_dir dir("snapff_cli_determinism");
    std::string ini = dir.sub("exp.ini");
    write_file(ini,
               "[ilc]\n"
               "trials = 2\n"
               "[train]\n"
               "positions = 0.13, 0.25, 0.37\n"
               "[gp]\n"
               "starts = 2\n"
               "evals_per_start = 60\n");
    for (const char* sub : {"a", "b"}) {
        CHECK(run({"train", "--config", ini, "--out", dir.sub(sub)}).code == 0);
        CHECK(run({"fit", "--config", ini, "--out", dir.sub(sub)}).code == 0);
    }
    CHECK(read_file(dir.sub("a") + "/training_targets.csv") ==
          read_file(dir.sub("b") + "/training_targets.csv"));
    CHECK(read_file(dir.sub("a") + "/gp_model.txt") == read_file(dir.sub("b") + "/gp_model.txt"));
}
