#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hygrid/run.hpp"
#include "support/cases.hpp"

using namespace hygrid;
using namespace hygrid::testing;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

size_t line_count(const std::string& text) {
    size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

fs::path tmp_dir() {
    const fs::path dir = fs::path(HYGRID_TEST_TMP) / "run_outputs";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("pf writes a voltage table and reports the residual") {
    RunConfig cfg;
    cfg.command = Command::Pf;
    cfg.grid_path = case_path("cigre_lv_hybrid.json");
    cfg.output_path = tmp_dir() / "pf.csv";
    REQUIRE(run(cfg) == kExitOk);

    const std::string text = slurp(cfg.output_path);
    CHECK(text.find("# residual_inf_norm:") != std::string::npos);
    CHECK(text.find("node,phase,re_pu,im_pu,mag_pu,angle_deg") != std::string::npos);
    // 18 AC nodes x 3 phases + 8 DC nodes + 2 comment lines + header.
    CHECK(line_count(text) == 18 * 3 + 8 + 3);
    // No stray temporary left behind.
    CHECK(!fs::exists(cfg.output_path.string() + ".tmp"));
}

TEST_CASE("sc writes one voltage and one current table with |X| blocks") {
    RunConfig cfg;
    cfg.command = Command::Sc;
    cfg.grid_path = case_path("cigre_lv_hybrid.json");
    cfg.output_path = tmp_dir() / "sc";
    REQUIRE(run(cfg) == kExitOk);

    const std::string volt = slurp(tmp_dir() / "sc_voltage.csv");
    // 90 controls x (18 nodes x 3 phases + 8 DC) rows + header.
    CHECK(line_count(volt) == 90u * (18 * 3 + 8) + 1);
    const std::string curr = slurp(tmp_dir() / "sc_current.csv");
    // 90 controls x (17 AC branches x 3 phases + 7 DC branches) + header.
    CHECK(line_count(curr) == 90u * (17 * 3 + 7) + 1);
}

TEST_CASE("identical inputs produce byte-identical outputs") {
    RunConfig cfg;
    cfg.command = Command::Sc;
    cfg.grid_path = case_path("cigre_lv_hybrid.json");
    cfg.output_path = tmp_dir() / "det1";
    REQUIRE(run(cfg) == kExitOk);
    cfg.output_path = tmp_dir() / "det2";
    REQUIRE(run(cfg) == kExitOk);
    CHECK(slurp(tmp_dir() / "det1_voltage.csv") == slurp(tmp_dir() / "det2_voltage.csv"));
    CHECK(slurp(tmp_dir() / "det1_current.csv") == slurp(tmp_dir() / "det2_current.csv"));
}

TEST_CASE("json format emits one structured document") {
    RunConfig cfg;
    cfg.command = Command::Sc;
    cfg.grid_path = case_path("cigre_lv_hybrid.json");
    cfg.output_path = tmp_dir() / "sc_doc";
    cfg.format = OutputFormat::Json;
    REQUIRE(run(cfg) == kExitOk);
    const std::string doc = slurp(tmp_dir() / "sc_doc.json");
    CHECK(doc.find("\"controls\"") != std::string::npos);
}

TEST_CASE("file and config errors map to distinct exit codes") {
    RunConfig cfg;
    cfg.command = Command::Pf;
    cfg.grid_path = "/nonexistent/grid.json";
    CHECK(run(cfg) == kExitFileError);

    cfg.grid_path = case_path("cigre_lv_hybrid.json");
    cfg.tolerance = 1.0;  // outside the sane range
    CHECK(run(cfg) == kExitBadConfig);

    cfg.tolerance = 1e-8;
    cfg.max_iterations = 1;  // cannot converge in one step
    CHECK(run(cfg) == kExitNonConvergence);
}

TEST_CASE("no partial output files on failure") {
    RunConfig cfg;
    cfg.command = Command::Pf;
    cfg.grid_path = case_path("cigre_lv_hybrid.json");
    cfg.output_path = tmp_dir() / "no_such_subdir" / "pf.csv";
    CHECK(run(cfg) != kExitOk);
    CHECK(!fs::exists(cfg.output_path));
}

TEST_CASE("validate prints a summary table shaped like the error table") {
    RunConfig cfg;
    cfg.command = Command::Validate;
    cfg.grid_path = case_path("cigre_lv_hybrid.json");
    cfg.output_path = tmp_dir() / "validate.csv";
    REQUIRE(run(cfg) == kExitOk);
    const std::string text = slurp(cfg.output_path);
    CHECK(text.find("x,node,phase,component,analytic,numeric,error") != std::string::npos);
    // Full X sweep: 90 controls x (54 AC entries x 2 components + 8 DC) + header.
    CHECK(line_count(text) == 90u * (18 * 3 * 2 + 8) + 1);
}
