#include <doctest.h>

#include "hygrid/errors.hpp"
#include "hygrid/grid_io.hpp"
#include "support/cases.hpp"

using namespace hygrid;
using namespace hygrid::testing;

namespace {

const char* kTinyGrid = R"({
  "bases": {"power_w": 100000.0, "ac_voltage_v": 400.0, "dc_voltage_v": 800.0},
  "ac_nodes": [{"id": "N1", "role": "slack"}, {"id": "N2", "role": "pq"}],
  "dc_nodes": [{"id": "M1", "role": "v"}, {"id": "M2", "role": "p"}],
  "ac_branches": [{"from": "N1", "to": "N2", "unit": "ohm",
                   "z_self": {"re": 0.00533333333333, "im": 0.0106666666667},
                   "z_mutual": {"re": 0.0, "im": 0.0}}],
  "dc_branches": [{"from": "M1", "to": "M2", "unit": "ohm", "r": 0.64}],
  "ics": [],
  "setpoints": {
    "N2": {"p_w": [-500.0, -500.0, -500.0], "q_var": [0.0, 0.0, 0.0]},
    "M1": {"e_v": 808.0},
    "M2": {"p_w": -2000.0}
  }
})";

}  // namespace

TEST_CASE("SI quantities convert onto the declared bases") {
    const GridModel g = parse_grid(kTinyGrid);

    // 500 W on the 100 kW base is 0.005 p.u. per phase.
    CHECK(g.setpoints.ac_p[1](0) == doctest::Approx(-0.005).epsilon(1e-12));
    // 2 kW -> 0.02 p.u.; 808 V on the 800 V base -> 1.01 p.u.
    CHECK(g.setpoints.dc_p[1] == doctest::Approx(-0.02).epsilon(1e-12));
    CHECK(g.setpoints.dc_v[0] == doctest::Approx(1.01).epsilon(1e-12));
    // 0.64 ohm on Z_base_dc = 6.4 ohm -> r = 0.1 p.u. -> g = 10 p.u.
    CHECK(g.dc_branches[0].conductance == doctest::Approx(10.0).epsilon(1e-12));
    // Z_base_ac = (400/sqrt(3))^2 / 100 kW = 0.5333... ohm; the branch above is 0.01+0.02j p.u.
    const Complex z = 1.0 / g.ac_branches[0].series(0, 0);
    CHECK(z.real() == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(z.imag() == doctest::Approx(0.02).epsilon(1e-6));
}

TEST_CASE("the loader rejects unknown keys at every level") {
    std::string bad = kTinyGrid;
    bad.insert(bad.find("\"bases\""), "\"surprise\": 1, ");
    CHECK_THROWS_AS(parse_grid(bad), FileError);

    std::string bad_node = kTinyGrid;
    bad_node.replace(bad_node.find("\"role\": \"pq\""), 12, "\"role\": \"pq\", \"typo\": 3");
    CHECK_THROWS_AS(parse_grid(bad_node), FileError);
}

TEST_CASE("role-inconsistent setpoints are rejected") {
    std::string bad = kTinyGrid;
    bad.replace(bad.find("\"M2\": {\"p_w\": -2000.0}"), 23, "\"M2\": {\"e_v\": 800.0}");
    CHECK_THROWS_AS(parse_grid(bad), FileError);
}

TEST_CASE("unknown nodes and malformed JSON fail with file errors") {
    CHECK_THROWS_AS(parse_grid("{ not json"), FileError);
    CHECK_THROWS_AS(load_grid("/nonexistent/grid.json"), FileError);

    std::string bad = kTinyGrid;
    bad.replace(bad.find("\"N2\": {\"p_w\""), 4, "\"N9\"");
    CHECK_THROWS_AS(parse_grid(bad), FileError);
}

TEST_CASE("bundled case loads with the documented shape") {
    const GridModel g = load_grid(case_path("cigre_lv_hybrid.json"));
    CHECK(g.n_ac() == 18);
    CHECK(g.n_dc() == 8);
    CHECK(g.n_ic() == 4);
    CHECK(g.bases.power_w == doctest::Approx(100e3));
    CHECK(g.ac_nodes[g.slack_index].name == "B01");

    // The unbalance sits at B11: 0.2 p.u. spread between phases.
    const int b11 = g.ac_index("B11");
    REQUIRE(b11 >= 0);
    const double spread =
        g.setpoints.ac_p[b11].maxCoeff() - g.setpoints.ac_p[b11].minCoeff();
    CHECK(spread == doctest::Approx(0.2).epsilon(1e-12));

    int vdcq = 0, pq = 0;
    for (const Converter& ic : g.converters) (ic.mode == IcMode::VdcQ ? vdcq : pq)++;
    CHECK(vdcq == 2);
    CHECK(pq == 2);
}
