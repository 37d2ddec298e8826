#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "zeno/errors.hpp"
#include "zeno/scenario.hpp"

using namespace zeno;

namespace {

const std::filesystem::path kScenarios = ZENO_SCENARIO_DIR;

const char* kMinimal = R"({
  "system": {
    "levels": [{"label": "e", "energy": 1.0}, {"label": "g", "energy": 0.0}],
    "channels": [{"label": "vac", "energy": 0.0}, {"label": "k", "energy": 1.2}]
  },
  "perturbation": {
    "initial": {"level": "e", "channel": "vac"},
    "final_level": "g",
    "couplings": [{"from": {"level": "e", "channel": "vac"}, "to": {"level": "g", "channel": "k"}, "re": 0.02}]
  },
  "measurement": {"kind": "dephasing", "gamma": 0.4},
  "schedule": {"tau": 2.0, "tau_f": 0.5, "n_repeats": 3},
  "outputs": ["components", "survival"]
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("every shipped scenario parses and round-trips") {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(kScenarios)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    const Scenario a = load_scenario(e.path());
    const Scenario b = parse_scenario(serialize(a));
    CHECK(a == b);
    CHECK(serialize(b) == serialize(a));
    ++n;
  }
  CHECK(n >= 5);
}

TEST_CASE("defaults are filled in") {
  const Scenario sc = parse_scenario(kMinimal);
  CHECK(sc.envelope.kind == Envelope::Kind::Constant);
  CHECK(sc.couplings.at(0).im == 0.0);
  CHECK(!sc.spectrum);
  CHECK(sc.omega_if() == 1.0);
  CHECK(sc.final_level_index() == 1);
  CHECK(sc.initial_state().channel == 0);
}

TEST_CASE("parse errors name the key") {
  SUBCASE("unknown key") {
    const std::string t = replace(kMinimal, R"("gamma": 0.4)", R"("gamma": 0.4, "gama": 1)");
    CHECK_THROWS_AS(parse_scenario(t), ParseError);
    CHECK(error_of(t).find("measurement.gama") != std::string::npos);
    std::vector<std::string> warnings;
    CHECK_NOTHROW(parse_scenario(t, false, &warnings));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("measurement.gama") != std::string::npos);
  }
  SUBCASE("missing key") {
    const std::string t = replace(kMinimal, R"("tau": 2.0, )", "");
    CHECK_THROWS_AS(parse_scenario(t), ParseError);
    CHECK(error_of(t).find("schedule.tau") != std::string::npos);
  }
  SUBCASE("wrong type") {
    const std::string t = replace(kMinimal, R"("gamma": 0.4)", R"("gamma": "big")");
    CHECK_THROWS_AS(parse_scenario(t), ParseError);
    CHECK(error_of(t).find("measurement.gamma") != std::string::npos);
  }
  SUBCASE("bad json") { CHECK_THROWS_AS(parse_scenario("{"), ParseError); }
  SUBCASE("negative gamma") {
    const std::string t = replace(kMinimal, R"("gamma": 0.4)", R"("gamma": -0.4)");
    CHECK_THROWS_AS(parse_scenario(t), ValidationError);
    CHECK(error_of(t).find("measurement") != std::string::npos);
  }
  SUBCASE("unknown level") {
    CHECK_THROWS_AS(parse_scenario(replace(kMinimal, R"("final_level": "g")", R"("final_level": "x")")),
                    ValidationError);
  }
  SUBCASE("unknown output") {
    CHECK_THROWS_AS(parse_scenario(replace(kMinimal, R"("survival"])", R"("survivl"])")), ParseError);
  }
  SUBCASE("tau_f beyond tau") {
    CHECK_THROWS_AS(parse_scenario(replace(kMinimal, R"("tau_f": 0.5)", R"("tau_f": 3.0)")), ValidationError);
  }
}

TEST_CASE("sweep validation") {
  const std::string base = replace(kMinimal, R"("outputs")",
                                   R"("spectrum": {"kind": "lorentzian", "center": 1.0, "half_width": 0.1,
                                       "strength": 0.01},
                                      "sweep": {"tau_min": 0.5, "tau_max": 50, "points": 12},
                                      "outputs")");
  CHECK_NOTHROW(parse_scenario(base));
  CHECK_THROWS_AS(parse_scenario(replace(base, R"("points": 12)", R"("points": 1)")), ValidationError);
  CHECK_THROWS_AS(parse_scenario(replace(base, R"("tau_max": 50)", R"("tau_max": 0.1)")), ValidationError);
  const SweepSpec s = parse_scenario(base).sweep.value();
  const auto g = s.grid();
  REQUIRE(g.size() == 12);
  CHECK(std::abs(g.front() - 0.5) < 1e-15);
  CHECK(std::abs(g.back() - 50.0) < 1e-12);
  CHECK(std::abs(g[1] / g[0] - g[11] / g[10]) < 1e-12);
}

TEST_CASE("run outputs") {
  const Scenario sc = parse_scenario(kMinimal);
  const RunReport r = run_scenario(sc);
  REQUIRE(r.components.size() == 2);
  CHECK(r.components[0].w_total == 0.0);
  const auto& k = r.components[1];
  CHECK(std::abs(k.w_f + k.w_m + k.w_i - k.w_total) < 1e-10);
  CHECK(std::abs(r.rate - k.w_total / 2.0) < 1e-18);
  REQUIRE(r.survival.size() == 4);
  CHECK(r.survival[0][1] == 1.0);
  CHECK(std::abs(r.survival[3][1] - std::exp(-r.rate * 6.0)) < 1e-15);
  CHECK(std::abs(r.survival[3][2] - std::pow(1.0 - k.w_total, 3)) < 1e-15);

  SUBCASE("csv is deterministic") {
    const auto a = render_csv(r), b = render_csv(run_scenario(sc, RunMode::Run, {{}, 3, 401}));
    CHECK(a == b);
    REQUIRE(a.size() == 2);
    CHECK(a[0].first == "components.csv");
    CHECK(a[0].second.rfind("channel,w_total,w_m,w_f,w_i\n", 0) == 0);
    CHECK(a[1].second.rfind("n,survival_exp,survival_power\n", 0) == 0);
  }
  SUBCASE("zero coupling") {
    Scenario z = sc;
    z.couplings[0].re = 0.0;
    const RunReport rz = run_scenario(z);
    for (const auto& c : rz.components) CHECK(c.w_total == 0.0);
    CHECK(rz.rate == 0.0);
    for (const auto& s : rz.survival) CHECK(s[1] == 1.0);
  }
  SUBCASE("no free evolution") {
    Scenario z = sc;
    z.schedule.tau_f = 0.0;
    const RunReport rz = run_scenario(z);
    CHECK(rz.components[1].w_f == 0.0);
    CHECK(rz.components[1].w_i == 0.0);
  }
  SUBCASE("strong coupling is flagged") {
    Scenario z = sc;
    z.couplings[0].re = 0.5;
    const RunReport rz = run_scenario(z);
    bool warned = false;
    for (const auto& l : rz.log) warned |= l.find("exceeds 0.1") != std::string::npos;
    CHECK(warned);
  }
}

TEST_CASE("sweep and profile runs") {
  const Scenario sc = load_scenario(kScenarios / "anti_zeno_sweep.json");
  const RunReport r = run_scenario(sc, RunMode::Sweep);
  REQUIRE(r.rates.size() == 24);
  for (const auto& row : r.rates) {
    CHECK(row.rate > 0.0);
    CHECK((row.regime == "zeno" || row.regime == "anti-zeno" || row.regime == "neutral"));
  }
  CHECK(r.profile.size() == 401);
  const auto files = render_csv(r);
  CHECK(files[0].second.rfind("tau,rate,rate_golden_rule,regime\n", 0) == 0);

  const Scenario p = load_scenario(kScenarios / "profile_dephasing.json");
  const RunReport rp = run_scenario(p, RunMode::Profile);
  REQUIRE(rp.profile.size() == 401);
  CHECK(render_csv(rp).at(0).second.rfind("omega,P\n", 0) == 0);
}
