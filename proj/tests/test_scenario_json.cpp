#include "catch_amalgamated.hpp"

#include <cmath>
#include <fstream>

#include "scsim/scsim.hpp"
#include "support.hpp"

using namespace scsim;
using namespace scsim::testing;

namespace {

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return "";
}

Json small_case() {
    return Json::parse(R"({
      "name": "two-bus",
      "network": {
        "buses": [{"name": "A"}, {"name": "B", "load_p": 0.5, "load_q": 0.1}],
        "branches": [{"from": 0, "to": 1, "x": 0.1}]
      },
      "placements": [{"bus": 0, "kind": "sync_gen", "rated_mva": 100}],
      "events": [{"time": 0.5, "kind": "apply_fault", "bus": 1},
                 {"time": 0.55, "kind": "clear_fault", "bus": 1}],
      "config": {"t_end": 2}
    })");
}

}  // namespace

TEST_CASE("every catalog case survives a JSON round trip", "[json][roundtrip]") {
    for (const auto& s : case_catalog()) {
        INFO(s.name);
        const Json j = to_json(s);
        const ScenarioSpec back = scenario_from_json(j);
        CHECK(to_json(back) == j);
        CHECK(serialize_scenario(parse_scenario_text(serialize_scenario(s))) == serialize_scenario(s));
        CHECK(back.placements.size() == s.placements.size());
        CHECK(back.events.size() == s.events.size());
        CHECK(back.config.dt == s.config.dt);
    }
}

TEST_CASE("round trip preserves results", "[json][roundtrip]") {
    const auto spec = find_case("GFL13-SynCo-S14.85-H4");
    auto back = parse_scenario_text(serialize_scenario(spec));
    auto a = spec, b = back;
    a.config.t_end = b.config.t_end = 1.3;
    std::ostringstream ca, cb;
    write_csv(run(a), ca);
    write_csv(run(b), cb);
    CHECK(ca.str() == cb.str());
}

TEST_CASE("unbounded available power is written as null", "[json][roundtrip]") {
    const auto spec = find_case("GFL13-noSynCo");
    const Json j = to_json(spec);
    CHECK(j["placements"][0]["p_max"].is_null());
    const auto back = scenario_from_json(j);
    CHECK(std::isinf(back.placements[0].gfl().params.p_max));
    const Json gf = to_json(find_case("GF-noSynCo"));
    CHECK(gf["placements"][0]["p_max"].get<double>() == 0.45);
}

TEST_CASE("omitted fields take defaults", "[json][reader]") {
    const auto s = scenario_from_json(small_case());
    CHECK(s.network.size() == 2);
    CHECK(s.network.buses[0].v_set == 1.0);
    CHECK(s.network.branches[0].tap == 1.0);
    CHECK(s.placements[0].sync().machine.h == MachineParams{}.h);
    CHECK(s.events[0].admittance == Complex{kBoltedFaultConductance, 0.0});
    CHECK(s.config.dt == SimConfig{}.dt);
    CHECK(s.config.t_end == 2.0);
    const auto r = run(s);
    CHECK(r.termination == Termination::completed);
}

TEST_CASE("unknown keys are rejected by name", "[json][reader]") {
    Json j = small_case();
    j["placements"][0]["inirtia"] = 4.0;
    const std::string msg = error_of([&] { scenario_from_json(j); });
    CHECK(msg.find("unknown key") != std::string::npos);
    CHECK(msg.find("placements.0.inirtia") != std::string::npos);

    j = small_case();
    j["confg"] = Json::object();
    CHECK(error_of([&] { scenario_from_json(j); }).find("'confg'") != std::string::npos);

    j = small_case();
    j["config"]["step"] = 0.001;
    CHECK(error_of([&] { scenario_from_json(j); }).find("config.step") != std::string::npos);
}

TEST_CASE("type and enum errors name the key", "[json][reader]") {
    Json j = small_case();
    j["placements"][0]["h"] = "four";
    CHECK(error_of([&] { scenario_from_json(j); }).find("'placements.0.h' must be a number") != std::string::npos);

    j = small_case();
    j["placements"][0]["kind"] = "statcom";
    const auto msg = error_of([&] { scenario_from_json(j); });
    CHECK(msg.find("placements.0.kind") != std::string::npos);
    CHECK(msg.find("sync_cond") != std::string::npos);

    j = small_case();
    j["network"]["branches"][0].erase("from");
    CHECK(error_of([&] { scenario_from_json(j); }).find("missing required key 'network.branches.0.from'") !=
          std::string::npos);

    j = small_case();
    j["monitor"] = -1;
    CHECK(error_of([&] { scenario_from_json(j); }).find("non-negative integer") != std::string::npos);
}

TEST_CASE("semantic validation runs after parsing", "[json][reader]") {
    Json j = small_case();
    j["placements"][0]["h"] = -1.0;
    CHECK(error_of([&] { scenario_from_json(j); }).find("h must be positive") != std::string::npos);

    j = small_case();
    j["events"][1]["time"] = 0.1;
    CHECK(error_of([&] { scenario_from_json(j); }).find("sorted") != std::string::npos);

    j = small_case();
    j["config"]["dt"] = 0.5;
    CHECK(error_of([&] { scenario_from_json(j); }).find("config.dt") != std::string::npos);
}

TEST_CASE("malformed JSON reports its position", "[json][reader]") {
    const std::string msg = error_of([] { parse_scenario_text("{\n  \"name\": \"x\",\n  \"network\": [1, 2,\n", "bad.json"); });
    CHECK(msg.find("malformed JSON in bad.json") != std::string::npos);
    CHECK(msg.find("line 4") != std::string::npos);
}

TEST_CASE("missing scenario file", "[json][reader]") {
    const std::string msg = error_of([] { parse_scenario_file("/nonexistent/case.json"); });
    CHECK(msg.find("cannot read scenario file") != std::string::npos);
}

TEST_CASE("scenario file on disk", "[json][reader]") {
    const auto dir = scratch_dir("json_file");
    const auto path = dir / "case.json";
    std::ofstream(path) << serialize_scenario(find_case("GFL13-SynCo-S24.75-H4"));
    CHECK(to_json(parse_scenario_file(path.string())) == to_json(find_case("GFL13-SynCo-S24.75-H4")));
}

TEST_CASE("override changes exactly one field", "[json][override]") {
    const auto base = find_case("GFL13-SynCo-S14.85-H4");
    const auto changed = apply_override(base, "placements.3.h", "2");
    const Json patch = Json::diff(to_json(base), to_json(changed));
    REQUIRE(patch.size() == 1);
    CHECK(patch[0]["op"] == "replace");
    CHECK(patch[0]["path"] == "/placements/3/h");
    CHECK(changed.placements[3].sync().machine.h == 2.0);

    const auto gen = apply_override(base, "placements.1.h", "6");
    CHECK(Json::diff(to_json(base), to_json(gen)).size() == 1);
    CHECK(gen.placements[1].sync().machine.h == 6.0);
}

TEST_CASE("override values of each type", "[json][override]") {
    const auto base = find_case("GFL13-SynCo-S14.85-H4");
    CHECK(apply_override(base, "config.output_decimation", "5").config.output_decimation == 5);
    CHECK(apply_override(base, "network.branches.2.in_service", "false").network.branches[2].in_service == false);
    CHECK(apply_override(base, "placements.0.limit_priority", "reactive").placements[0].gfl().params.limit_priority ==
          LimitPriority::reactive);
    CHECK(apply_override(base, "description", "plain text").description == "plain text");
    CHECK(std::isinf(apply_override(find_case("GF-noSynCo"), "placements.0.p_max", "null").placements[0].gfl().params.p_max));
    const auto many = apply_overrides(base, {"placements.3.h=6", "config.t_end=4"});
    CHECK(many.placements[3].sync().machine.h == 6.0);
    CHECK(many.config.t_end == 4.0);
}

TEST_CASE("override errors", "[json][override]") {
    const auto base = find_case("GFL13-SynCo-S14.85-H4");
    // Placement 2 is the inverter at bus 3, which has no inertia field.
    CHECK(error_of([&] { apply_override(base, "placements.2.h", "2"); }).find("no field 'placements.2.h'") != std::string::npos);
    CHECK(error_of([&] { apply_override(base, "placements.9.h", "2"); }).find("index out of range") != std::string::npos);
    CHECK(error_of([&] { apply_override(base, "placements.x.h", "2"); }).find("array index") != std::string::npos);
    CHECK(error_of([&] { apply_override(base, "network", "2"); }).find("container") != std::string::npos);
    CHECK(error_of([&] { apply_override(base, "placements..h", "2"); }).find("empty segment") != std::string::npos);
    CHECK(error_of([&] { apply_override(base, "placements.3.h", "-2"); }).find("h must be positive") != std::string::npos);
    CHECK(error_of([&] { apply_overrides(base, {"placements.3.h"}); }).find("key=value") != std::string::npos);
    CHECK(error_of([&] { apply_overrides(base, {"=3"}); }).find("key=value") != std::string::npos);
}

TEST_CASE("sweep expansion", "[json][sweep]") {
    const auto base = find_case("GFL13-SynCo-S14.85-H4");
    const auto v = expand_sweep(base, {"placements.3.h=4,6", "placements.3.xd_pp=0.15,0.22,0.295"});
    REQUIRE(v.size() == 6);
    CHECK(v[0].name == "GFL13-SynCo-S14.85-H4__placements.3.h-4__placements.3.xd_pp-0.15");
    CHECK(v[5].name == "GFL13-SynCo-S14.85-H4__placements.3.h-6__placements.3.xd_pp-0.295");
    CHECK(v[5].placements[3].sync().machine.h == 6.0);
    CHECK(v[5].placements[3].sync().machine.xd_pp == 0.295);
    CHECK(expand_sweep(base, {}).size() == 1);
    CHECK_THROWS_AS(expand_sweep(base, {"placements.3.h=4,,6"}), ScenarioError);
}
