#include "catch_amalgamated.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "scsim/scsim.hpp"
#include "support.hpp"

using namespace scsim;
using namespace scsim::testing;
using Catch::Approx;

namespace {

struct Trace {
    std::vector<double> t, f;
};

template <class F>
Trace synth(double t_end, double dt, F f) {
    Trace tr;
    const auto n = std::llround(t_end / dt);
    for (long long k = 0; k <= n; ++k) {
        tr.t.push_back(k * dt);
        tr.f.push_back(f(k * dt));
    }
    return tr;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

TEST_CASE("catalog covers the study and validates", "[scenarios][catalog]") {
    const auto cat = case_catalog();
    CHECK(cat.size() >= 15);
    std::set<std::string> names;
    for (const auto& s : cat) {
        INFO(s.name);
        CHECK(names.insert(s.name).second);
        CHECK_NOTHROW(s.validate());
    }
}

TEST_CASE("GFL13-noSynCo composition", "[scenarios][catalog]") {
    const auto s = find_case("GFL13-noSynCo");
    REQUIRE(s.placements.size() == 3);
    CHECK(devices_of_kind(s, DeviceKind::gfl).size() == 2);
    CHECK(devices_of_kind(s, DeviceKind::sync_gen).size() == 1);
    for (const auto& p : s.placements) CHECK(p.rated_mva() == 200.0);
    CHECK(s.placements[0].bus == 0);
    CHECK(s.placements[1].bus == 1);
    CHECK(s.placements[2].bus == 2);
    REQUIRE(s.events.size() == 2);
    CHECK(s.events[0].kind == EventKind::apply_fault);
    CHECK(s.events[0].bus == 5);
    CHECK(s.events[0].time == 1.0);
    CHECK(s.events[1].kind == EventKind::clear_fault);
    CHECK(s.events[1].time - s.events[0].time == Approx(0.083).margin(5e-4));
}

TEST_CASE("grid-forming cases carry the stated condenser ratings", "[scenarios][catalog]") {
    const auto three = find_case("GF-SynCo3");
    std::vector<double> ratings;
    for (auto i : devices_of_kind(three, DeviceKind::sync_cond)) ratings.push_back(three.placements[i].rated_mva());
    CHECK(ratings == std::vector<double>{14.85, 14.58, 20.70});
    CHECK(devices_of_kind(three, DeviceKind::aux_source).size() == 1);
    REQUIRE(three.events.size() == 1);
    CHECK(three.events[0].kind == EventKind::open_breaker);
    CHECK(three.placements[three.events[0].index].kind == DeviceKind::aux_source);
    CHECK(devices_of_kind(find_case("GF-SynCo1"), DeviceKind::sync_cond).size() == 1);
    CHECK(devices_of_kind(find_case("GF-noSynCo"), DeviceKind::sync_cond).empty());
}

TEST_CASE("sweep cases vary only the intended parameter", "[scenarios][catalog]") {
    for (double x : {0.150, 0.220, 0.295}) {
        std::ostringstream n;
        n.setf(std::ios::fixed);
        n.precision(3);
        n << "GFL13-SynCo-S24.75-H4-Xd" << x;
        const auto s = find_case(n.str());
        const auto c = devices_of_kind(s, DeviceKind::sync_cond);
        REQUIRE(c.size() == 1);
        CHECK(s.placements[c[0]].sync().machine.xd_pp == x);
        CHECK(s.placements[c[0]].sync().machine.rated_mva == 24.75);
    }
    for (double h : {4.0, 6.0}) {
        const auto s = find_case("GFL13-genH2-SynCo-S24.75-H" + std::to_string(static_cast<int>(h)));
        CHECK(s.placements[s.monitor].kind == DeviceKind::sync_gen);
        CHECK(s.placements[s.monitor].sync().machine.h == 2.0);
        CHECK(s.placements[devices_of_kind(s, DeviceKind::sync_cond)[0]].sync().machine.h == h);
    }
    for (const auto& s : case_catalog()) {
        if (s.name.find("split") == std::string::npos) continue;
        double total = 0.0;
        for (auto i : devices_of_kind(s, DeviceKind::sync_cond)) total += s.placements[i].rated_mva();
        CHECK(total == Approx(22.71).epsilon(1e-12));
    }
}

TEST_CASE("catalog lookup", "[scenarios][catalog]") {
    CHECK(find_case("gfl13-synco-s24.75-h4").name == "GFL13-SynCo-S24.75-H4");
    CHECK_THROWS_AS(find_case("no-such-case"), ScenarioError);
}

TEST_CASE("metrics of a flat trace", "[scenarios][metrics]") {
    const auto tr = synth(10.0, 1e-3, [](double) { return 60.0; });
    const auto m = frequency_metrics(tr.t, tr.f, 0.0);
    CHECK(m.nadir_hz == 60.0);
    CHECK_FALSE(m.time_to_ufls_s);
    CHECK(m.max_rocof_hz_s == 0.0);
    REQUIRE(m.settling_time_s);
    CHECK(*m.settling_time_s == 0.0);
    CHECK(m.verdict == Verdict::stable);
}

TEST_CASE("metrics of a frequency ramp", "[scenarios][metrics]") {
    // 60 -> 59.4 Hz over 0.1 s starting at the event, then held.
    const auto tr = synth(10.0, 1e-3, [](double t) { return t < 1.0 ? 60.0 : 60.0 - 6.0 * std::min(t - 1.0, 0.1); });
    const auto m = frequency_metrics(tr.t, tr.f, 1.0);
    REQUIRE(m.time_to_ufls_s);
    CHECK(*m.time_to_ufls_s == Approx(0.5 / 6.0).margin(1e-9));
    CHECK(m.max_rocof_hz_s == Approx(6.0).epsilon(1e-9));
    CHECK(m.nadir_hz == Approx(59.4).epsilon(1e-12));
    CHECK(m.verdict == Verdict::stable);
}

TEST_CASE("metrics of a sustained oscillation", "[scenarios][metrics]") {
    const double period = 0.8;
    const auto tr = synth(12.0, 1e-3, [&](double t) { return 60.0 + 0.5 * std::sin(2.0 * std::numbers::pi * t / period); });
    const auto m = frequency_metrics(tr.t, tr.f, 0.0);
    CHECK(m.verdict == Verdict::unstable);
    REQUIRE(m.osc_period_s);
    CHECK(*m.osc_period_s == Approx(period).epsilon(1e-4));
    CHECK_FALSE(m.settling_time_s);
    CHECK(classify_stability(tr.t, tr.f) == Verdict::unstable);
}

TEST_CASE("damped oscillation classifies as stable", "[scenarios][metrics]") {
    const auto tr = synth(10.0, 1e-3, [](double t) { return 60.0 + 0.5 * std::exp(-t) * std::sin(2.0 * std::numbers::pi * t); });
    CHECK(classify_stability(tr.t, tr.f) == Verdict::stable);
    const auto m = frequency_metrics(tr.t, tr.f, 0.0);
    CHECK(m.verdict == Verdict::stable);
    REQUIRE(m.settling_time_s);
    // Envelope 0.5 e^-t falls below the 0.05 Hz band near ln(10) s.
    CHECK(*m.settling_time_s < std::log(10.0) + 0.01);
    CHECK(*m.settling_time_s > 1.0);
}

TEST_CASE("collapse verdicts", "[scenarios][metrics]") {
    const auto flat = synth(10.0, 1e-2, [](double) { return 60.0; });
    CHECK(classify_stability(flat.t, flat.f, true) == Verdict::collapsed);
    const auto dive = synth(10.0, 1e-2, [](double t) { return t < 5.0 ? 60.0 : 54.0; });
    CHECK(classify_stability(dive.t, dive.f) == Verdict::collapsed);
    const auto m = frequency_metrics(flat.t, flat.f, 0.0, true);
    CHECK(m.verdict == Verdict::collapsed);
}

TEST_CASE("stability window longer than the trace is an error", "[scenarios][metrics]") {
    const auto tr = synth(1.0, 1e-3, [](double) { return 60.0; });
    CHECK_THROWS_AS(classify_stability(tr.t, tr.f), ContractError);
    CHECK_THROWS_AS(frequency_metrics({}, {}, 0.0), ContractError);
    SimResult empty;
    empty.devices.resize(1);
    CHECK_THROWS_AS(metrics(empty, 0), ContractError);
    CHECK_THROWS_AS(metrics(empty, 3), ContractError);
}

TEST_CASE("CSV schema and exact round trip", "[scenarios][csv]") {
    const auto spec = without_events(find_case("GFL13-2SynCo-S12.36-S10.35"), 0.3);
    const auto r = run(spec);
    std::ostringstream os;
    write_csv(r, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    const auto header = split(line);
    const std::size_t expected = 1 + 2 * spec.network.size() + 5 * spec.placements.size();
    CHECK(header.size() == expected);
    CHECK(header == csv_header(r));
    CHECK(header[0] == "t");
    CHECK(header[1] == "v_1");
    CHECK(header[2] == "ang_1");

    std::size_t row = 0;
    while (std::getline(is, line)) {
        const auto cells = split(line);
        REQUIRE(cells.size() == expected);
        double t = 0.0;
        std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), t);
        CHECK(t == r.t[row]);
        double v = 0.0;
        std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), v);
        CHECK(v == r.v_mag[0][row]);
        ++row;
    }
    CHECK(row == r.rows());
}

TEST_CASE("CSV output is byte identical across runs", "[scenarios][csv]") {
    auto spec = find_case("GFL13-SynCo-S14.85-H4");
    spec.config.t_end = 2.5;
    std::ostringstream a, b;
    write_csv(run(spec), a);
    write_csv(run(spec), b);
    CHECK(a.str() == b.str());
}

TEST_CASE("CSV export reports unwritable paths", "[scenarios][csv]") {
    const auto r = run(without_events(find_case("GFL13-noSynCo"), 0.02));
    CHECK_THROWS_AS(export_csv(r, "/nonexistent-dir/x.csv"), IoError);
}
