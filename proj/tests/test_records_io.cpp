#include <doctest.h>

#include <cmath>
#include <sstream>

#include "superrad/trajectory.hpp"

using namespace superrad;

namespace {

JumpRecord sample_record() {
    JumpRecord rec;
    rec.channel_labels = {"cavity", "pump-1", "pump-2"};
    rec.total_time = 12.5;
    rec.burn_in = 1.25;
    rec.seed = 0xDEADBEEFCAFEull;
    rec.model_tag = ModelTag::Adiabatic;
    rec.params.n_atoms = 2;
    rec.params.coupling = std::sqrt(2000.0);
    rec.params.kappa = 2000.0;
    rec.params.pump = 0.75;
    rec.events = {{0.12345678901234567, 0},
                  {std::acos(-1.0), 1},
                  {7.0000000000000009, 2},
                  {11.999999999999998, 0}};
    return rec;
}

} // namespace

TEST_CASE("records round-trip bit-exactly through the text format") {
    const JumpRecord rec = sample_record();
    std::stringstream ss;
    write_record(ss, rec);
    const auto back = read_records(ss);
    REQUIRE(back.size() == 1);
    const JumpRecord& r = back[0];
    CHECK(r.total_time == rec.total_time);
    CHECK(r.burn_in == rec.burn_in);
    CHECK(r.seed == rec.seed);
    CHECK(r.model_tag == rec.model_tag);
    CHECK(r.channel_labels == rec.channel_labels);
    CHECK(r.params.n_atoms == rec.params.n_atoms);
    CHECK(r.params.coupling == rec.params.coupling);
    CHECK(r.params.kappa == rec.params.kappa);
    CHECK(r.params.pump == rec.params.pump);
    REQUIRE(r.events.size() == rec.events.size());
    for (std::size_t i = 0; i < r.events.size(); ++i) {
        CHECK(r.events[i].time == rec.events[i].time); // 17 significant digits
        CHECK(r.events[i].channel == rec.events[i].channel);
    }
}

TEST_CASE("concatenated streams parse into separate records") {
    std::stringstream ss;
    for (int i = 0; i < 3; ++i) {
        JumpRecord rec = sample_record();
        rec.seed = i;
        write_record(ss, rec);
    }
    const auto back = read_records(ss);
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(back[i].seed == uint64_t(i));
}

TEST_CASE("engine-produced records survive the round trip") {
    const OperatorSet ops =
        build_adiabatic_model(SystemParams::adiabatic(2, 1.0, 2.0));
    StateVector init;
    init.amplitudes = ops.ground_state();
    const auto [rec, fin] = run_trajectory(ops, init, 50.0, 99);
    REQUIRE(rec.events.size() > 5);
    std::stringstream ss;
    write_record(ss, rec);
    const auto back = read_records(ss);
    REQUIRE(back.size() == 1);
    REQUIRE(back[0].events.size() == rec.events.size());
    for (std::size_t i = 0; i < rec.events.size(); ++i)
        CHECK(back[0].events[i].time == rec.events[i].time);
    CHECK(back[0].params.pump == rec.params.pump);
}

TEST_CASE("malformed records are rejected loudly") {
    {
        std::stringstream ss("#jumprecord v1\n#events 1\n");
        CHECK_THROWS_AS(read_records(ss), ConfigError);
    }
    {
        // Wrong version.
        std::stringstream ss("#jumprecord v9\n#events 0\n#end\n");
        CHECK_THROWS_AS(read_records(ss), ConfigError);
    }
    {
        // Event on an undeclared channel.
        std::stringstream ss("#jumprecord v1\n#model adiabatic\n#seed 1\n"
                             "#total_time 10\n#burn_in 0\n#channels cavity\n"
                             "#events 1\n1.0\tdetector\n#end\n");
        CHECK_THROWS_AS(read_records(ss), ConfigError);
    }
    {
        // Non-increasing times.
        std::stringstream ss("#jumprecord v1\n#model adiabatic\n#seed 1\n"
                             "#total_time 10\n#burn_in 0\n#channels cavity\n"
                             "#events 2\n2.0\tcavity\n1.0\tcavity\n#end\n");
        CHECK_THROWS_AS(read_records(ss), ConfigError);
    }
    {
        // Time outside [0, total_time].
        std::stringstream ss("#jumprecord v1\n#model adiabatic\n#seed 1\n"
                             "#total_time 10\n#burn_in 0\n#channels cavity\n"
                             "#events 1\n11.0\tcavity\n#end\n");
        CHECK_THROWS_AS(read_records(ss), ConfigError);
    }
    {
        // Missing #end.
        std::stringstream ss("#jumprecord v1\n#model adiabatic\n#seed 1\n"
                             "#total_time 10\n#burn_in 0\n#channels cavity\n"
                             "#events 1\n1.0\tcavity\n");
        CHECK_THROWS_AS(read_records(ss), ConfigError);
    }
}

TEST_CASE("file round trip") {
    const std::string path = "io_roundtrip_records.txt";
    std::vector<JumpRecord> recs = {sample_record(), sample_record()};
    recs[1].seed = 2;
    write_records_file(path, recs);
    const auto back = read_records_file(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].seed == 2);
    std::remove(path.c_str());
}
