#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "rsync_sim/sensing.hpp"

using namespace rsync_sim;

namespace {
std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("noiseless observation equals the true motion") {
    const RhythmicMotion m = RhythmicMotion::x_only(25.0, 0.2);
    SensorModel s;
    const TrackSeries ts = observe(m, s);
    REQUIRE(ts.size() == 900);  // 15 fps * 60 s
    for (std::size_t i = 0; i < ts.size(); i += 37) {
        const auto& sample = ts.samples[i];
        CHECK(sample.t == Catch::Approx(i / 15.0));
        CHECK(approx_equal(sample.pose, motion_pose(m, sample.t), 1e-12));
    }
}

TEST_CASE("observation rejects undersampling and short records") {
    SensorModel s;
    s.fps = 0.3;
    CHECK_THROWS_AS(observe(RhythmicMotion::x_only(5, 0.2), s), NyquistError);
    s.fps = 15;
    s.duration = 10.0;  // 2 periods at 0.2 Hz
    CHECK_THROWS_AS(observe(RhythmicMotion::x_only(5, 0.2), s), NoSamplesError);
}

TEST_CASE("observation is deterministic per seed") {
    const RhythmicMotion m = RhythmicMotion::x_only(10.0, 0.25);
    SensorModel s;
    s.sigma_trans = 1.0;
    s.sigma_rot = 0.2;
    s.seed = 42;
    const TrackSeries a = observe(m, s);
    const TrackSeries b = observe(m, s);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.samples[i].pose.tx == b.samples[i].pose.tx);
        CHECK(a.samples[i].pose.rz == b.samples[i].pose.rz);
    }
    s.seed = 43;
    const TrackSeries c = observe(m, s);
    CHECK(a.samples[0].pose.tx != c.samples[0].pose.tx);
}

TEST_CASE("noise statistics match the configured sigma") {
    const RhythmicMotion m = RhythmicMotion::x_only(10.0, 0.25);
    // mean residual over 900 samples stays within +-0.15 mm at sigma = 1
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SensorModel s;
        s.sigma_trans = 1.0;
        s.seed = seed;
        const TrackSeries ts = observe(m, s);
        double mean = 0.0;
        for (const auto& smp : ts.samples) mean += smp.pose.tx - motion_pose(m, smp.t).tx;
        mean /= static_cast<double>(ts.size());
        CHECK(std::abs(mean) < 0.15);
    }
    // sample standard deviation converges to sigma within 10%
    SensorModel s;
    s.sigma_trans = 1.0;
    s.seed = 7;
    const TrackSeries ts = observe(m, s);
    double var = 0.0;
    for (const auto& smp : ts.samples) {
        const double r = smp.pose.ty - motion_pose(m, smp.t).ty;
        var += r * r;
    }
    var /= static_cast<double>(ts.size() - 1);
    CHECK(std::sqrt(var) == Catch::Approx(1.0).epsilon(0.10));
}

TEST_CASE("track round-trips through CSV") {
    const RhythmicMotion m = RhythmicMotion::sinusoidal({7, 3, 1, 0.5, 0, 0.2}, 0.3, 0.123);
    SensorModel s;
    s.sigma_trans = 0.5;
    s.seed = 5;
    s.duration = 20.0;
    const TrackSeries ts = observe(m, s);
    const std::string path = temp_path("rsync_sim_track_test.csv");
    write_track(ts, path);
    const TrackSeries back = read_track(path);
    REQUIRE(back.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); i += 11) {
        CHECK(back.samples[i].t == Catch::Approx(ts.samples[i].t).epsilon(1e-9));
        CHECK(back.samples[i].pose.tx == Catch::Approx(ts.samples[i].pose.tx).epsilon(1e-9));
        CHECK(back.samples[i].pose.rz == Catch::Approx(ts.samples[i].pose.rz).epsilon(1e-9));
    }
    std::remove(path.c_str());
}

TEST_CASE("malformed track files fail with a row number") {
    const std::string path = temp_path("rsync_sim_track_bad.csv");
    {
        std::ofstream out(path);
    }
    CHECK_THROWS_AS(read_track(path), MalformedRowError);
    {
        std::ofstream out(path);
        out << kTrackHeader << '\n';
    }
    CHECK_THROWS_AS(read_track(path), NoSamplesError);
    {
        std::ofstream out(path);
        out << kTrackHeader << '\n' << "0,1,2,3,4,5,6\n" << "bad line\n";
    }
    try {
        read_track(path);
        FAIL("expected MalformedRowError");
    } catch (const MalformedRowError& e) {
        CHECK(e.row == 3);
    }
    std::remove(path.c_str());
}
