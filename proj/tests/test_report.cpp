#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "moire/report.hpp"

using namespace moire;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "moire_report_tests" / name;
    fs::remove_all(dir);
    return dir;
}

// three branches over five angles, built by hand
SweepDataset three_branches() {
    SweepDataset ds;
    for (int i = 0; i < 5; ++i) {
        AngleRecord r;
        r.alpha_deg = i * 0.5;
        for (int b = 0; b < 3; ++b) {
            WaveMeasurement w;
            w.period = 2.0 + b + 0.1 * i;
            w.wavenumber = 1.0 / w.period;
            w.orientation_deg = -30.0 + 30.0 * b + i;
            w.amplitude = 0.05 * (b + 1);
            w.snr = 20;
            r.measurements.push_back(w);
            r.branch_ids.push_back(b);
        }
        ds.records.push_back(r);
    }
    for (int b = 0; b < 3; ++b) {
        Branch br;
        br.id = b;
        for (std::size_t i = 0; i < 5; ++i) {
            br.points.push_back({ds.records[i].alpha_deg, ds.records[i].measurements[b], i, std::size_t(b)});
        }
        br.update_extrema();
        ds.branches.push_back(br);
    }
    return ds;
}

}  // namespace

TEST(Report, EmptyDatasetGivesEmptyTablesAndNoPlots) {
    const auto dir = fresh_dir("empty");
    const auto written = emit_reports(SweepDataset{}, dir);
    EXPECT_EQ(written.size(), 4u);
    EXPECT_EQ(slurp(dir / "measurements.csv"), measurements_csv_header());
    EXPECT_EQ(count(slurp(dir / "branches.csv"), "\n"), 1u);
    EXPECT_EQ(count(slurp(dir / "predictions.csv"), "\n"), 1u);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "branch_summary.json")).size(), 0u);
    EXPECT_FALSE(fs::exists(dir / "sweep.svg"));
    EXPECT_FALSE(fs::exists(dir / "max_amplitude.svg"));
}

TEST(Report, ThreeBranchesThreeSeries) {
    const auto ds = three_branches();
    const Figure fig = sweep_figure(ds);
    ASSERT_EQ(fig.panels.size(), 3u);
    for (const auto& p : fig.panels) {
        ASSERT_EQ(p.series.size(), 3u);
        for (const auto& s : p.series) EXPECT_EQ(s.x.size(), 5u);
    }
    std::set<Marker> markers{marker_for(0), marker_for(1), marker_for(2)};
    EXPECT_EQ(markers.size(), 3u);
    const std::string svg = render_svg(fig);
    EXPECT_EQ(count(svg, "class=\"panel\""), 3u);
    EXPECT_EQ(count(svg, "class=\"series\""), 9u);
    EXPECT_NE(svg.find("<circle"), std::string::npos);
    EXPECT_NE(svg.find("<rect x="), std::string::npos);
    EXPECT_NE(svg.find("<polygon"), std::string::npos);

    const auto dir = fresh_dir("three");
    const auto written = emit_reports(ds, dir);
    EXPECT_EQ(written.size(), 6u);
    EXPECT_TRUE(fs::exists(dir / "sweep.svg"));
    EXPECT_TRUE(fs::exists(dir / "max_amplitude.svg"));
    EXPECT_EQ(count(slurp(dir / "measurements.csv"), "\n"), 1u + 15u);
    EXPECT_EQ(count(slurp(dir / "branches.csv"), "\n"), 1u + 15u);
    const auto summary = nlohmann::json::parse(slurp(dir / "branch_summary.json"));
    ASSERT_EQ(summary.size(), 3u);
    EXPECT_EQ(summary[2]["max_period_mm"].get<double>(), 4.4);
    EXPECT_EQ(summary[2]["angle_at_max_period"].get<double>(), 2.0);
}

TEST(Report, DeterministicBytes) {
    const auto ds = three_branches();
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    emit_reports(ds, a);
    emit_reports(ds, b);
    for (const char* f : {"measurements.csv", "branches.csv", "branch_summary.json", "predictions.csv", "sweep.svg",
                          "max_amplitude.svg"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST(Report, PitchTableOneRowPerPitch) {
    std::vector<PitchRow> rows;
    for (double p : {0.508, 0.339, 0.170}) {
        PitchRow r;
        r.barrier_pitch = p;
        r.rho = p / 0.266;
        r.alpha_deg = 45;
        r.max_period = 3.0 * p;
        r.max_amplitude = 0.02;
        rows.push_back(r);
    }
    const std::string csv = pitch_csv(rows);
    EXPECT_EQ(count(csv, "\n"), 4u);
    EXPECT_EQ(csv.substr(0, csv.find(',')), "barrier_pitch_mm");
    const auto dir = fresh_dir("pitch");
    EXPECT_EQ(emit_pitch_report(rows, dir).size(), 2u);
    EXPECT_EQ(count(slurp(dir / "pitch_study.svg"), "class=\"panel\""), 2u);
    EXPECT_EQ(emit_pitch_report({}, fresh_dir("pitch_empty")).size(), 1u);
}

TEST(Report, FreeAnglesAndNumbers) {
    const std::string csv =
        free_angles_csv({{9.2, 9.2349}, {39.3, 5.6}}, FreeAngleCriterion::MaxDistanceToRational);
    EXPECT_EQ(count(csv, "\n"), 3u);
    EXPECT_NE(csv.find("9.2349"), std::string::npos);
    const std::string m = measurements_csv_rows("img", 1.0, {});
    EXPECT_TRUE(m.empty());
}

TEST(Report, WriteTextNamesPathOnFailure) {
    const fs::path blocker = fresh_dir("blocker");
    fs::create_directories(blocker.parent_path());
    std::ofstream(blocker) << "a file, not a directory";
    try {
        write_text(blocker / "x.csv", "data");
        FAIL();
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("blocker"), std::string::npos);
    }
}

TEST(SvgPlot, NiceTicks) {
    EXPECT_EQ(nice_ticks(0, 1, 5), (std::vector<double>{0, 0.2, 0.4, 0.6000000000000001, 0.8, 1}));
    const auto t = nice_ticks(-90, 90, 6);
    EXPECT_EQ(t.front(), -90);
    EXPECT_EQ(t.back(), 90);
    EXPECT_TRUE(nice_ticks(1, 1).empty());
}
